"""Damped Newton-Raphson maximizer shared by the parametric learners."""

from __future__ import annotations

import numpy as np

from ..errors import Nonconvergence, SingularHessian

SINGULAR_RTOL = 1e-10


def newton_direction(grad, hess):
    """Ascent direction ``(-H)^{-1} g``.

    Eigenvalues of ``-H`` are replaced by their absolute value so the step
    is an ascent direction even where the objective is locally non-concave.
    """
    vals, vecs = np.linalg.eigh(-hess)
    scale = np.max(np.abs(vals)) if vals.size else 0.0
    if vals.size and (scale == 0.0 or np.min(np.abs(vals)) <= SINGULAR_RTOL * scale):
        raise SingularHessian(
            "Hessian is singular (rank-deficient or separable design); "
            "consider a ridge penalty > 0"
        )
    return vecs @ ((vecs.T @ grad) / np.abs(vals))


def newton_maximize(fun, x0, *, max_iter=50, tol=1e-9, max_halving=20, check=None):
    """Maximize ``fun`` where ``fun(x)`` returns ``(value, grad, hess)``.

    Converged when one accepted step changes the objective by less than
    ``tol``. A step that lowers the objective is halved up to
    ``max_halving`` times. ``check(x)`` may raise to abort early.

    Returns ``(x, value, grad, hess, n_iter)``.
    """
    x = np.asarray(x0, dtype=float)
    f, g, h = fun(x)
    if not np.isfinite(f):
        raise Nonconvergence("objective is not finite at the starting point", params=x)
    for it in range(1, max_iter + 1):
        step = newton_direction(g, h)
        scale = 1.0
        for _ in range(max_halving + 1):
            x_new = x + scale * step
            f_new, g_new, h_new = fun(x_new)
            if np.isfinite(f_new) and (f_new >= f or abs(f_new - f) < tol):
                break
            scale *= 0.5
        else:
            raise Nonconvergence(
                f"step-halving failed to improve the objective at iteration {it}", params=x
            )
        delta = f_new - f
        x, f, g, h = x_new, f_new, g_new, h_new
        if check is not None:
            check(x)
        if abs(delta) < tol:
            return x, f, g, h, it
    raise Nonconvergence(f"no convergence after {max_iter} iterations (last change {delta:.3g})", params=x)
