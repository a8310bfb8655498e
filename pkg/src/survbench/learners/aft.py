"""Weibull accelerated failure time model.

``log T = mu + x'gamma + sigma * W`` with ``W`` standard minimum extreme
value, so ``S(t | x) = exp(-exp((log t - mu - x'gamma) / sigma))``.
The optimizer works on ``theta = (mu, gamma, log sigma)``.
"""

from __future__ import annotations

import numpy as np

from ..errors import NoEvents, Nonconvergence, SingularHessian
from ._newton import newton_maximize
from .base import FittedModel

MIN_SCALE = 1e-8


class WeibullLikelihood:
    """Right-censored Weibull log-likelihood with analytic derivatives."""

    def __init__(self, X, time, status):
        self.U = np.column_stack([np.ones(len(time)), np.asarray(X, dtype=float)])
        self.y = np.log(np.asarray(time, dtype=float))
        self.d = np.asarray(status, dtype=bool).astype(float)
        if not self.d.any():
            raise NoEvents("Weibull AFT needs at least one event")

    def __call__(self, theta, order=2):
        theta = np.asarray(theta, dtype=float)
        U, y, d = self.U, self.y, self.d
        coef, s = theta[:-1], theta[-1]
        sigma = np.exp(s)
        z = (y - U @ coef) / sigma
        ez = np.exp(z)
        loglik = np.sum(d * (z - s - y) - ez)
        if order == 0:
            return loglik

        r = ez - d
        grad = np.concatenate([U.T @ r / sigma, [np.sum(z * r - d)]])

        k = U.shape[1]
        hess = np.empty((k + 1, k + 1))
        hess[:k, :k] = -(U * (ez / sigma**2)[:, None]).T @ U
        cross = -U.T @ (z * ez + r) / sigma
        hess[:k, k] = cross
        hess[k, :k] = cross
        hess[k, k] = -np.sum(z * r + z**2 * ez)
        return loglik, grad, hess


def initial_theta(X, time, status):
    """Least-squares start on log time; scale from the residual spread."""
    y = np.log(np.asarray(time, dtype=float))
    U = np.column_stack([np.ones(y.size), np.asarray(X, dtype=float)])
    coef, *_ = np.linalg.lstsq(U, y, rcond=None)
    resid = y - U @ coef
    spread = np.std(resid) * np.sqrt(6.0) / np.pi
    s0 = np.log(spread) if spread > 1e-8 else 0.0
    # extreme-value location shift: E[W] = -euler_gamma
    coef[0] += np.euler_gamma * (spread if spread > 1e-8 else 1.0)
    return np.concatenate([coef, [s0]])


def fit_weibull_aft(task, max_iter=100, tol=1e-9):
    """Maximum-likelihood Weibull AFT fit.

    Raises :class:`Nonconvergence` when the scale collapses below 1e-8
    (e.g. all observed times identical).
    """
    time, status = task.time, task.status
    if not status.any():
        raise NoEvents("Weibull AFT needs at least one event")
    if np.ptp(np.log(time)) == 0:
        raise Nonconvergence("all observed times are identical: Weibull scale collapses to 0")

    def check(theta):
        if np.exp(theta[-1]) < MIN_SCALE:
            raise Nonconvergence(f"Weibull scale fell below {MIN_SCALE}", params=theta)

    lik = WeibullLikelihood(task.features, time, status)
    theta0 = initial_theta(task.features, time, status)
    try:
        theta, loglik, grad, _, n_iter = newton_maximize(lik, theta0, max_iter=max_iter, tol=tol, check=check)
    except SingularHessian as exc:
        raise SingularHessian(f"Weibull AFT: {exc}") from None
    return FittedModel(
        "weibull_aft",
        {"intercept": theta[0], "coef": theta[1:-1], "scale": np.exp(theta[-1]),
         "grid": np.unique(time[status])},
        feature_names=task.feature_names,
        info={"loglik": float(loglik), "n_iter": int(n_iter), "grad_norm": float(np.max(np.abs(grad)))},
    )
