"""Cox proportional hazards model fitted by Newton-Raphson."""

from __future__ import annotations

import numpy as np

from ..errors import NoEvents, Nonconvergence, ValidationError
from ._newton import newton_maximize
from .base import FittedModel

TIES = ("breslow", "efron")


class PartialLikelihood:
    """Log partial likelihood with gradient and Hessian.

    Risk-set sums are suffix sums over the time-sorted data; second-order
    terms are folded into per-row weights so memory stays ``O(N P)``.

    Parameters
    ----------
    X : (N, P) array
    time, status : length-N arrays
    ties : {"breslow", "efron"}
    ridge : float or (P,) array
        L2 penalty ``ridge / 2 * ||beta||^2`` subtracted from the likelihood.
    """

    def __init__(self, X, time, status, ties="efron", ridge=0.0):
        if ties not in TIES:
            raise ValidationError(f"ties must be one of {TIES}, got {ties!r}")
        order = np.argsort(time, kind="stable")
        self.X = np.asarray(X, dtype=float)[order]
        self.time = np.asarray(time, dtype=float)[order]
        self.status = np.asarray(status, dtype=bool)[order]
        self.ties = ties
        self.ridge = np.broadcast_to(np.asarray(ridge, dtype=float), (self.X.shape[1],))
        if not self.status.any():
            raise NoEvents("partial likelihood needs at least one event")

        ev = np.flatnonzero(self.status)
        self.ev = ev
        ev_times, group, counts = np.unique(self.time[ev], return_inverse=True, return_counts=True)
        self.event_times = ev_times
        self.group = group
        self.counts = counts
        # first row (sorted) of each risk set
        self.start = np.searchsorted(self.time, ev_times, side="left")
        # within-tie rank l = 0..d-1 for each event instance
        first = np.concatenate([[0], np.cumsum(counts)[:-1]])
        rank = np.arange(ev.size) - first[group]
        if ties == "efron":
            self.frac = rank / counts[group]
        else:
            self.frac = np.zeros(ev.size)
        # row k lies in the risk set of every group whose start <= k
        self.row_group = np.searchsorted(self.start, np.arange(self.time.size), side="right") - 1

    def risk_sums(self, beta):
        eta = self.X @ beta
        shift = eta.max()
        w = np.exp(eta - shift)
        s0 = np.cumsum(w[::-1])[::-1][self.start]
        return eta, w, shift, s0

    def __call__(self, beta, order=2):
        beta = np.asarray(beta, dtype=float)
        X, ev, g = self.X, self.ev, self.group
        eta, w, shift, s0_all = self.risk_sums(beta)
        n_groups = self.event_times.size

        s0r = s0_all[g]
        s0d = np.bincount(g, weights=w[ev], minlength=n_groups)[g]
        den = s0r - self.frac * s0d
        loglik = eta[ev].sum() - np.sum(np.log(den) + shift)
        loglik -= 0.5 * np.sum(self.ridge * beta**2)
        if order == 0:
            return loglik

        wx = w[:, None] * X
        s1r = np.cumsum(wx[::-1], axis=0)[::-1][self.start][g]
        s1d = np.zeros((n_groups, X.shape[1]))
        np.add.at(s1d, g, wx[ev])
        m = (s1r - self.frac[:, None] * s1d[g]) / den[:, None]
        grad = X[ev].sum(axis=0) - m.sum(axis=0) - self.ridge * beta

        # sum over instances of S2_R / den, folded into row weights
        inv = np.bincount(g, weights=1.0 / den, minlength=n_groups)
        a = np.where(self.row_group >= 0, np.cumsum(inv)[np.maximum(self.row_group, 0)], 0.0)
        b = np.bincount(g, weights=self.frac / den, minlength=n_groups)[g]
        info = (X * (w * a)[:, None]).T @ X
        info -= (X[ev] * (w[ev] * b)[:, None]).T @ X[ev]
        info -= m.T @ m
        hess = -info - np.diag(self.ridge)
        return loglik, grad, hess

    def baseline_cumhaz(self, beta):
        """Breslow estimator of the baseline cumulative hazard at event times."""
        _, _, shift, s0 = self.risk_sums(np.asarray(beta, dtype=float))
        return self.event_times, np.cumsum(self.counts / (s0 * np.exp(shift)))


def fit_coxph(task, ties="efron", max_iter=50, tol=1e-9, ridge=0.0):
    """Fit a Cox model by damped Newton-Raphson on the partial likelihood.

    Features are centered and scaled internally; the returned coefficients
    are on the original feature scale and ``lp`` is computed on the
    centered scale, so a subject at the training mean has ``lp = 0``.
    """
    if task.p < 1:
        raise ValidationError("coxph needs at least one feature")
    if not task.status.any():
        raise NoEvents("coxph needs at least one event")
    if ridge < 0:
        raise ValidationError("ridge must be >= 0")
    center = task.features.mean(axis=0)
    scale = task.features.std(axis=0)
    scale[scale == 0] = 1.0
    Z = (task.features - center) / scale
    # ridge acts on original-scale coefficients beta = beta_scaled / scale
    pl = PartialLikelihood(Z, task.time, task.status, ties=ties, ridge=ridge / scale**2)
    try:
        beta_s, loglik, grad, _, n_iter = newton_maximize(pl, np.zeros(task.p), max_iter=max_iter, tol=tol)
    except Nonconvergence as exc:
        if exc.params is not None:
            exc.params = exc.params / scale
        raise
    coef = beta_s / scale
    grid, cumhaz = pl.baseline_cumhaz(beta_s)
    return FittedModel(
        "coxph",
        {"coef": coef, "center": center, "grid": grid, "cumhaz": cumhaz},
        feature_names=task.feature_names,
        info={"loglik": float(loglik), "n_iter": int(n_iter), "ties": ties, "ridge": float(ridge),
              "grad_norm": float(np.max(np.abs(grad * scale)))},
    )
