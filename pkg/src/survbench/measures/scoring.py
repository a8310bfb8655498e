"""IPCW-weighted integrated scoring rules for distribution predictions.

All three share one pointwise form, averaged over subjects ``i``::

    L_t = loss_event(S_i(t)) * 1(t_i <= t, delta_i = 1) / G(t_i-)
        + loss_surv(S_i(t))  * 1(t_i > t)               / G(t)

integrated by the trapezoid rule over the unique test event times ``<= tau``
and divided by the length of that grid. A single-point grid returns the
pointwise value.
"""

from __future__ import annotations

import numpy as np

from ..core import EPS
from ..errors import EmptyGrid, MissingDistr
from .ipcw import CensoringEstimate


def score_grid(pred, tau=None):
    t = pred.time[pred.status]
    tau = pred.time.max() if tau is None else tau
    grid = np.unique(t[t <= tau])
    if grid.size == 0:
        raise EmptyGrid(f"no test event times <= tau={tau}")
    return grid


def pointwise_ipcw(pred, loss_event, loss_surv, tau=None):
    """``(grid, L)`` with ``L[k]`` the mean weighted loss at ``grid[k]``."""
    if pred.surv is None:
        raise MissingDistr("scoring rule needs a distr prediction")
    grid = score_grid(pred, tau)
    cens = CensoringEstimate(pred.time, pred.status)
    g_left, _ = cens.floored(cens.left(pred.time))
    g_grid, _ = cens.floored(cens.at(grid))

    S = pred.survival_at(grid)
    ti = pred.time[:, None]
    died = (ti <= grid[None, :]) & pred.status[:, None]
    alive = ti > grid[None, :]
    contrib = np.where(died, loss_event(S) / g_left[:, None], 0.0)
    contrib = contrib + np.where(alive, loss_surv(S) / g_grid[None, :], 0.0)
    # sorting fixes the summation order, making the mean independent of row order
    return grid, np.sort(contrib, axis=0).sum(axis=0) / pred.n


def integrate(grid, values) -> float:
    if grid.size == 1:
        return float(values[0])
    area = np.sum(np.diff(grid) * (values[1:] + values[:-1]) / 2.0)
    return float(area / (grid[-1] - grid[0]))


def graf_score(pred, tau=None) -> float:
    """Integrated Graf (Brier) score."""
    grid, bs = pointwise_ipcw(pred, lambda s: s**2, lambda s: (1.0 - s) ** 2, tau)
    return integrate(grid, bs)


def int_logloss(pred, tau=None, eps=EPS) -> float:
    """Integrated log-loss with probabilities clipped to ``[eps, 1 - eps]``."""
    clip = lambda s: np.clip(s, eps, 1.0 - eps)  # noqa: E731
    grid, ll = pointwise_ipcw(pred, lambda s: -np.log(1.0 - clip(s)), lambda s: -np.log(clip(s)), tau)
    return integrate(grid, ll)


def schmid_score(pred, tau=None) -> float:
    """Integrated Schmid (absolute) score."""
    grid, ab = pointwise_ipcw(pred, np.abs, lambda s: np.abs(1.0 - s), tau)
    return integrate(grid, ab)
