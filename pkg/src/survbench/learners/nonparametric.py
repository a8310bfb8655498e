"""Kaplan-Meier and Nelson-Aalen estimators."""

from __future__ import annotations

import numpy as np

from ..errors import EmptyTask
from .base import FittedModel


def event_table(time, status):
    """Distinct event times with event counts and at-risk counts.

    At risk at ``t`` means observed time ``>= t``.
    """
    time = np.asarray(time, dtype=float)
    status = np.asarray(status, dtype=bool)
    ev_times, n_event = np.unique(time[status], return_counts=True)
    sorted_time = np.sort(time)
    n_risk = time.size - np.searchsorted(sorted_time, ev_times, side="left")
    return ev_times, n_event, n_risk


def product_limit(time, status):
    """Kaplan-Meier curve ``(grid, surv)``.

    Without events the curve is flat at 1 on the single point ``max(time)``.
    """
    time = np.asarray(time, dtype=float)
    if time.size == 0:
        raise EmptyTask("cannot estimate a survival curve from zero rows")
    grid, d, n = event_table(time, status)
    if grid.size == 0:
        return np.array([time.max()]), np.array([1.0])
    # Telescoped product: within a run of event times with no censoring in
    # between, prod (n_k - d_k) / n_k collapses to left / n_start. Without
    # censoring this is a single division, equal to the empirical fraction.
    left = n - d
    starts = np.r_[True, n[1:] != left[:-1]]
    run = np.cumsum(starts) - 1
    first = np.flatnonzero(starts)
    last = np.r_[first[1:] - 1, grid.size - 1]
    factor = left[last] / n[first]
    before = np.r_[1.0, np.cumprod(factor)[:-1]]
    return grid, before[run] * left / n[first][run]


def nelson_aalen(time, status):
    """Nelson-Aalen cumulative hazard ``(grid, cumhaz)``."""
    time = np.asarray(time, dtype=float)
    if time.size == 0:
        raise EmptyTask("cannot estimate a cumulative hazard from zero rows")
    grid, d, n = event_table(time, status)
    if grid.size == 0:
        return np.array([time.max()]), np.array([0.0])
    return grid, np.cumsum(d / n)


def censoring_curve(time, status):
    """KM of the censoring distribution (status flipped)."""
    return product_limit(time, ~np.asarray(status, dtype=bool))


def fit_kaplan_meier(task):
    grid, surv = product_limit(task.time, task.status)
    return FittedModel("kaplan", {"grid": grid, "surv": surv}, info={"n": task.n, "events": int(task.status.sum())})


def fit_nelson_aalen(task):
    grid, cumhaz = nelson_aalen(task.time, task.status)
    return FittedModel("nelson", {"grid": grid, "cumhaz": cumhaz}, info={"n": task.n, "events": int(task.status.sum())})
