"""Censoring-survival estimate used for inverse-probability weights."""

from __future__ import annotations

import numpy as np

from ..learners.nonparametric import censoring_curve

G_FLOOR = 1e-4


class CensoringEstimate:
    """Kaplan-Meier estimate ``G`` of the censoring survival function.

    Fitted on the test outcome with the status flipped. ``at`` is the usual
    right-continuous value ``G(t)``; ``left`` is ``G(t-)``.
    """

    def __init__(self, time, status, floor=G_FLOOR):
        self.grid, self.surv = censoring_curve(time, status)
        self.floor = floor

    def at(self, t):
        idx = np.searchsorted(self.grid, t, side="right") - 1
        return np.where(idx >= 0, self.surv[np.maximum(idx, 0)], 1.0)

    def left(self, t):
        idx = np.searchsorted(self.grid, t, side="left") - 1
        return np.where(idx >= 0, self.surv[np.maximum(idx, 0)], 1.0)

    def floored(self, g):
        """Clamp weights' denominators at ``floor``; also report which were clamped."""
        g = np.asarray(g, dtype=float)
        return np.maximum(g, self.floor), g < self.floor
