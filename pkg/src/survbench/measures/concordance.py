"""Harrell's and Uno's concordance indices.

``crank`` is oriented so that higher means higher risk; a pair is
concordant when the subject failing first has the larger crank.
"""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateCensoring, MissingCrank, NoComparablePairs, ValidationError
from .ipcw import CensoringEstimate

_CHUNK = 512


def _pair_counts(time, status, crank, comparable_rule):
    """Per-subject counts over comparable partners j of subject i.

    Returns ``(n_comparable, n_concordant, n_tied)`` as integer arrays
    indexed by i (the subject with the event).
    """
    m = time.size
    n_comp = np.zeros(m, dtype=np.int64)
    n_conc = np.zeros(m, dtype=np.int64)
    n_tied = np.zeros(m, dtype=np.int64)
    for lo in range(0, m, _CHUNK):
        rows = slice(lo, min(lo + _CHUNK, m))
        ti, di, ci = time[rows, None], status[rows, None], crank[rows, None]
        comp = comparable_rule(ti, di, time[None, :], status[None, :])
        n_comp[rows] = comp.sum(axis=1)
        n_conc[rows] = (comp & (ci > crank[None, :])).sum(axis=1)
        n_tied[rows] = (comp & (ci == crank[None, :])).sum(axis=1)
    return n_comp, n_conc, n_tied


def _harrell_rule(ti, di, tj, dj):
    # event-vs-censored tie at the same time counts, the event ordered first
    return di & ((ti < tj) | ((ti == tj) & ~dj))


def _require_crank(pred):
    if pred.crank is None:
        raise MissingCrank("concordance needs a crank prediction")
    return np.asarray(pred.crank, dtype=float)


def harrell_c(pred) -> float:
    """Harrell's C: ``(concordant + 0.5 * tied) / comparable``."""
    crank = _require_crank(pred)
    n_comp, n_conc, n_tied = _pair_counts(pred.time, pred.status, crank, _harrell_rule)
    total = int(n_comp.sum())
    if total == 0:
        raise NoComparablePairs("no comparable pairs")
    return (int(n_conc.sum()) + 0.5 * int(n_tied.sum())) / total


def uno_c(pred, tau: float, max_floored_share: float = 0.10) -> float:
    """Uno's IPCW concordance truncated at ``tau``.

    Each comparable pair (``t_i < t_j``, ``delta_i = 1``, ``t_i < tau``) is
    weighted by ``G(t_i-)^-2``.
    """
    crank = _require_crank(pred)
    if not (tau is not None and tau > 0):
        raise ValidationError("uno_c needs tau > 0")
    cens = CensoringEstimate(pred.time, pred.status)

    def rule(ti, di, tj, dj):
        return di & (ti < tj) & (ti < tau)

    n_comp, n_conc, n_tied = _pair_counts(pred.time, pred.status, crank, rule)
    total = int(n_comp.sum())
    if total == 0:
        raise NoComparablePairs("no comparable pairs before tau")
    g, clamped = cens.floored(cens.left(pred.time))
    n_clamped = int(n_comp[clamped].sum())
    if n_clamped > max_floored_share * total:
        raise DegenerateCensoring(
            f"censoring weight floored for {n_clamped} of {total} comparable pairs; "
            "choose a smaller tau"
        )
    w = 1.0 / g**2
    num = np.sum(w * (n_conc + 0.5 * n_tied))
    den = np.sum(w * n_comp)
    return float(num / den)
