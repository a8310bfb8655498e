"""Survival task, distribution and prediction data model.

Conventions used everywhere in the package:

* survival curves are right-continuous step functions, ``S(t) = 1`` before
  the first grid point;
* ``crank`` is oriented so that a HIGHER value means HIGHER risk;
* probabilities are clipped to ``EPS`` before taking logs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import (
    DuplicateColumn,
    InvalidDistribution,
    LengthMismatch,
    MissingValue,
    NegativeTime,
    NonPositiveTime,
    ValidationError,
)

EPS = 1e-15
PREDICT_TYPES = ("response", "distr", "crank", "lp")


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def step_index(grid, t):
    """Index of the largest grid point ``<= t`` (``-1`` when ``t < grid[0]``)."""
    return np.searchsorted(grid, t, side="right") - 1


def step_eval(grid, surv, t):
    """Evaluate right-continuous step curve(s) at times ``t``.

    ``surv`` may be 1-D (one curve) or 2-D (one curve per row); the result
    has the trailing shape of ``t``.
    """
    idx = step_index(grid, np.asarray(t, dtype=float))
    surv = np.asarray(surv, dtype=float)
    padded = np.concatenate([np.ones(surv.shape[:-1] + (1,)), surv], axis=-1)
    return padded[..., idx + 1]


# ---------------------------------------------------------------------------
# task


@dataclass(frozen=True, eq=False)
class SurvivalTask:
    """Feature matrix plus a right-censored outcome.

    ``status`` is True where the event was observed and False where the
    subject was right-censored at ``time``.
    """

    id: str
    features: np.ndarray
    time: np.ndarray
    status: np.ndarray
    feature_names: tuple = ()

    def __post_init__(self):
        time = np.asarray(self.time, dtype=float).ravel()
        status = np.asarray(self.status).ravel()
        n = time.shape[0]
        if n < 1:
            raise ValidationError("task needs at least one row")
        if status.shape[0] != n:
            raise LengthMismatch(f"time has {n} entries, status has {status.shape[0]}")
        if status.dtype != bool:
            if not np.all(np.isin(status, (0, 1))):
                raise ValidationError("status must be boolean or 0/1")
            status = status.astype(bool)
        if not np.all(np.isfinite(time)) or np.any(time <= 0):
            bad = np.flatnonzero(~np.isfinite(time) | (time <= 0))
            raise NonPositiveTime(f"times must be positive and finite; bad rows {bad[:10].tolist()}")

        feats = np.asarray(self.features, dtype=float)
        if feats.ndim == 1 and feats.size == 0:
            feats = feats.reshape(n, 0)
        if feats.ndim != 2:
            raise ValidationError("features must be a 2-D matrix")
        if feats.shape[0] != n:
            raise LengthMismatch(f"features have {feats.shape[0]} rows, time has {n}")
        if np.isnan(feats).any():
            raise MissingValue("features contain missing values")
        if not np.all(np.isfinite(feats)):
            raise ValidationError("features contain non-finite values")

        names = tuple(str(c) for c in self.feature_names)
        if not names and feats.shape[1]:
            names = tuple(f"x{j + 1}" for j in range(feats.shape[1]))
        if len(names) != feats.shape[1]:
            raise LengthMismatch(f"{len(names)} column names for {feats.shape[1]} columns")
        if len(set(names)) != len(names):
            dup = sorted({c for c in names if names.count(c) > 1})
            raise DuplicateColumn(f"duplicate column names: {dup}")

        object.__setattr__(self, "time", _frozen(time))
        object.__setattr__(self, "status", _frozen(status, bool))
        object.__setattr__(self, "features", _frozen(feats))
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.time.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    def subset(self, rows) -> "SurvivalTask":
        rows = np.asarray(rows, dtype=int)
        return SurvivalTask(self.id, self.features[rows], self.time[rows], self.status[rows], self.feature_names)

    def select(self, columns: Sequence[str]) -> "SurvivalTask":
        idx = [self.feature_names.index(c) for c in columns]
        return SurvivalTask(self.id, self.features[:, idx], self.time, self.status, tuple(columns))


def task_from_columns(features, time, status, id: str = "task", feature_names=None) -> SurvivalTask:
    """Build a validated :class:`SurvivalTask`.

    ``features`` is either a mapping ``name -> column`` or a 2-D array
    (with ``feature_names`` giving the column names). Row order is kept.
    """
    if isinstance(features, Mapping):
        names = list(features)
        cols = [np.asarray(features[c], dtype=float) for c in names]
        lengths = {c.shape[0] for c in cols}
        if len(lengths) > 1:
            raise LengthMismatch(f"feature columns have differing lengths {sorted(lengths)}")
        n = len(np.asarray(time))
        matrix = np.column_stack(cols) if cols else np.empty((n, 0))
        return SurvivalTask(id, matrix, time, status, tuple(names))
    matrix = np.asarray(features, dtype=float)
    if matrix.ndim == 1:
        matrix = matrix.reshape(-1, 1) if matrix.size else matrix.reshape(len(np.asarray(time)), 0)
    names = tuple(feature_names) if feature_names is not None else ()
    return SurvivalTask(id, matrix, time, status, names)


# ---------------------------------------------------------------------------
# distribution


class Median(NamedTuple):
    value: float
    reached: bool


def _check_curve(grid, surv):
    if grid.ndim != 1 or grid.size < 1:
        raise InvalidDistribution("grid must be a non-empty 1-D array")
    if not np.all(np.isfinite(grid)) or grid[0] <= 0:
        raise InvalidDistribution("grid points must be positive and finite")
    if np.any(np.diff(grid) <= 0):
        raise InvalidDistribution("grid must be strictly increasing")
    if surv.shape[-1] != grid.size:
        raise InvalidDistribution(f"surv has {surv.shape[-1]} columns, grid has {grid.size} points")
    if np.isnan(surv).any() or np.any(surv < 0) or np.any(surv > 1):
        raise InvalidDistribution("survival probabilities must lie in [0, 1]")
    if np.any(np.diff(surv, axis=-1) > 0):
        raise InvalidDistribution("survival curve must be non-increasing")


@dataclass(frozen=True, eq=False)
class SurvivalDistribution:
    """Right-continuous step survival curve on a finite grid."""

    grid: np.ndarray
    surv: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float).ravel()
        surv = np.asarray(self.surv, dtype=float).ravel()
        _check_curve(grid, surv)
        object.__setattr__(self, "grid", _frozen(grid))
        object.__setattr__(self, "surv", _frozen(surv))

    def survival(self, t):
        t = np.asarray(t, dtype=float)
        if np.isnan(t).any() or np.any(t < 0):
            raise NegativeTime("survival queried at negative or NaN time")
        out = step_eval(self.grid, self.surv, t)
        return float(out) if out.ndim == 0 else out

    def cdf(self, t):
        return 1.0 - self.survival(t)

    def cumhazard(self, t):
        """``-log S(t)`` with ``S`` clipped below at ``EPS``."""
        s = np.maximum(self.survival(t), EPS)
        out = -np.log(s)
        return float(out) if np.ndim(out) == 0 else out

    def mean(self) -> float:
        """Restricted mean survival time on ``[0, grid[-1]]`` (exact for steps)."""
        widths = np.diff(self.grid, prepend=0.0)
        left = np.concatenate([[1.0], self.surv[:-1]])
        return float(np.sum(left * widths))

    def median(self) -> Median:
        """First grid point where ``S <= 0.5``; the last point if never reached."""
        hit = np.flatnonzero(self.surv <= 0.5)
        if hit.size:
            return Median(float(self.grid[hit[0]]), True)
        return Median(float(self.grid[-1]), False)

    def to_dict(self) -> dict:
        return {"types": ["distr"], "grid": self.grid.tolist(), "surv": self.surv.tolist()}

    @classmethod
    def from_dict(cls, d) -> "SurvivalDistribution":
        return cls(d["grid"], d["surv"])


# ---------------------------------------------------------------------------
# prediction


@dataclass(frozen=True, eq=False)
class SurvivalPrediction:
    """Per-subject predictions plus the true test outcome.

    All ``distr`` curves share one grid: ``surv`` is an ``M x K`` matrix of
    survival probabilities on ``grid``. Any of ``response``, ``distr``,
    ``crank`` and ``lp`` may be absent (``None``) but never partially filled.
    """

    time: np.ndarray
    status: np.ndarray
    response: np.ndarray | None = None
    crank: np.ndarray | None = None
    lp: np.ndarray | None = None
    grid: np.ndarray | None = None
    surv: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        time = np.asarray(self.time, dtype=float).ravel()
        status = np.asarray(self.status).astype(bool).ravel()
        m = time.shape[0]
        if m < 1:
            raise ValidationError("prediction needs at least one subject")
        if status.shape[0] != m:
            raise LengthMismatch("time and status lengths differ")
        object.__setattr__(self, "time", _frozen(time))
        object.__setattr__(self, "status", _frozen(status, bool))

        for name in ("response", "crank", "lp"):
            v = getattr(self, name)
            if v is None:
                continue
            v = np.asarray(v, dtype=float).ravel()
            if v.shape[0] != m:
                raise LengthMismatch(f"{name} has {v.shape[0]} entries for {m} subjects")
            if np.isnan(v).any():
                raise MissingValue(f"{name} present but not populated for every subject")
            object.__setattr__(self, name, _frozen(v))
        if self.response is not None and np.any(self.response <= 0):
            raise ValidationError("response predictions must be positive")

        if (self.grid is None) != (self.surv is None):
            raise ValidationError("grid and surv must be given together")
        if self.grid is not None:
            grid = np.asarray(self.grid, dtype=float).ravel()
            surv = np.asarray(self.surv, dtype=float)
            if surv.ndim == 1:
                surv = np.broadcast_to(surv, (m, surv.size))
            if surv.shape[0] != m:
                raise LengthMismatch(f"surv has {surv.shape[0]} rows for {m} subjects")
            _check_curve(grid, surv)
            object.__setattr__(self, "grid", _frozen(grid))
            object.__setattr__(self, "surv", _frozen(surv))

    @property
    def n(self) -> int:
        return self.time.shape[0]

    @property
    def types(self) -> tuple:
        present = {
            "response": self.response is not None,
            "distr": self.surv is not None,
            "crank": self.crank is not None,
            "lp": self.lp is not None,
        }
        return tuple(t for t in PREDICT_TYPES if present[t])

    def distr(self, i: int) -> SurvivalDistribution:
        if self.surv is None:
            raise ValidationError("prediction has no distr")
        return SurvivalDistribution(self.grid, self.surv[i])

    def survival_at(self, times) -> np.ndarray:
        """``M x len(times)`` matrix of predicted survival at ``times``."""
        return step_eval(self.grid, self.surv, np.asarray(times, dtype=float))

    def replace(self, **changes) -> "SurvivalPrediction":
        return replace(self, **changes)

    def subset(self, rows) -> "SurvivalPrediction":
        rows = np.asarray(rows, dtype=int)
        pick = lambda v: None if v is None else v[rows]  # noqa: E731
        return SurvivalPrediction(
            self.time[rows], self.status[rows], pick(self.response), pick(self.crank), pick(self.lp),
            self.grid, pick(self.surv), dict(self.meta),
        )

    def to_dict(self) -> dict:
        out = {"types": list(self.types), "time": self.time.tolist(), "status": self.status.astype(int).tolist()}
        for name in ("response", "crank", "lp"):
            v = getattr(self, name)
            if v is not None:
                out[name] = v.tolist()
        if self.surv is not None:
            out["grid"] = self.grid.tolist()
            out["surv"] = self.surv.tolist()
        return out

    @classmethod
    def from_dict(cls, d) -> "SurvivalPrediction":
        types = set(d.get("types", []))
        get = lambda k: d[k] if k in types else None  # noqa: E731
        return cls(
            d["time"], np.asarray(d["status"], dtype=bool), get("response"), get("crank"), get("lp"),
            d["grid"] if "distr" in types else None, d["surv"] if "distr" in types else None,
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "SurvivalPrediction":
        return cls.from_dict(json.loads(text))
