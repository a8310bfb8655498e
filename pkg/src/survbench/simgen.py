"""Seeded simulation of right-censored data under a Weibull-baseline PH model.

Event times are drawn by inverse transform,
``T = (-log U / (rate * exp(x'beta))) ** (1 / shape)``, covariates are iid
standard normal and censoring is independent of the covariates.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import SurvivalTask
from .errors import ValidationError


@dataclass(frozen=True)
class SimSpec:
    n: int
    p: int = 0
    beta: tuple = ()
    shape: float = 1.0
    rate: float = 1.0
    cens_rate: float = 0.0
    admin_cutoff: float | None = None
    seed: int = 0
    id: str = field(default="sim")

    def __post_init__(self):
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        if self.n < 1:
            raise ValidationError("n must be >= 1")
        if self.p < 0:
            raise ValidationError("p must be >= 0")
        if len(self.beta) != self.p:
            raise ValidationError(f"beta has {len(self.beta)} entries, expected p={self.p}")
        if not (self.shape > 0 and self.rate > 0):
            raise ValidationError("Weibull shape and rate must be > 0")
        if not self.cens_rate >= 0:
            raise ValidationError("censoring rate must be >= 0")
        if self.admin_cutoff is not None and not self.admin_cutoff > 0:
            raise ValidationError("administrative cutoff must be > 0")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1)


def simulate(spec: SimSpec) -> SurvivalTask:
    """Draw a task; identical specs (including seed) give identical tasks."""
    rng = np.random.default_rng(spec.seed)
    X = rng.standard_normal((spec.n, spec.p))
    u = rng.uniform(size=spec.n)
    # uniform(0,1) may return exactly 0; -log(1-u) keeps the draw finite
    e = -np.log1p(-u)
    hazard_scale = spec.rate * np.exp(X @ np.asarray(spec.beta, dtype=float))
    t = (e / hazard_scale) ** (1.0 / spec.shape)

    cens = np.full(spec.n, np.inf)
    if spec.cens_rate > 0:
        cens = rng.exponential(1.0 / spec.cens_rate, size=spec.n)
    if spec.admin_cutoff is not None:
        cens = np.minimum(cens, spec.admin_cutoff)
    time = np.minimum(t, cens)
    status = t <= cens
    # guard against exact zeros from underflow
    time = np.maximum(time, np.finfo(float).tiny)
    names = tuple(f"x{j + 1}" for j in range(spec.p))
    return SurvivalTask(spec.id, X, time, status, names)


def true_survival(spec: SimSpec, t, x=None):
    """Analytic ``S(t | x) = exp(-rate * t**shape * exp(x'beta))``."""
    lp = 0.0 if x is None else np.asarray(x, dtype=float) @ np.asarray(spec.beta, dtype=float)
    return np.exp(-spec.rate * np.asarray(t, dtype=float) ** spec.shape * np.exp(lp))
