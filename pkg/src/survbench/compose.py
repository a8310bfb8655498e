"""Prediction-type compositors and linear learner pipelines.

``distrcompositor`` turns ``lp`` (or, failing that, ``crank``) into a
``distr`` prediction from a baseline curve ``S0``:

* ``ph``:  ``S(t) = S0(t) ** exp(lp)``
* ``aft``: ``S(t) = S0(t * exp(-lp))`` (step lookup, no interpolation)
* ``po``:  ``S(t) = S0(t) / (exp(lp) + (1 - exp(lp)) * S0(t))``

Under ``ph`` and ``po`` a larger ``lp`` means higher risk; under ``aft`` a
larger ``lp`` stretches time, i.e. longer survival. These sign conventions
are this package's own and are not guaranteed to match other software.

``crankcompositor`` summarises each ``distr`` by its restricted mean or
median and sets ``crank = -summary`` so higher crank stays higher risk.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ._spec import format_call, parse_call
from .core import step_eval
from .errors import ConfigError, GridEmpty, InvalidForm, MissingDistr, MissingLPandCrank
from .learners import FittedModel, Learner, fit_kaplan_meier, fit_nelson_aalen, make_learner

logger = logging.getLogger(__name__)

FORMS = ("ph", "aft", "po")
ESTIMATORS = ("kaplan", "nelson")
SUMMARIES = ("mean", "median")


def baseline_curve(model: FittedModel):
    if model.learner == "kaplan":
        return model.params["grid"], model.params["surv"]
    if model.learner == "nelson":
        return model.params["grid"], np.exp(-model.params["cumhaz"])
    raise ConfigError(f"baseline estimator must be one of {ESTIMATORS}, got {model.learner!r}")


def distrcompositor(pred, baseline: FittedModel, form: str = "ph"):
    """Return ``pred`` with ``distr`` built from its ``lp`` and ``baseline``.

    Other prediction types are carried over unchanged.
    """
    if form not in FORMS:
        raise InvalidForm(f"form must be one of {FORMS}, got {form!r}")
    if pred.lp is not None:
        lp = pred.lp
    elif pred.crank is not None:
        logger.info("distrcompositor: no lp present, using crank as the linear predictor")
        lp = pred.crank
    else:
        raise MissingLPandCrank("distrcompositor needs an lp or crank prediction")
    grid, s0 = baseline_curve(baseline)
    if grid.size == 0:
        raise GridEmpty("baseline curve has an empty grid")

    e = np.exp(lp)[:, None]
    if form == "ph":
        surv = s0[None, :] ** e
    elif form == "aft":
        surv = step_eval(grid, s0, grid[None, :] * np.exp(-lp)[:, None])
    else:
        with np.errstate(over="ignore"):
            surv = s0[None, :] / (e + (1.0 - e) * s0[None, :])
    # guard monotonicity and range against rounding
    surv = np.minimum.accumulate(np.clip(surv, 0.0, 1.0), axis=1)
    return pred.replace(grid=grid, surv=surv)


def summarise(grid, surv, summary):
    """Row-wise restricted mean or median of step curves; also the 'reached' flags."""
    surv = np.atleast_2d(surv)
    if summary == "mean":
        widths = np.diff(grid, prepend=0.0)
        left = np.concatenate([np.ones((surv.shape[0], 1)), surv[:, :-1]], axis=1)
        return np.sum(left * widths, axis=1), np.ones(surv.shape[0], dtype=bool)
    if summary == "median":
        below = surv <= 0.5
        reached = below.any(axis=1)
        idx = np.where(reached, np.argmax(below, axis=1), grid.size - 1)
        return grid[idx], reached
    raise ConfigError(f"summary must be one of {SUMMARIES}, got {summary!r}")


def crankcompositor(pred, summary: str = "mean", overwrite_crank: bool = False, set_response: bool = True):
    """Derive ``crank`` and/or ``response`` from ``distr``."""
    if pred.surv is None:
        raise MissingDistr("crankcompositor needs a distr prediction")
    values, reached = summarise(pred.grid, pred.surv, summary)
    changes = {}
    if set_response:
        changes["response"] = values
    if overwrite_crank or pred.crank is None:
        changes["crank"] = -values
    meta = dict(pred.meta)
    if summary == "median" and not reached.all():
        meta["median_not_reached"] = int((~reached).sum())
    return pred.replace(meta=meta, **changes)


# ---------------------------------------------------------------------------
# pipelines


@dataclass(frozen=True)
class DistrCompositor:
    estimator: str = "kaplan"
    form: str = "ph"

    def __post_init__(self):
        if self.estimator not in ESTIMATORS:
            raise ConfigError(f"distrcompositor estimator must be one of {ESTIMATORS}")
        if self.form not in FORMS:
            raise ConfigError(f"distrcompositor form must be one of {FORMS}")

    def check(self, upstream):
        if not {"lp", "crank"} & set(upstream):
            raise ConfigError("distrcompositor needs an upstream lp or crank")
        return tuple(sorted(set(upstream) | {"distr"}))

    def fit(self, task):
        return fit_kaplan_meier(task) if self.estimator == "kaplan" else fit_nelson_aalen(task)

    def apply(self, pred, state):
        return distrcompositor(pred, state, self.form)

    def describe(self):
        return format_call("distrcompositor", {"estimator": self.estimator, "form": self.form})


@dataclass(frozen=True)
class CrankCompositor:
    summary: str = "mean"
    overwrite_crank: bool = False
    set_response: bool = True

    def __post_init__(self):
        if self.summary not in SUMMARIES:
            raise ConfigError(f"crankcompositor summary must be one of {SUMMARIES}")

    def check(self, upstream):
        if "distr" not in upstream:
            raise ConfigError("crankcompositor needs an upstream distr")
        added = {"crank"} | ({"response"} if self.set_response else set())
        return tuple(sorted(set(upstream) | added))

    def fit(self, task):
        return None

    def apply(self, pred, state):
        return crankcompositor(pred, self.summary, self.overwrite_crank, self.set_response)

    def describe(self):
        kw = {"summary": self.summary}
        if self.overwrite_crank:
            kw["overwrite_crank"] = True
        if not self.set_response:
            kw["set_response"] = False
        return format_call("crankcompositor", kw)


_STEPS = {
    "distrcompositor": (DistrCompositor, ("estimator", "form")),
    "crankcompositor": (CrankCompositor, ("summary", "overwrite_crank", "set_response")),
}


@dataclass(frozen=True)
class Pipeline:
    """A learner followed by a linear chain of compositors."""

    learner: Learner
    steps: tuple = ()

    def __post_init__(self):
        types = self.learner.types
        for step in self.steps:
            types = step.check(types)
        object.__setattr__(self, "steps", tuple(self.steps))

    @property
    def types(self) -> tuple:
        types = self.learner.types
        for step in self.steps:
            types = step.check(types)
        return types

    def fit(self, task) -> "FittedPipeline":
        model = self.learner.fit(task)
        return FittedPipeline(self, model, tuple(step.fit(task) for step in self.steps))

    def describe(self) -> str:
        return " | ".join([self.learner.describe()] + [s.describe() for s in self.steps])

    def with_params(self, **params) -> "Pipeline":
        return Pipeline(self.learner.with_params(**params), self.steps)


@dataclass(frozen=True, eq=False)
class FittedPipeline:
    pipeline: Pipeline
    model: FittedModel
    states: tuple

    def predict(self, newdata):
        pred = self.model.predict(newdata)
        for step, state in zip(self.pipeline.steps, self.states):
            pred = step.apply(pred, state)
        return pred

    def to_dict(self) -> dict:
        return {
            "pipeline": self.pipeline.describe(),
            "model": self.model.to_dict(),
            "states": [None if s is None else s.to_dict() for s in self.states],
        }

    @classmethod
    def from_dict(cls, d) -> "FittedPipeline":
        pipeline = make_pipeline(d["pipeline"])
        states = tuple(None if s is None else FittedModel.from_dict(s) for s in d["states"])
        return cls(pipeline, FittedModel.from_dict(d["model"]), states)


def _make_step(text):
    name, args, kwargs = parse_call(text)
    if name not in _STEPS:
        raise ConfigError(f"unknown pipeline step {name!r}; known: {sorted(_STEPS)}")
    cls, order = _STEPS[name]
    if len(args) > len(order):
        raise ConfigError(f"too many positional arguments in {text!r}")
    merged = dict(zip(order, args))
    clash = set(merged) & set(kwargs)
    if clash:
        raise ConfigError(f"argument(s) {sorted(clash)} given twice in {text!r}")
    merged.update(kwargs)
    unknown = set(merged) - set(order)
    if unknown:
        raise ConfigError(f"{name}: unknown option(s) {sorted(unknown)}")
    return cls(**merged)


def make_pipeline(text: str):
    """Parse ``"learner(...) | step(...) | ..."``.

    Returns a plain :class:`Learner` when there are no steps.
    """
    parts = [p.strip() for p in text.split("|")]
    if not parts or not parts[0]:
        raise ConfigError(f"empty learner descriptor {text!r}")
    learner = make_learner(parts[0])
    if len(parts) == 1:
        return learner
    return Pipeline(learner, tuple(_make_step(p) for p in parts[1:]))
