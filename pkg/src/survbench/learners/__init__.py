"""Classical survival learners with a common fit/predict surface."""

from __future__ import annotations

from dataclasses import dataclass, field

from .._spec import format_call, parse_call
from ..errors import ConfigError
from .aft import fit_weibull_aft
from .base import NATIVE_TYPES, FittedModel, predict
from .coxph import TIES, fit_coxph
from .nonparametric import fit_kaplan_meier, fit_nelson_aalen

__all__ = [
    "FittedModel",
    "Learner",
    "NATIVE_TYPES",
    "fit_coxph",
    "fit_kaplan_meier",
    "fit_nelson_aalen",
    "fit_weibull_aft",
    "make_learner",
    "predict",
]

DEFAULTS = {
    "kaplan": {},
    "nelson": {},
    "coxph": {"ties": "efron", "max_iter": 50, "tol": 1e-9, "ridge": 0.0},
    "weibull_aft": {"max_iter": 100, "tol": 1e-9},
}

_FIT = {
    "kaplan": lambda task, **kw: fit_kaplan_meier(task),
    "nelson": lambda task, **kw: fit_nelson_aalen(task),
    "coxph": fit_coxph,
    "weibull_aft": fit_weibull_aft,
}


def _check_params(learner_id, params):
    unknown = set(params) - set(DEFAULTS[learner_id])
    if unknown:
        raise ConfigError(f"{learner_id}: unknown hyperparameter(s) {sorted(unknown)}")
    if "tol" in params and not params["tol"] > 0:
        raise ConfigError(f"{learner_id}: tol must be > 0")
    if "max_iter" in params and (int(params["max_iter"]) != params["max_iter"] or params["max_iter"] < 1):
        raise ConfigError(f"{learner_id}: max_iter must be an integer >= 1")
    if "ridge" in params and not params["ridge"] >= 0:
        raise ConfigError(f"{learner_id}: ridge must be >= 0")
    if "ties" in params and params["ties"] not in TIES:
        raise ConfigError(f"{learner_id}: ties must be one of {TIES}")


@dataclass(frozen=True)
class Learner:
    """Learner id plus hyperparameters; ``fit`` returns a :class:`FittedModel`.

    ``predict_types`` optionally restricts the prediction types the fitted
    model reports (e.g. ``("lp", "crank")`` for a ranking-only learner).
    """

    id: str
    params: dict = field(default_factory=dict)
    predict_types: tuple = ()

    def __post_init__(self):
        if self.id not in DEFAULTS:
            raise ConfigError(f"unknown learner id {self.id!r}; known: {sorted(DEFAULTS)}")
        _check_params(self.id, self.params)
        types = tuple(self.predict_types)
        bad = set(types) - set(NATIVE_TYPES[self.id])
        if bad:
            raise ConfigError(f"{self.id} cannot predict {sorted(bad)}")
        object.__setattr__(self, "params", dict(self.params))
        object.__setattr__(self, "predict_types", types)

    @property
    def types(self) -> tuple:
        return self.predict_types or NATIVE_TYPES[self.id]

    @property
    def hyperparameters(self) -> dict:
        return {**DEFAULTS[self.id], **self.params}

    def with_params(self, **params) -> "Learner":
        return Learner(self.id, {**self.params, **params}, self.predict_types)

    def fit(self, task) -> FittedModel:
        model = _FIT[self.id](task, **self.hyperparameters)
        if self.predict_types:
            model = FittedModel(model.learner, model.params, model.feature_names, self.predict_types, model.info)
        return model

    def describe(self) -> str:
        kw = dict(self.params)
        if self.predict_types:
            kw["predict_types"] = "+".join(self.predict_types)
        return format_call(self.id, kw)


def make_learner(text: str) -> Learner:
    """Build a learner from ``"coxph(ties=breslow, ridge=0.1)"``.

    The extra key ``predict_types=lp+crank`` restricts reported types.
    """
    name, args, kwargs = parse_call(text)
    if args:
        raise ConfigError(f"learner {name!r} takes keyword arguments only")
    types = kwargs.pop("predict_types", "")
    types = tuple(t for t in str(types).split("+") if t)
    return Learner(name, kwargs, types)
