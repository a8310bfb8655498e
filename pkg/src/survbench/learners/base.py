"""Fitted-model container, prediction and JSON persistence."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as gamma_fn

from ..core import SurvivalDistribution, SurvivalPrediction, SurvivalTask
from ..errors import EmptyNewdata, FeatureMismatch, ValidationError

# what each learner can produce natively
NATIVE_TYPES = {
    "kaplan": ("response", "distr", "crank"),
    "nelson": ("response", "distr", "crank"),
    "coxph": ("distr", "crank", "lp"),
    "weibull_aft": ("response", "distr", "crank", "lp"),
}


@dataclass(frozen=True, eq=False)
class FittedModel:
    """Learner parameters plus the metadata needed to predict.

    ``params`` holds the learner-specific payload:

    ===========  =====================================================
    kaplan       ``grid``, ``surv``
    nelson       ``grid``, ``cumhaz``
    coxph        ``coef``, ``center``, ``grid``, ``cumhaz`` (baseline)
    weibull_aft  ``intercept``, ``coef``, ``scale``, ``grid``
    ===========  =====================================================
    """

    learner: str
    params: dict
    feature_names: tuple = ()
    predict_types: tuple = ()
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.learner not in NATIVE_TYPES:
            raise ValidationError(f"unknown learner {self.learner!r}")
        params = {k: (np.asarray(v, dtype=float) if not isinstance(v, str) else v) for k, v in self.params.items()}
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        types = tuple(self.predict_types) or NATIVE_TYPES[self.learner]
        if not set(types) <= set(NATIVE_TYPES[self.learner]):
            raise ValidationError(f"{self.learner} cannot predict {sorted(set(types) - set(NATIVE_TYPES[self.learner]))}")
        object.__setattr__(self, "predict_types", types)
        if "coef" in params and params["coef"].size != len(self.feature_names):
            raise ValidationError("coefficient length does not match feature names")
        if "cumhaz" in params and np.any(np.diff(params["cumhaz"]) < 0):
            raise ValidationError("cumulative hazard must be non-decreasing")
        if self.learner == "weibull_aft" and not float(params["scale"]) > 0:
            raise ValidationError("Weibull scale must be positive")

    def predict(self, newdata: SurvivalTask) -> SurvivalPrediction:
        return predict(self, newdata)

    def to_dict(self) -> dict:
        return {
            "learner": self.learner,
            "params": {k: (v if isinstance(v, str) else v.tolist()) for k, v in self.params.items()},
            "feature_names": list(self.feature_names),
            "predict_types": list(self.predict_types),
            "info": self.info,
        }

    @classmethod
    def from_dict(cls, d) -> "FittedModel":
        return cls(d["learner"], d["params"], tuple(d["feature_names"]), tuple(d["predict_types"]), d.get("info", {}))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "FittedModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _aligned_features(model, newdata):
    if not model.feature_names:
        return np.empty((newdata.n, 0))
    have, want = set(newdata.feature_names), set(model.feature_names)
    if have != want:
        raise FeatureMismatch(
            f"feature names differ: missing {sorted(want - have)}, unexpected {sorted(have - want)}"
        )
    idx = [newdata.feature_names.index(c) for c in model.feature_names]
    return newdata.features[:, idx]


def predict(model: FittedModel, newdata: SurvivalTask) -> SurvivalPrediction:
    """Predict every declared type for the rows of ``newdata``.

    The true ``(time, status)`` of ``newdata`` travel with the prediction
    so it can be scored directly.
    """
    if newdata.n == 0:
        raise EmptyNewdata("no rows to predict")
    X = _aligned_features(model, newdata)
    m = newdata.n
    p = model.params
    out = {}

    if model.learner in ("kaplan", "nelson"):
        grid = p["grid"]
        curve = p["surv"] if model.learner == "kaplan" else np.exp(-p["cumhaz"])
        out["surv"] = np.tile(curve, (m, 1))
        out["crank"] = np.zeros(m)
        out["response"] = np.full(m, SurvivalDistribution(grid, curve).mean())
    elif model.learner == "coxph":
        grid = p["grid"]
        lp = (X - p["center"]) @ p["coef"]
        out["lp"] = lp
        out["crank"] = lp
        out["surv"] = np.exp(-np.outer(np.exp(lp), p["cumhaz"]))
    else:
        grid = p["grid"]
        sigma = float(p["scale"])
        lp = X @ p["coef"]
        loc = float(p["intercept"]) + lp
        out["lp"] = lp
        # larger lp = longer survival, so risk is its negation
        out["crank"] = -lp
        out["response"] = np.exp(loc) * gamma_fn(1.0 + sigma)
        z = (np.log(grid)[None, :] - loc[:, None]) / sigma
        out["surv"] = np.exp(-np.exp(z))

    types = model.predict_types
    return SurvivalPrediction(
        newdata.time,
        newdata.status,
        response=out.get("response") if "response" in types else None,
        crank=out.get("crank") if "crank" in types else None,
        lp=out.get("lp") if "lp" in types else None,
        grid=grid if "distr" in types else None,
        surv=out["surv"] if "distr" in types else None,
    )
