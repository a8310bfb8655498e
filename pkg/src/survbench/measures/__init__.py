"""Censoring-aware survival measures and their descriptor registry."""

from __future__ import annotations

from dataclasses import dataclass

from .._spec import format_call, parse_call
from ..core import EPS
from ..errors import ConfigError
from .calibration import CalibrationCurve, calib_curve, houwelingen_beta
from .concordance import harrell_c, uno_c
from .ipcw import CensoringEstimate
from .scoring import graf_score, int_logloss, schmid_score

__all__ = [
    "CalibrationCurve",
    "CensoringEstimate",
    "MeasureSpec",
    "calib_curve",
    "graf_score",
    "harrell_c",
    "houwelingen_beta",
    "int_logloss",
    "make_measure",
    "schmid_score",
    "uno_c",
]

# id -> (required prediction type, direction); direction None = not tunable
MEASURES = {
    "harrell_c": ("crank", "maximize"),
    "uno_c": ("crank", "maximize"),
    "graf": ("distr", "minimize"),
    "intlogloss": ("distr", "minimize"),
    "schmid": ("distr", "minimize"),
    "houwelingen_beta": ("lp", None),
    "calib_curve": ("distr", None),
}


@dataclass(frozen=True)
class MeasureSpec:
    """A measure id plus its settings.

    ``tau`` truncates the time range (default: largest test time) and is
    mandatory for ``uno_c``. ``eps`` is the probability clip for log-loss.
    """

    id: str
    tau: float | None = None
    eps: float = EPS

    def __post_init__(self):
        if self.id not in MEASURES:
            raise ConfigError(f"unknown measure id {self.id!r}; known: {sorted(MEASURES)}")
        if self.tau is not None and not self.tau > 0:
            raise ConfigError("tau must be > 0")
        if not 0 < self.eps <= 1e-6:
            raise ConfigError("eps must lie in (0, 1e-6]")
        if self.id == "uno_c" and self.tau is None:
            raise ConfigError("uno_c requires tau, e.g. 'uno_c(tau=5)'")

    @property
    def requires(self) -> str:
        return MEASURES[self.id][0]

    @property
    def direction(self):
        return MEASURES[self.id][1]

    @property
    def scalar(self) -> bool:
        return self.id != "calib_curve"

    def score(self, pred) -> float:
        if self.id == "harrell_c":
            return harrell_c(pred)
        if self.id == "uno_c":
            return uno_c(pred, self.tau)
        if self.id == "graf":
            return graf_score(pred, self.tau)
        if self.id == "intlogloss":
            return int_logloss(pred, self.tau, self.eps)
        if self.id == "schmid":
            return schmid_score(pred, self.tau)
        if self.id == "houwelingen_beta":
            return houwelingen_beta(pred)
        raise ConfigError(f"{self.id} is not a scalar measure")

    def describe(self) -> str:
        kw = {}
        if self.tau is not None:
            kw["tau"] = self.tau
        if self.eps != EPS:
            kw["eps"] = self.eps
        return format_call(self.id, kw)


def make_measure(text: str) -> MeasureSpec:
    """Parse ``"graf"``, ``"uno_c(tau=5)"`` and the like."""
    name, args, kwargs = parse_call(text)
    unknown = set(kwargs) - {"tau", "eps"}
    if args or unknown:
        raise ConfigError(f"measure {text!r}: only keyword options tau= and eps= are accepted")
    return MeasureSpec(name, **kwargs)
