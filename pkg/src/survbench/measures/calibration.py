"""Calibration slope and mean-prediction versus Kaplan-Meier curves."""

from __future__ import annotations

import csv
from typing import NamedTuple

import numpy as np

from ..core import SurvivalTask, step_eval
from ..errors import DegenerateLP, MissingDistr, MissingLP, NoEvents
from ..learners.coxph import fit_coxph
from ..learners.nonparametric import product_limit


def houwelingen_beta(pred) -> float:
    """Calibration slope: Cox coefficient of ``lp`` refitted on the test outcome.

    1 means the predicted effects are calibrated; below 1 suggests
    overfitting.
    """
    if pred.lp is None:
        raise MissingLP("calibration slope needs an lp prediction")
    if not pred.status.any():
        raise NoEvents("calibration slope needs at least one test event")
    if np.ptp(pred.lp) == 0:
        raise DegenerateLP("lp is constant; calibration slope is not identifiable")
    task = SurvivalTask("calibration", pred.lp.reshape(-1, 1), pred.time, pred.status, ("lp",))
    model = fit_coxph(task, ties="breslow", ridge=0.0)
    return float(model.params["coef"][0])


class CalibrationCurve(NamedTuple):
    t: np.ndarray
    mean_pred_surv: np.ndarray
    km_surv: np.ndarray

    def max_gap(self) -> float:
        return float(np.max(np.abs(self.mean_pred_surv - self.km_surv)))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "mean_pred_surv", "km_surv"])
            for row in zip(self.t, self.mean_pred_surv, self.km_surv):
                w.writerow([repr(float(v)) for v in row])


def calib_curve(pred) -> CalibrationCurve:
    """Average predicted survival and test-set KM on the union of both grids."""
    if pred.surv is None:
        raise MissingDistr("calibration curve needs a distr prediction")
    km_grid, km = product_limit(pred.time, pred.status)
    t = np.union1d(pred.grid, km_grid)
    mean_pred = pred.survival_at(t).mean(axis=0)
    return CalibrationCurve(t, mean_pred, step_eval(km_grid, km, t))
