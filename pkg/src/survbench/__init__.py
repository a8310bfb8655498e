"""Survival analysis toolkit: tasks, classical learners, censoring-aware
measures, prediction compositors and a reproducible benchmarking harness."""

from .compose import Pipeline, crankcompositor, distrcompositor, make_pipeline
from .core import EPS, SurvivalDistribution, SurvivalPrediction, SurvivalTask, task_from_columns
from .learners import FittedModel, Learner, make_learner, predict
from .measures import MeasureSpec, make_measure
from .resample import BenchmarkResult, ResamplingSpec, benchmark_grid, instantiate, resample, tune
from .simgen import SimSpec, simulate

__all__ = [
    "EPS",
    "BenchmarkResult",
    "FittedModel",
    "Learner",
    "MeasureSpec",
    "Pipeline",
    "ResamplingSpec",
    "SimSpec",
    "SurvivalDistribution",
    "SurvivalPrediction",
    "SurvivalTask",
    "benchmark_grid",
    "crankcompositor",
    "distrcompositor",
    "instantiate",
    "make_learner",
    "make_measure",
    "make_pipeline",
    "predict",
    "resample",
    "simulate",
    "task_from_columns",
    "tune",
]
