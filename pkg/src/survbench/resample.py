"""Resampling, benchmark grids, result aggregation and nested tuning.

Determinism: splits depend only on ``(seed, N, spec)``; any other
randomness (random-search candidates) is drawn from a stream derived from
``(seed, task id, fold)``. Learners are deterministic, so results do not
depend on how folds are scheduled across threads.
"""

from __future__ import annotations

import csv
import itertools
import json
import logging
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError, SurvbenchError, TooManyFolds
from .measures import MeasureSpec

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ResamplingSpec:
    kind: str = "cv"
    folds: int = 3
    train_ratio: float = 2.0 / 3.0
    seed: int = 0
    stratify: bool = False

    def __post_init__(self):
        if self.kind not in ("cv", "holdout"):
            raise ConfigError(f"resampling kind must be 'cv' or 'holdout', got {self.kind!r}")
        if self.kind == "cv" and (int(self.folds) != self.folds or self.folds < 2):
            raise ConfigError("cv needs an integer folds >= 2")
        if self.kind == "holdout" and not 0 < self.train_ratio < 1:
            raise ConfigError("holdout train_ratio must lie strictly in (0, 1)")

    @property
    def iters(self) -> int:
        return self.folds if self.kind == "cv" else 1

    def describe(self) -> str:
        if self.kind == "cv":
            return f"cv(folds={self.folds}, seed={self.seed})"
        return f"holdout(ratio={self.train_ratio:g}, seed={self.seed})"


def fold_seed(seed: int, task_id: str, fold: int) -> np.random.SeedSequence:
    """Independent RNG stream for one (seed, task, fold) cell."""
    return np.random.SeedSequence([int(seed) & (2**64 - 1), zlib.crc32(task_id.encode()), int(fold)])


def instantiate(spec: ResamplingSpec, task):
    """List of ``(train_idx, test_idx)`` pairs (sorted index arrays)."""
    n = task.n
    rng = np.random.default_rng(np.random.SeedSequence(int(spec.seed) & (2**64 - 1)))
    perm = rng.permutation(n)
    if spec.kind == "holdout":
        if n < 2:
            raise TooManyFolds("holdout needs at least 2 rows")
        n_train = min(max(int(round(spec.train_ratio * n)), 1), n - 1)
        return [(np.sort(perm[:n_train]), np.sort(perm[n_train:]))]

    k = spec.folds
    if k > n:
        raise TooManyFolds(f"{k} folds requested for {n} rows")
    if spec.stratify:
        st = task.status[perm]
        ordered = np.concatenate([perm[st], perm[~st]])
        chunks = [ordered[f::k] for f in range(k)]
    else:
        chunks = np.array_split(perm, k)
    everything = np.arange(n)
    return [(np.setdiff1d(everything, c), np.sort(c)) for c in chunks]


# ---------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class Row:
    task: str
    learner: str
    fold: int
    measure: str
    score: float
    error: bool = False
    message: str = ""


@dataclass(frozen=True)
class Aggregate:
    task: str
    learner: str
    measure: str
    score: float | None
    n_folds: int
    n_errors: int


@dataclass
class BenchmarkResult:
    """Per-fold scores; aggregates are macro means over non-errored folds."""

    rows: list = field(default_factory=list)

    def __add__(self, other):
        return BenchmarkResult(self.rows + other.rows)

    def aggregates(self) -> list:
        groups = {}
        for r in self.rows:
            groups.setdefault((r.task, r.learner, r.measure), []).append(r)
        out = []
        for (task, learner, measure), rows in groups.items():
            ok = [r.score for r in rows if not r.error]
            score = math.fsum(ok) / len(ok) if ok else None
            out.append(Aggregate(task, learner, measure, score, len(rows), len(rows) - len(ok)))
        return out

    def aggregate(self, task, learner, measure):
        for a in self.aggregates():
            if (a.task, a.learner, a.measure) == (task, learner, measure):
                return a.score
        raise KeyError((task, learner, measure))

    def fully_errored(self) -> list:
        return [a for a in self.aggregates() if a.score is None]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["task", "learner", "fold", "measure", "score", "error", "message"])
            for r in self.rows:
                score = "NA" if r.error else repr(float(r.score))
                w.writerow([r.task, r.learner, r.fold, r.measure, score, int(r.error), r.message])

    def to_dict(self) -> dict:
        rows = []
        for r in self.rows:
            d = asdict(r)
            d["score"] = None if r.error else float(r.score)
            rows.append(d)
        return {"schema": SCHEMA_VERSION, "rows": rows, "aggregates": [asdict(a) for a in self.aggregates()]}

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def from_dict(cls, d) -> "BenchmarkResult":
        if d.get("schema") != SCHEMA_VERSION:
            raise ConfigError(f"unsupported result schema {d.get('schema')!r}")
        rows = [Row(r["task"], r["learner"], r["fold"], r["measure"],
                    math.nan if r["score"] is None else r["score"], r["error"], r["message"]) for r in d["rows"]]
        return cls(rows)


# ---------------------------------------------------------------------------
# resampling


def check_compatible(learner, measures):
    """Raise ConfigError unless every measure's input type is producible."""
    for m in measures:
        if not m.scalar:
            raise ConfigError(f"{m.id} is not a scalar measure and cannot be benchmarked")
        if m.requires not in learner.types:
            raise ConfigError(
                f"measure {m.describe()} needs '{m.requires}' but {learner.describe()} predicts {list(learner.types)}"
            )


def run_fold(task, learner, measures, train, test):
    """Fit, predict and score one fold; model/measure errors are flagged, not raised."""
    try:
        fitted = learner.fit(task.subset(train))
        pred = fitted.predict(task.subset(test))
    except (SurvbenchError, np.linalg.LinAlgError) as exc:
        msg = f"{type(exc).__name__}: {exc}"
        return [(math.nan, True, msg) for _ in measures]
    out = []
    for m in measures:
        try:
            out.append((m.score(pred), False, ""))
        except (SurvbenchError, np.linalg.LinAlgError) as exc:
            out.append((math.nan, True, f"{type(exc).__name__}: {exc}"))
    return out


def _map(fn, jobs, threads):
    if threads and threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda j: fn(*j), jobs))
    return [fn(*j) for j in jobs]


def resample(task, learner, spec: ResamplingSpec, measures, *, splits=None, label=None, threads=1) -> BenchmarkResult:
    """Score ``learner`` on every fold of ``spec``."""
    measures = list(measures)
    check_compatible(learner, measures)
    splits = instantiate(spec, task) if splits is None else splits
    label = label or learner.describe()
    jobs = [(task, learner, measures, tr, te) for tr, te in splits]
    results = _map(run_fold, jobs, threads)
    rows = []
    for fold, scores in enumerate(results):
        for m, (score, err, msg) in zip(measures, scores):
            rows.append(Row(task.id, label, fold, m.describe(), score, err, msg))
    return BenchmarkResult(rows)


def _labels(learners):
    seen, out = {}, []
    for lrn in learners:
        base = lrn.describe()
        seen[base] = seen.get(base, 0) + 1
        out.append(base if seen[base] == 1 else f"{base}#{seen[base]}")
    return out


def benchmark_grid(tasks, learners, resamplings, measures, *, threads=1) -> BenchmarkResult:
    """Cartesian benchmark; each (task, resampling) is split once and shared."""
    if not tasks or not learners or not resamplings or not measures:
        raise ConfigError("benchmark grid needs non-empty tasks, learners, resamplings and measures")
    measures = list(measures)
    labels = _labels(learners)
    for task in tasks:
        for lrn, label in zip(learners, labels):
            try:
                check_compatible(lrn, measures)
            except ConfigError as exc:
                raise ConfigError(f"[task={task.id}, learner={label}] {exc}") from None

    jobs, keys = [], []
    for task in tasks:
        for spec in resamplings:
            try:
                splits = instantiate(spec, task)
            except ConfigError as exc:
                raise ConfigError(f"[task={task.id}, resampling={spec.describe()}] {exc}") from None
            for lrn, label in zip(learners, labels):
                for fold, (tr, te) in enumerate(splits):
                    jobs.append((task, lrn, measures, tr, te))
                    keys.append((task.id, label, fold))
    results = _map(run_fold, jobs, threads)
    rows = []
    for (task_id, label, fold), scores in zip(keys, results):
        for m, (score, err, msg) in zip(measures, scores):
            rows.append(Row(task_id, label, fold, m.describe(), score, err, msg))
    return BenchmarkResult(rows)


# ---------------------------------------------------------------------------
# tuning


@dataclass
class TuneResult:
    result: BenchmarkResult
    chosen: list
    archive: list


def grid_candidates(space: dict) -> list:
    """All combinations, in key order then value order."""
    if not space or any(len(v) == 0 for v in space.values()):
        raise ConfigError("empty tuning grid")
    keys = list(space)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(space[k] for k in keys))]


def random_candidates(space: dict, budget: int, rng) -> list:
    """``budget`` draws: lists are sampled uniformly, ``(low, high)`` uniformly,
    and ``{"low", "high", "log": True}`` log-uniformly."""
    if budget < 1:
        raise ConfigError("random search budget must be >= 1")
    if not space:
        raise ConfigError("empty tuning space")
    out = []
    for _ in range(budget):
        cand = {}
        for key, dom in space.items():
            if isinstance(dom, dict):
                lo, hi = dom["low"], dom["high"]
                if dom.get("log"):
                    cand[key] = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
                else:
                    cand[key] = float(rng.uniform(lo, hi))
            elif isinstance(dom, tuple):
                cand[key] = float(rng.uniform(dom[0], dom[1]))
            else:
                cand[key] = dom[int(rng.integers(len(dom)))]
        out.append(cand)
    return out


def tune(task, learner, space, inner: ResamplingSpec, outer: ResamplingSpec, measure: MeasureSpec,
         *, method="grid", budget=None, seed=0, threads=1) -> TuneResult:
    """Nested resampling with grid or random search.

    Each outer training split is tuned by inner resampling; the best
    candidate (first wins ties) is refitted on the whole outer training
    split and scored on the outer test split. A candidate that errors on
    any inner fold is disqualified.
    """
    if measure.direction is None:
        raise ConfigError(f"{measure.id} has no optimisation direction")
    if method not in ("grid", "random"):
        raise ConfigError(f"unknown tuning method {method!r}")
    if method == "grid":
        grid = grid_candidates(space)
    elif budget is None:
        raise ConfigError("random search needs a budget")
    check_compatible(learner, [measure])

    rows, chosen, archive = [], [], []
    label = f"tuned[{learner.describe()}]"
    for fold, (tr, te) in enumerate(instantiate(outer, task)):
        if method == "grid":
            candidates = grid
        else:
            candidates = random_candidates(space, budget, np.random.default_rng(fold_seed(seed, task.id, fold)))
        train = task.subset(tr)
        inner_splits = instantiate(inner, train)
        best, best_score = None, None
        for cand in candidates:
            res = resample(train, learner.with_params(**cand), inner, [measure], splits=inner_splits, threads=threads)
            failed = [r for r in res.rows if r.error]
            if failed:
                reason = failed[0].message
                logger.info("candidate %s disqualified on outer fold %d: %s", cand, fold, reason)
                archive.append({"fold": fold, "params": cand, "score": None, "reason": reason})
                continue
            score = math.fsum(r.score for r in res.rows) / len(res.rows)
            archive.append({"fold": fold, "params": cand, "score": score, "reason": ""})
            better = best_score is None or (
                score > best_score if measure.direction == "maximize" else score < best_score
            )
            if better:
                best, best_score = cand, score
        chosen.append(best)
        if best is None:
            rows.append(Row(task.id, label, fold, measure.describe(), math.nan, True,
                            "all tuning candidates disqualified"))
            continue
        (score, err, msg), = run_fold(task, learner.with_params(**best), [measure], tr, te)
        rows.append(Row(task.id, label, fold, measure.describe(), score, err, msg))
    return TuneResult(BenchmarkResult(rows), chosen, archive)
