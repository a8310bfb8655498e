"""Command-line front end.

Exit codes: 0 success, 1 benchmark finished but some cell errored on every
fold, 2 usage/config/data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .compose import FittedPipeline, make_pipeline
from .core import SurvivalPrediction
from .errors import SurvbenchError
from .io import ingest_csv, write_task_csv
from .learners import FittedModel
from .measures import calib_curve, make_measure
from .resample import ResamplingSpec, benchmark_grid
from .simgen import SimSpec, simulate


class UsageError(Exception):
    pass


def _floats(text):
    if text is None or text.strip() == "":
        return ()
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"cannot parse number list {text!r}") from None


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args):
    beta = _floats(args.beta)
    if len(beta) != args.p:
        raise UsageError(f"--beta has {len(beta)} values but --p is {args.p}")
    spec = SimSpec(n=args.n, p=args.p, beta=beta, shape=args.shape, rate=args.rate,
                   cens_rate=args.cens_rate, admin_cutoff=args.admin_cutoff, seed=args.seed)
    task = simulate(spec)
    out = Path(args.out)
    write_task_csv(task, out)
    out.with_suffix(".spec.json").write_text(spec.to_json() + "\n")
    print(f"wrote {task.n} rows ({int(task.status.sum())} events) to {out}")
    return 0


# ---------------------------------------------------------------------------
# benchmark


def _load_task(entry, out_dir, index):
    if not isinstance(entry, dict):
        raise UsageError("each task entry must be an object")
    if "simulate" in entry:
        sim = dict(entry["simulate"])
        sim.setdefault("id", entry.get("id", f"sim{index}"))
        sim["beta"] = tuple(sim.get("beta", ()))
        try:
            return simulate(SimSpec(**sim))
        except TypeError as exc:
            raise UsageError(f"bad simulate options: {exc}") from None
    try:
        path = entry["path"]
    except KeyError:
        raise UsageError("task entry needs 'path' or 'simulate'") from None
    task_id = entry.get("id", Path(path).stem)
    manifest_path = None
    if out_dir is not None:
        manifest_path = out_dir / f"{task_id}.manifest.json"
    task, _ = ingest_csv(path, entry.get("time_col", "time"), entry.get("event_col", "status"),
                         id=task_id, drop=tuple(entry.get("drop", ())), manifest_path=manifest_path)
    return task


def _format_score(v):
    # full precision so the table can be checked against aggregates.json
    return "NA" if v is None else repr(float(v))


def cmd_benchmark(args):
    try:
        config = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    for key in ("tasks", "learners", "measures"):
        if not config.get(key):
            raise UsageError(f"config needs a non-empty {key!r} list")
    out_dir = Path(config.get("output_dir", args.output_dir or "."))
    out_dir.mkdir(parents=True, exist_ok=True)

    measures = [make_measure(m) for m in config["measures"]]
    learners = [make_pipeline(lrn) for lrn in config["learners"]]
    rs = config.get("resampling", {})
    unknown = set(rs) - {"kind", "folds", "train_ratio", "seed", "stratify"}
    if unknown:
        raise UsageError(f"unknown resampling option(s) {sorted(unknown)}")
    resampling = ResamplingSpec(**rs)
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    tasks = [_load_task(t, out_dir, i) for i, t in enumerate(config["tasks"])]

    result = benchmark_grid(tasks, learners, [resampling], measures, threads=args.threads)
    result.to_csv(out_dir / "results.csv")
    result.to_json(out_dir / "aggregates.json")

    first = measures[0].describe()
    aggs = result.aggregates()
    table = [a for a in aggs if a.measure == first]
    flip = measures[0].direction == "maximize"
    table.sort(key=lambda a: (a.score is None, -(a.score or 0) if flip else (a.score or 0), a.task, a.learner))
    others = [m.describe() for m in measures[1:]]
    lookup = {(a.task, a.learner, a.measure): a for a in aggs}
    print("\t".join(["task", "learner", first, *others, "errored_folds"]))
    for a in table:
        cells = [_format_score(lookup[(a.task, a.learner, m)].score) for m in others]
        n_err = sum(lookup[(a.task, a.learner, m)].n_errors for m in [first, *others])
        print("\t".join([a.task, a.learner, _format_score(a.score), *cells, str(n_err)]))

    dead = result.fully_errored()
    if dead:
        for a in dead:
            print(f"all folds errored: task={a.task} learner={a.learner} measure={a.measure}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# model persistence


def _fit(descriptor, task, manifest):
    learner = make_pipeline(descriptor)
    fitted = learner.fit(task)
    payload = fitted.to_dict()
    payload["encoding"] = manifest
    return fitted, payload


def _load_model(path):
    payload = json.loads(Path(path).read_text())
    if "pipeline" in payload:
        return FittedPipeline.from_dict(payload), payload.get("encoding")
    return FittedModel.from_dict(payload), payload.get("encoding")


def _model_types(model):
    if isinstance(model, FittedPipeline):
        return model.pipeline.types
    return model.predict_types


def cmd_predict(args):
    if args.learner:
        if not args.train:
            raise UsageError("--learner needs --train")
        train, manifest = ingest_csv(args.train, args.time_col, args.event_col, id="train", drop=tuple(args.drop))
        model, payload = _fit(args.learner, train, manifest)
        if args.save:
            Path(args.save).write_text(json.dumps(payload, indent=1) + "\n")
    elif args.model:
        model, manifest = _load_model(args.model)
    else:
        raise UsageError("give --learner (fit) or --model (load)")
    if args.task:
        task, _ = ingest_csv(args.task, args.time_col, args.event_col, id="newdata", manifest=manifest)
        pred = model.predict(task)
        text = pred.to_json()
        if args.out:
            Path(args.out).write_text(text + "\n")
        else:
            print(text)
    return 0


def cmd_score(args):
    pred = SurvivalPrediction.from_json(Path(args.pred).read_text())
    for m in args.measure:
        spec = make_measure(m)
        print(f"{spec.describe()}\t{spec.score(pred):.10g}")
    return 0


def cmd_calibplot(args):
    if args.model:
        model, manifest = _load_model(args.model)
        types = _model_types(model)
    elif args.learner:
        learner = make_pipeline(args.learner)
        types = learner.types
        if "distr" not in types:
            raise UsageError(f"{learner.describe()} does not predict distr; add a distrcompositor")
        train, manifest = ingest_csv(args.train or args.task, args.time_col, args.event_col, id="train",
                                     drop=tuple(args.drop))
        model = learner.fit(train)
    else:
        raise UsageError("give --model or --learner")
    if "distr" not in types:
        raise UsageError("model does not predict distr; add a distrcompositor")
    task, _ = ingest_csv(args.task, args.time_col, args.event_col, id="calib", manifest=manifest)
    curve = calib_curve(model.predict(task))
    curve.to_csv(args.out)
    print(f"wrote {curve.t.size} points to {args.out} (max gap {curve.max_gap():.4f})")
    return 0


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="survbench", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate a Weibull-baseline PH task to CSV")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--p", type=int, default=0)
    s.add_argument("--beta", default="")
    s.add_argument("--shape", type=float, default=1.0)
    s.add_argument("--rate", type=float, default=1.0)
    s.add_argument("--cens-rate", type=float, default=0.0)
    s.add_argument("--admin-cutoff", type=float, default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("benchmark", help="run a benchmark grid from a JSON config")
    b.add_argument("config")
    b.add_argument("--threads", type=int, default=1)
    b.add_argument("--output-dir", default=None, help="used when the config has no output_dir")
    b.set_defaults(func=cmd_benchmark)

    def data_args(q):
        q.add_argument("--time-col", default="time")
        q.add_argument("--event-col", default="status")
        q.add_argument("--drop", action="append", default=[], help="column to ignore (repeatable)")

    c = sub.add_parser("calibplot", help="write mean predicted survival vs Kaplan-Meier as CSV")
    c.add_argument("--model")
    c.add_argument("--learner")
    c.add_argument("--train", help="training CSV for --learner (default: --task)")
    c.add_argument("--task", required=True)
    c.add_argument("--out", required=True)
    data_args(c)
    c.set_defaults(func=cmd_calibplot)

    r = sub.add_parser("predict", help="fit and save a model, and/or predict new data")
    r.add_argument("--learner")
    r.add_argument("--train")
    r.add_argument("--save")
    r.add_argument("--model")
    r.add_argument("--task")
    r.add_argument("--out")
    data_args(r)
    r.set_defaults(func=cmd_predict)

    sc = sub.add_parser("score", help="score a saved prediction JSON")
    sc.add_argument("--pred", required=True)
    sc.add_argument("--measure", action="append", required=True)
    sc.set_defaults(func=cmd_score)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, SurvbenchError, OSError) as exc:
        print(f"survbench {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
