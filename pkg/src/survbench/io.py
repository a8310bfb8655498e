"""CSV ingestion with one-hot encoding of string columns, and CSV export."""

from __future__ import annotations

import csv
import json

import numpy as np

from .core import SurvivalTask
from .errors import MissingValue, ValidationError

MISSING = {"", "na", "nan", "null", "none"}
TRUE_VALUES = {"1", "true", "TRUE", "True"}
FALSE_VALUES = {"0", "false", "FALSE", "False"}


def _is_number(v: str) -> bool:
    try:
        float(v)
    except ValueError:
        return False
    return True


def read_table(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        rows = [r for r in reader if r]
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    header = [h.strip() for h in header]
    for i, r in enumerate(rows, start=2):
        if len(r) != len(header):
            raise ValidationError(f"{path}:{i}: expected {len(header)} fields, got {len(r)}")
    return header, {h: [r[j].strip() for r in rows] for j, h in enumerate(header)}


def _parse_status(values, col):
    out = []
    for i, v in enumerate(values):
        if v in TRUE_VALUES:
            out.append(True)
        elif v in FALSE_VALUES:
            out.append(False)
        else:
            raise ValidationError(f"event column {col!r} row {i + 1}: {v!r} is not one of 0/1/true/false")
    return np.array(out, dtype=bool)


def _parse_numeric(values, col):
    try:
        return np.array([float(v) for v in values])
    except ValueError:
        bad = next(v for v in values if not _is_number(v))
        raise ValidationError(f"column {col!r}: cannot parse {bad!r} as a number") from None


def build_manifest(header, columns, time_col, event_col, drop=()):
    """Decide numeric vs categorical per feature column.

    A column is categorical when none of its values parse as numbers; a
    column where only some values parse is rejected. Categorical levels are
    sorted and the first one is the dropped reference level.
    """
    numeric, categorical = [], {}
    for col in header:
        if col in (time_col, event_col) or col in drop:
            continue
        vals = columns[col]
        missing = [i for i, v in enumerate(vals) if v.lower() in MISSING]
        if missing:
            raise MissingValue(f"column {col!r} has missing values (first at row {missing[0] + 1})")
        parses = [_is_number(v) for v in vals]
        if all(parses):
            numeric.append(col)
        elif not any(parses):
            categorical[col] = sorted(set(vals))
        else:
            bad = vals[parses.index(False)]
            raise ValidationError(f"column {col!r}: cannot parse {bad!r} as a number")
    columns_used = [c for c in header if c in numeric or c in categorical]
    features = []
    for col in columns_used:
        if col in numeric:
            features.append(col)
        else:
            features.extend(f"{col}_{lvl}" for lvl in categorical[col][1:])
    return {
        "time_col": time_col,
        "event_col": event_col,
        "drop": list(drop),
        "numeric": numeric,
        "categorical": categorical,
        "columns": columns_used,
        "features": features,
    }


def apply_manifest(header, columns, manifest, task_id):
    time_col, event_col = manifest["time_col"], manifest["event_col"]
    needed = [time_col, event_col, *manifest["numeric"], *manifest["categorical"]]
    absent = [c for c in needed if c not in header]
    if absent:
        raise ValidationError(f"missing column(s) {absent}")
    for col in (time_col, event_col):
        if any(v.lower() in MISSING for v in columns[col]):
            raise MissingValue(f"column {col!r} has missing values")

    time = _parse_numeric(columns[time_col], time_col)
    status = _parse_status(columns[event_col], event_col)
    n = time.size
    blocks = []
    # training column order, whatever the order in this file
    for col in manifest["columns"]:
        if col in manifest["numeric"]:
            vals = columns[col]
            if any(v.lower() in MISSING for v in vals):
                raise MissingValue(f"column {col!r} has missing values")
            blocks.append(_parse_numeric(vals, col)[:, None])
        elif col in manifest["categorical"]:
            levels = manifest["categorical"][col]
            vals = np.array(columns[col])
            unseen = sorted(set(vals) - set(levels))
            if unseen:
                raise ValidationError(f"column {col!r}: unseen level(s) {unseen}")
            blocks.append(np.column_stack([(vals == lvl).astype(float) for lvl in levels[1:]]).reshape(n, -1))
    X = np.hstack(blocks) if blocks else np.empty((n, 0))
    return SurvivalTask(task_id, X, time, status, tuple(manifest["features"]))


def ingest_csv(path, time_col="time", event_col="status", id=None, drop=(), manifest=None, manifest_path=None):
    """Load a CSV into a :class:`SurvivalTask`.

    Returns ``(task, manifest)``. Pass a previous ``manifest`` to reproduce
    the same encoding (e.g. at prediction time); ``manifest_path`` writes
    the manifest as JSON.
    """
    header, columns = read_table(path)
    for col in (time_col, event_col):
        if col not in header:
            raise ValidationError(f"{path}: missing column {col!r}")
    if manifest is None:
        manifest = build_manifest(header, columns, time_col, event_col, drop)
    task = apply_manifest(header, columns, manifest, id or str(path))
    if manifest_path is not None:
        with open(manifest_path, "w") as fh:
            json.dump(manifest, fh, indent=1)
    return task, manifest


def write_task_csv(task, path):
    """Write features, time and status (0/1) with full float precision."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*task.feature_names, "time", "status"])
        for x, t, s in zip(task.features, task.time, task.status):
            w.writerow([*(repr(float(v)) for v in x), repr(float(t)), int(s)])
