"""Trace CSV and summary JSON writers."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import jsonschema
import numpy as np

from fastretrial.engine import RunMetrics

TRACE_COLUMNS = ("slot", "k1", "successes", "collisions", "l1", "z", "mean_queue", "max_queue")

SUMMARY_SCHEMA = {
    "type": "object",
    "required": [
        "time_avg_mean_queue",
        "max_queue",
        "mean_access_delay",
        "collision_rate",
        "unstable",
        "final_l1",
        "time_avg_l1",
        "config",
    ],
    "properties": {
        "time_avg_mean_queue": {"type": "number", "minimum": 0},
        "max_queue": {"type": "integer", "minimum": 0},
        "mean_access_delay": {"type": ["number", "null"], "minimum": 0},
        "collision_rate": {"type": "number", "minimum": 0, "maximum": 1},
        "unstable": {"type": ["boolean", "null"]},
        "final_l1": {"type": "integer", "minimum": 1},
        "time_avg_l1": {"type": "number", "minimum": 1},
        "config": {
            "type": "object",
            "required": ["n1", "lambda", "l1", "l_total", "arrival_law", "horizon", "seed"],
        },
    },
}


def fmt(x: Any) -> str:
    """Render a value with 9 significant digits (integers verbatim)."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".9g")
    return str(x)


def jsonable(x: Any) -> Any:
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return None if not math.isfinite(x) else float(format(float(x), ".9g"))
    if isinstance(x, Mapping):
        return {k: jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    return x


def summary_document(metrics: RunMetrics) -> dict[str, Any]:
    doc = jsonable(metrics.summary())
    doc["config"] = jsonable(metrics.config.to_dict())
    return doc


def validate_summary(doc: Mapping[str, Any]) -> None:
    jsonschema.validate(doc, SUMMARY_SCHEMA)


def write_summary(metrics: RunMetrics, path: str | Path) -> dict[str, Any]:
    doc = summary_document(metrics)
    validate_summary(doc)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return doc


def write_trace(metrics: RunMetrics, path: str | Path) -> None:
    m = metrics
    cols = (
        np.arange(m.horizon),
        m.k1_by_slot,
        m.successes_by_slot,
        m.collisions_by_slot,
        m.l1_by_slot,
        m.z_by_slot,
        m.mean_queue_by_slot,
        m.max_queue_by_slot,
    )
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for row in zip(*(c.tolist() for c in cols)):
            w.writerow([fmt(v) for v in row])


def write_table(
    path: str | Path,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    header: Mapping[str, Any] | None = None,
) -> None:
    """Write a plot-ready CSV, with ``# key=value`` comment lines on top."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for k, v in (header or {}).items():
            fh.write(f"# {k}={fmt(v)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_table(path: str | Path) -> tuple[dict[str, str], list[dict[str, str]]]:
    header: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("# "):
            k, _, v = line[2:].partition("=")
            header[k] = v
        else:
            body.append(line)
    return header, list(csv.DictReader(body))
