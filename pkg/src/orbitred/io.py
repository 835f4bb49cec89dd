"""Trajectory serialization: CSV (17 significant digits) and JSON."""

from __future__ import annotations

import csv
import io
import json
from typing import Any, Sequence

import numpy as np

ROTOR_COLUMNS = (
    ["t"]
    + [f"theta{i}" for i in (1, 2, 3)]
    + [f"y{i}" for i in (1, 2, 3)]
    + [f"nu{i}" for i in (1, 2, 3)]
    + ["energy", "casimir"]
)
FREE_COLUMNS = ["t", "nu1", "nu2", "nu3", "energy", "casimir"]


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def to_csv(columns: Sequence[str], rows: np.ndarray) -> str:
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def to_json(columns: Sequence[str], rows: np.ndarray, meta: dict[str, Any]) -> str:
    payload = {
        "meta": meta,
        "columns": list(columns),
        "rows": [[float(v) for v in row] for row in rows],
    }
    return json.dumps(payload, indent=1) + "\n"


def parse_csv(text: str) -> tuple[list[str], np.ndarray]:
    reader = csv.reader(io.StringIO(text))
    columns = next(reader)
    rows = [[float(v) for v in r] for r in reader if r]
    return columns, np.array(rows, dtype=float).reshape(-1, len(columns))


def parse_json(text: str) -> tuple[list[str], np.ndarray, dict[str, Any]]:
    payload = json.loads(text)
    columns = payload["columns"]
    rows = np.array(payload["rows"], dtype=float).reshape(-1, len(columns))
    return columns, rows, payload["meta"]


def read_trajectory(path: str) -> tuple[list[str], np.ndarray]:
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".json"):
        columns, rows, _ = parse_json(text)
        return columns, rows
    return parse_csv(text)
