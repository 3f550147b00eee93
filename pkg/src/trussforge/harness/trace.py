"""Trace CSV files: one header row of column names, one row per recorded sample.

Values are written with 17 significant digits so reading a trace back gives
the exact floats that were recorded.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FLOAT_FORMAT = "%.17g"


@dataclass(frozen=True)
class Trace:
    columns: list[str]
    rows: np.ndarray

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]


def trace_csv(columns, rows) -> str:
    buf = io.StringIO()
    rows = np.asarray(rows, dtype=float).reshape(-1, len(columns))
    np.savetxt(buf, rows, fmt=FLOAT_FORMAT, delimiter=",", header=",".join(columns), comments="")
    return buf.getvalue()


def write_trace(path, columns, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(trace_csv(columns, rows))
    return path


def read_trace(path) -> Trace:
    with open(path, "r", encoding="utf-8") as fh:
        columns = fh.readline().strip().split(",")
        rows = np.loadtxt(fh, delimiter=",", ndmin=2)
    if rows.size == 0:
        rows = rows.reshape(0, len(columns))
    return Trace(columns, rows)
