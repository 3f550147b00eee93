"""Parameter sweeps: a grid of scenario overrides, each cell repeated with distinct seeds."""
from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import TrussError
from ..scenarios.loader import build_scenario, set_dotted
from ..scenarios.programs import SUITE_ROWS
from .metrics import compute_report
from .runner import EXIT_CONFIG, run

log = logging.getLogger(__name__)

SUITE_GRID = {"program.trajectory": list(SUITE_ROWS)}


@dataclass
class CellResult:
    overrides: dict
    reports: list[dict] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def label(self) -> str:
        return ", ".join(f"{k}={v}" for k, v in self.overrides.items()) or "base"

    def mean(self, key: str, axis: str | None = None) -> float | None:
        vals = []
        for r in self.reports:
            v = r.get(key)
            if v is not None and axis is not None:
                v = v.get(axis)
            if v is not None:
                vals.append(v)
        return float(np.mean(vals)) if vals else None


def _one(data: dict, seed: int, deterministic: bool) -> dict:
    """Run one cell repeat; errors become a report with a nonzero exit code."""
    try:
        scn = build_scenario(data)
    except TrussError as exc:
        return {"seed": seed, "exit_code": EXIT_CONFIG, "error": f"{type(exc).__name__}: {exc}"}
    res = run(scn, seed=seed, deterministic=deterministic)
    return compute_report(res, res.scenario, seed, res.exit_code, res.error)


def grid_cells(grid: dict) -> list[dict]:
    if not grid:
        return [{}]
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def sweep(data: dict, grid: dict, repeats: int = 3, base_seed: int | None = None, workers: int = 1,
          deterministic: bool = False) -> list[CellResult]:
    """Run every grid cell ``repeats`` times with seeds ``base_seed + r``."""
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    base_seed = int(data.get("seed", 0)) if base_seed is None else int(base_seed)
    cells = [CellResult(ov) for ov in grid_cells(grid)]
    jobs = []
    for idx, cell in enumerate(cells):
        cell_data = data
        for path, value in cell.overrides.items():
            cell_data = set_dotted(cell_data, path, value)
        for r in range(repeats):
            jobs.append((idx, cell_data, base_seed + r))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_one, d, s, deterministic) for _, d, s in jobs]
            outcomes = [f.result() for f in futures]
    else:
        outcomes = [_one(d, s, deterministic) for _, d, s in jobs]
    for (idx, _, seed), rep in zip(jobs, outcomes):
        cell = cells[idx]
        if rep.get("exit_code", 0) != 0:
            cell.errors.append(f"seed {seed}: exit {rep['exit_code']} {rep.get('error')}")
            log.warning("cell %s seed %d failed: %s", cell.label, seed, rep.get("error"))
        cell.reports.append(rep)
    return cells


def summary_rows(cells: list[CellResult]) -> list[dict]:
    rows = []
    for cell in cells:
        ok = [r for r in cell.reports if r.get("exit_code") == 0]
        part = CellResult(cell.overrides, ok)
        rows.append({
            "cell": cell.label,
            "runs": len(cell.reports),
            "failed": len(cell.reports) - len(ok),
            "rmse_x_m": part.mean("position_rmse_m", "x"),
            "rmse_y_m": part.mean("position_rmse_m", "y"),
            "rmse_z_m": part.mean("position_rmse_m", "z"),
            "rmse_force_N": part.mean("force_rmse_N"),
        })
    return rows


def format_table(rows: list[dict]) -> str:
    """Fixed-width table: one row per cell, mean RMSE over successful repeats."""
    head = f"{'cell':<32} {'runs':>4} {'fail':>4} {'x [m]':>9} {'y [m]':>9} {'z [m]':>9} {'F [N]':>8}"
    lines = [head, "-" * len(head)]

    def fmt(v, w, p):
        return f"{v:>{w}.{p}f}" if v is not None else f"{'-':>{w}}"

    for r in rows:
        lines.append(f"{r['cell']:<32} {r['runs']:>4} {r['failed']:>4} {fmt(r['rmse_x_m'], 9, 4)} "
                     f"{fmt(r['rmse_y_m'], 9, 4)} {fmt(r['rmse_z_m'], 9, 4)} {fmt(r['rmse_force_N'], 8, 2)}")
    return "\n".join(lines) + "\n"
