"""Tracking metrics computed from a trace table.

Everything here reads only the trace columns (plus the scenario for labels),
so a report recomputed from a saved CSV matches the one written by the run.
"""
from __future__ import annotations

import json

import numpy as np

from ..errors import EmptyWindow
from ..scenarios.loader import HARDWARE_REFERENCE, Scenario
from .runner import PHASE_CODES, STATUS_CODES

STATUS_NAMES = {code: status.value for status, code in STATUS_CODES.items()}
FLAT_MIN_DURATION_S = 0.1
FLAT_TOLERANCE_N = 1e-6


def column(trace, name: str) -> np.ndarray:
    return np.asarray(trace.rows)[:, list(trace.columns).index(name)]


def rmse(desired, actual, window=None) -> float:
    """Root-mean-square of ``desired - actual`` over the boolean ``window``."""
    desired = np.asarray(desired, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if window is not None:
        window = np.asarray(window, dtype=bool)
        desired, actual = desired[window], actual[window]
    if desired.size == 0:
        raise EmptyWindow("no samples in the metric window")
    return float(np.sqrt(np.mean((desired - actual) ** 2)))


def measured_window(trace) -> np.ndarray:
    return column(trace, "measure") > 0.5


def position_rmse(trace, window=None) -> dict[str, float]:
    """Per-axis RMSE of the reference point over ``window`` (default: measured segments)."""
    window = measured_window(trace) if window is None else window
    return {a: rmse(column(trace, f"ref_des_{a}_m"), column(trace, f"ref_act_{a}_m"), window) for a in "xyz"}


def contact_force(trace, scn: Scenario) -> np.ndarray:
    """Applied contact force per sample: per-side grasp normals (mode grasp) or the first wall reading."""
    if scn.mode == "grasp":
        n_obj = len(scn.world.objects)
        a = np.max([column(trace, f"obj{i}_normal_a_N") for i in range(n_obj)], axis=0)
        b = np.max([column(trace, f"obj{i}_normal_b_N") for i in range(n_obj)], axis=0)
        return np.column_stack([a, b])
    if not scn.world.walls:
        raise EmptyWindow("node-mode force metrics need a wall")
    return column(trace, "wall0_force_N")[:, None]


def force_rmse(trace, scn: Scenario, window=None) -> float:
    window = measured_window(trace) if window is None else np.asarray(window, dtype=bool)
    F = contact_force(trace, scn)
    sp = column(trace, "force_setpoint_N")
    desired = np.repeat(sp[:, None], F.shape[1], axis=1)
    return rmse(desired[window].ravel(), F[window].ravel())


def holding_error_pct(trace, scn: Scenario, target: float) -> float:
    """Mean absolute force error over the hold phase, percent of ``target``."""
    hold = column(trace, "phase") == PHASE_CODES["hold"]
    F = contact_force(trace, scn)[hold]
    if F.size == 0:
        raise EmptyWindow("no hold-phase samples")
    return float(100.0 * np.mean(np.abs(F - target)) / target)


def overshoot_pct(trace, scn: Scenario, target: float) -> float:
    active = column(trace, "phase") != PHASE_CODES["none"]
    F = contact_force(trace, scn)[active]
    if F.size == 0:
        raise EmptyWindow("no force-program samples")
    return float(max(0.0, 100.0 * (np.max(F) - target) / target))


def flat_intervals(trace, scn: Scenario, min_duration: float = FLAT_MIN_DURATION_S,
                   tol: float = FLAT_TOLERANCE_N) -> list[tuple[float, float]]:
    """Intervals of the ramp phase where the applied force does not change.

    The actuator stalls in its dead zone until the force error grows past the
    breakaway band, so a ramp shows up as a staircase at low force.
    """
    t = column(trace, "time_s")
    ramp = column(trace, "phase") == PHASE_CODES["ramp"]
    F = contact_force(trace, scn).sum(axis=1)
    out = []
    start = None
    for i in range(1, t.size):
        still = ramp[i] and ramp[i - 1] and abs(F[i] - F[i - 1]) <= tol
        if still and start is None:
            start = i - 1
        if (not still or i == t.size - 1) and start is not None:
            end = i if still else i - 1
            if t[end] - t[start] >= min_duration - 1e-9:
                out.append((float(t[start]), float(t[end])))
            start = None
    return out


def status_events(trace, n_objects: int) -> list[dict]:
    t = column(trace, "time_s")
    events = []
    for j in range(n_objects):
        s = column(trace, f"obj{j}_status").astype(int)
        for i in np.flatnonzero(np.diff(s)) + 1:
            events.append({"time_s": float(t[i]), "object": j, "status": STATUS_NAMES[int(s[i])]})
    events.sort(key=lambda e: (e["time_s"], e["object"]))
    return events


def segment_summary(trace, scn: Scenario) -> list[dict]:
    seg = column(trace, "segment").astype(int)
    n_obj = len(scn.world.objects)
    out = []
    for k, (t0, t1, s) in enumerate(scn.program.segment_windows()):
        rows = seg == k
        entry = {"index": k, "kind": s.kind, "label": s.label, "start_s": t0, "end_s": t1,
                 "measured": bool(s.measure), "samples": int(np.sum(rows))}
        if n_obj:
            entry["statuses"] = [sorted({STATUS_NAMES[int(v)] for v in column(trace, f"obj{j}_status")[rows]})
                                 for j in range(n_obj)]
        out.append(entry)
    return out


def _object_summary(trace, scn: Scenario) -> list[dict]:
    out = []
    for j, obj in enumerate(scn.world.objects):
        start = np.array([column(trace, f"obj{j}_{a}_m")[0] for a in "xyz"])
        end = np.array([column(trace, f"obj{j}_{a}_m")[-1] for a in "xyz"])
        out.append({"name": obj.name, "start_m": start.tolist(), "end_m": end.tolist(),
                    "displacement_m": (end - start).tolist(),
                    "final_status": STATUS_NAMES[int(column(trace, f"obj{j}_status")[-1])]})
    return out


def _safe(fn, *args):
    try:
        return fn(*args)
    except EmptyWindow:
        return None


def compute_report(trace, scn: Scenario, seed: int, exit_code: int, error: str | None = None) -> dict:
    """Metrics report of one run; contains no wall-clock data so it is reproducible."""
    t = column(trace, "time_s")
    report = {
        "scenario": scn.name,
        "configuration": scn.configuration.id.value,
        "mode": scn.mode,
        "seed": int(seed),
        "exit_code": int(exit_code),
        "error": error,
        "samples": int(t.size),
        "sim_duration_s": float(t[-1]) if t.size else 0.0,
        "program_duration_s": float(scn.program.duration),
        "k_pos_N_per_m": float(scn.k_pos),
        "ideal_actuators": bool(scn.world.model.loadcell_noise_sd == 0.0 and scn.world.model.u_dz == 0.0),
        "position_rmse_m": _safe(position_rmse, trace),
        "segments": segment_summary(trace, scn),
    }
    if scn.mode == "grasp" or scn.world.walls:
        report["force_rmse_N"] = _safe(force_rmse, trace, scn)
    prog = scn.raw.get("program", {})
    if prog.get("type") == "force_ramp":
        target = float(prog["target_N"])
        report["force_target_N"] = target
        report["holding_error_pct"] = _safe(holding_error_pct, trace, scn, target)
        report["overshoot_pct"] = _safe(overshoot_pct, trace, scn, target)
        report["flat_intervals_s"] = [list(iv) for iv in flat_intervals(trace, scn)]
    if scn.world.objects:
        report["objects"] = _object_summary(trace, scn)
        report["status_events"] = status_events(trace, len(scn.world.objects))
    if prog.get("type") == "suite":
        key = f"{scn.configuration.id.value}_{prog['trajectory']}"
        if key in HARDWARE_REFERENCE:
            report["hardware_reference"] = {"source": HARDWARE_REFERENCE["source"], **HARDWARE_REFERENCE[key]}
    return report


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"
