"""Piecewise trajectory programs.

A program drives one *reference point* (a single node, or the midpoint of a
grasp pair) plus a scalar force setpoint.  Segments are time-contiguous;
each one starts from the state the previous one ended in, so programs are
built from relative moves and cannot jump.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import Unreachable

SEGMENT_KINDS = ("hold", "line", "circle", "force_ramp", "grasp", "release")
PLANE_NORMALS = {
    "xy": (0.0, 0.0, 1.0),
    "yz": (1.0, 0.0, 0.0),
    "xz": (0.0, 1.0, 0.0),
    "oblique": tuple(np.ones(3) / math.sqrt(3.0)),
}
PLANE_START_DIRECTIONS = {
    "xy": (1.0, 0.0, 0.0),
    "yz": (0.0, 1.0, 0.0),
    "xz": (1.0, 0.0, 0.0),
    "oblique": tuple(np.array([1.0, -1.0, 0.0]) / math.sqrt(2.0)),
}


def smooth_step(tau):
    """Minimum-jerk time scaling on [0, 1] (peak speed 1.875x the mean)."""
    tau = min(max(tau, 0.0), 1.0)
    return tau ** 3 * (10.0 - 15.0 * tau + 6.0 * tau * tau)


def trapezoid_step(tau, blend: float = 0.2):
    """Cruise-speed time scaling on [0, 1] with raised-cosine speed blends.

    Speed rises over the first ``blend`` fraction, cruises at ``1/(1-blend)``
    times the mean and falls symmetrically; acceleration stays continuous.
    """
    tau = min(max(tau, 0.0), 1.0)
    if not 0.0 < blend <= 0.5:
        raise ValueError("blend must lie in (0, 0.5]")
    v = 1.0 / (1.0 - blend)

    def rise(x):
        return v * (x / 2.0 - blend / (2.0 * math.pi) * math.sin(math.pi * x / blend))

    if tau < blend:
        return rise(tau)
    if tau > 1.0 - blend:
        return 1.0 - rise(1.0 - tau)
    return v * (blend / 2.0 + tau - blend)


def time_scaling(tau, profile: str = "smooth") -> float:
    if profile == "smooth":
        return smooth_step(tau)
    if profile == "trapezoid":
        return trapezoid_step(tau)
    if profile == "linear":
        return min(max(tau, 0.0), 1.0)
    raise ValueError(f"unknown profile {profile!r}")


@dataclass(frozen=True)
class Segment:
    kind: str
    duration: float
    params: dict = field(default_factory=dict)
    measure: bool = False  # include in tracking-error windows
    label: str = ""

    def __post_init__(self):
        if self.kind not in SEGMENT_KINDS:
            raise ValueError(f"unknown segment kind {self.kind!r}")
        if not self.duration >= 0:
            raise ValueError("segment duration must be non-negative")


@dataclass(frozen=True)
class Setpoint:
    position: np.ndarray  # reference point, m
    force: float  # force setpoint magnitude, N
    gap: float  # extra opening of each grasp node beyond contact, m
    engaged: int | None  # index of the object the grasp is closing on
    segment: int
    phase: str  # "ramp", "hold" or "move"
    measure: bool


@dataclass(frozen=True)
class _Start:
    t: float
    position: np.ndarray
    force: float
    gap: float
    engaged: int | None


class TrajectoryProgram:
    """Immutable sequence of segments starting at ``start``."""

    def __init__(self, segments, start, force: float = 0.0, gap: float = 0.0, engaged: int | None = None):
        self.segments = tuple(segments)
        starts = []
        t, p, f, g, e = 0.0, np.asarray(start, dtype=float).reshape(3).copy(), float(force), float(gap), engaged
        for seg in self.segments:
            starts.append(_Start(t, p.copy(), f, g, e))
            t += seg.duration
            end = self._evaluate_in(seg, starts[-1], seg.duration)
            p, f, g, e = end.position, end.force, end.gap, end.engaged
        self._starts = tuple(starts)
        self._end = _Start(t, p, f, g, e)
        self._times = [s.t for s in starts]

    @property
    def duration(self) -> float:
        return self._end.t

    @property
    def start(self) -> np.ndarray:
        return self._starts[0].position.copy() if self._starts else self._end.position.copy()

    @property
    def end_position(self) -> np.ndarray:
        return self._end.position.copy()

    def segment_windows(self) -> list[tuple[float, float, Segment]]:
        return [(s.t, s.t + seg.duration, seg) for s, seg in zip(self._starts, self.segments)]

    def evaluate(self, t: float) -> Setpoint:
        if not self.segments:
            e = self._end
            return Setpoint(e.position.copy(), e.force, e.gap, e.engaged, -1, "hold", False)
        idx = max(0, bisect.bisect_right(self._times, t) - 1)
        seg = self.segments[idx]
        start = self._starts[idx]
        local = min(max(t - start.t, 0.0), seg.duration)
        sp = self._evaluate_in(seg, start, local)
        return Setpoint(sp.position, sp.force, sp.gap, sp.engaged, idx, _phase(seg, start, local), seg.measure)

    @staticmethod
    def _evaluate_in(seg: Segment, s: _Start, local: float) -> _Start:
        p, f, g, e = s.position.copy(), s.force, s.gap, s.engaged
        q = seg.params
        tau = local / seg.duration if seg.duration > 0 else 1.0
        if seg.kind == "line":
            delta = np.asarray(q["delta"], dtype=float)
            p = p + time_scaling(tau, q.get("profile", "smooth")) * delta
        elif seg.kind == "circle":
            n, e1 = _plane_axes(q)
            e2 = np.cross(n, e1)
            r = float(q["radius"])
            center = p - r * e1
            phi = 2.0 * math.pi * float(q.get("turns", 1.0)) * time_scaling(tau, q.get("profile", "smooth"))
            p = center + r * (math.cos(phi) * e1 + math.sin(phi) * e2)
        elif seg.kind == "force_ramp":
            target, rate = float(q["target"]), float(q["rate"])
            f = _ramp(s.force, target, rate, local)
        elif seg.kind == "grasp":
            e = int(q["object"])
            close = float(q.get("close_time", seg.duration / 2.0))
            g = s.gap * (1.0 - min(local / close, 1.0)) if close > 0 else 0.0
            f = _ramp(s.force, float(q["force"]), float(q["rate"]), local)
        elif seg.kind == "release":
            e = None
            unload = float(q.get("unload_time", 0.4 * seg.duration))
            f = s.force * (1.0 - min(local / unload, 1.0)) if unload > 0 else 0.0
            g = s.gap + tau * (float(q["gap"]) - s.gap)
        return _Start(s.t + local, p, f, g, e)


def _ramp(f0, target, rate, local):
    if rate <= 0:
        return target
    step = rate * local
    return min(target, f0 + step) if target >= f0 else max(target, f0 - step)


def _phase(seg, s, local):
    if seg.kind == "force_ramp":
        q = seg.params
        ramp_time = abs(float(q["target"]) - s.force) / float(q["rate"]) if float(q["rate"]) > 0 else 0.0
        return "ramp" if local < ramp_time else "hold"
    if seg.kind in ("grasp", "release"):
        return "ramp"
    return "move" if seg.kind in ("line", "circle") else "hold"


def _plane_axes(q):
    if "plane" in q:
        n = np.asarray(PLANE_NORMALS[q["plane"]], dtype=float)
        e1 = np.asarray(PLANE_START_DIRECTIONS[q["plane"]], dtype=float)
    else:
        n = np.asarray(q["normal"], dtype=float)
        e1 = np.asarray(q["start_direction"], dtype=float)
    n = n / np.linalg.norm(n)
    e1 = e1 - (e1 @ n) * n
    return n, e1 / np.linalg.norm(e1)


def force_ramp_program(target: float, rate: float = 10.0, hold: float = 5.0, start=(0.0, 0.0, 0.0)) -> TrajectoryProgram:
    """Force setpoint rising at ``rate`` from zero to ``target``, then held."""
    if target < 0 or rate <= 0 or hold < 0:
        raise ValueError("need target >= 0, rate > 0, hold >= 0")
    ramp = target / rate
    seg = Segment("force_ramp", ramp + hold, {"target": float(target), "rate": float(rate)}, measure=True, label="ramp")
    return TrajectoryProgram([seg], start)


def circle_program(center, radius: float, plane: str = "xy", period: float = 60.0, reachable=None) -> TrajectoryProgram:
    """One closed circle of ``radius`` around ``center`` in a named plane.

    ``reachable(point) -> bool`` (optional) is checked at 16 points around the
    circle; a failure raises :class:`Unreachable`.
    """
    if radius <= 0 or period <= 0:
        raise ValueError("radius and period must be positive")
    if plane not in PLANE_NORMALS:
        raise ValueError(f"plane must be one of {sorted(PLANE_NORMALS)}")
    n, e1 = _plane_axes({"plane": plane})
    center = np.asarray(center, dtype=float)
    start = center + radius * e1
    prog = TrajectoryProgram([Segment("circle", period, {"radius": radius, "plane": plane}, measure=True, label=plane)], start)
    if reachable is not None:
        for t in np.linspace(0.0, period, 17)[:-1]:
            p = prog.evaluate(t).position
            if not reachable(p):
                raise Unreachable(f"circle point {np.round(p, 4).tolist()} is outside the workspace")
    return prog


def line_program(start, moves, durations, measure: bool = True) -> TrajectoryProgram:
    segs = [Segment("line", float(d), {"delta": list(map(float, m))}, measure=measure, label="line")
            for m, d in zip(moves, durations)]
    return TrajectoryProgram(segs, start)


LINEAR_MOVES = {
    "x_axis": [(0.5, 0, 0), (-1.0, 0, 0), (0.5, 0, 0)],
    "y_axis": [(0, 0.35, 0), (0, -0.7, 0), (0, 0.35, 0)],
    "z_axis": [(0, 0, 0.5), (0, 0, -0.5)],
}
SUITE_ROWS = ("x_axis", "y_axis", "z_axis", "xy", "yz", "xz", "oblique")


def manipulation_suite_segments(name: str, speed: float = 0.018, radius: float = 0.2,
                                grasp_force: float = 30.0, rate: float = 10.0,
                                profile: str = "trapezoid") -> list[Segment]:
    """Grasp, run one of the seven suite trajectories at mean ``speed`` m/s, settle.

    The carry segments are the measured windows.
    """
    segs = [Segment("grasp", grasp_force / rate + 3.0,
                    {"object": 0, "force": grasp_force, "rate": rate, "close_time": 2.0}, label="grasp"),
            Segment("hold", 2.0, label="settle")]
    if name in LINEAR_MOVES:
        for m in LINEAR_MOVES[name]:
            d = float(np.linalg.norm(m)) / speed
            segs.append(Segment("line", round(d, 6), {"delta": list(map(float, m)), "profile": profile},
                                measure=True, label=name))
    elif name in PLANE_NORMALS:
        period = 2.0 * math.pi * radius / speed
        segs.append(Segment("circle", round(period, 6), {"radius": radius, "plane": name, "profile": profile},
                            measure=True, label=name))
    else:
        raise ValueError(f"unknown suite trajectory {name!r}")
    segs.append(Segment("hold", 2.0, measure=True, label="settle"))
    return segs


def octahedron_two_box_program(start=(0.0, -0.25, 0.6), box_offset=(0.0, 0.0, -0.17), approach_gap: float = 0.1,
                               grasp_force: float = 12.0, rate: float = 10.0) -> TrajectoryProgram:
    """Two-box pick-and-stack sequence for the octahedron's internal grasp pair.

    ``start`` is the open grasp midpoint at the home pose; the first move
    brings it to ``start + box_offset``, the pre-grasp pose of box 1.
    """
    off = np.asarray(box_offset, dtype=float)
    grasp = {"force": grasp_force, "rate": rate, "close_time": 3.0}
    segs = [
        Segment("line", 30.0, {"delta": off.tolist()}, label="approach_box1"),
        Segment("grasp", 10.0, {"object": 0, **grasp}, label="grasp_box1"),
        Segment("line", 10.0, {"delta": [0.0, 0.0, 0.08]}, measure=True, label="lift_box1"),
        Segment("line", 52.0, {"delta": [0.0, 0.5, 0.0]}, measure=True, label="carry_box1"),
        Segment("line", 42.5, {"delta": [0.0, 0.0, -0.4]}, measure=True, label="lower_box1"),
        Segment("release", 6.0, {"gap": approach_gap}, label="release_box1"),
        Segment("line", 62.5, {"delta": [0.0, -0.5, 0.12]}, label="return"),
        Segment("grasp", 10.0, {"object": 1, **grasp}, label="grasp_box2"),
        Segment("line", 8.5, {"delta": [0.0, 0.0, 0.1]}, measure=True, label="lift_box2"),
        Segment("line", 52.5, {"delta": [0.0, 0.5, 0.0]}, measure=True, label="carry_box2"),
        Segment("release", 6.0, {"gap": approach_gap}, label="release_box2"),
    ]
    return TrajectoryProgram(segs, start, gap=approach_gap)
