"""Penalty contacts: node-wall pushes and two-node friction grasps of boxes.

Boxes keep a fixed orientation and translate only.  A grasped box follows
the midpoint of its two grasp nodes (quasi-static, no inertia); it is held by
friction as long as the weight share of each contact stays inside the
friction cone ``mu * N``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from ..statics import GRAVITY


class GraspStatus(str, enum.Enum):
    FREE = "free"
    GRASPED = "grasped"
    SLIPPING = "slipping"
    DROPPED = "dropped"


@dataclass(frozen=True)
class Wall:
    """Flat load-cell plate; ``normal`` points from the plate toward the robot."""

    point: np.ndarray
    normal: np.ndarray
    nodes: tuple[int, ...]
    stiffness: float = 5.0e4
    name: str = "wall"

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        object.__setattr__(self, "normal", n / np.linalg.norm(n))
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float))
        object.__setattr__(self, "nodes", tuple(int(k) for k in self.nodes))

    def penetration(self, p, radius: float) -> float:
        return max(0.0, radius - float((np.asarray(p) - self.point) @ self.normal))


@dataclass(frozen=True)
class RigidObject:
    half_extents: np.ndarray
    mass: float
    mu: float = 0.8
    name: str = "box"

    def __post_init__(self):
        object.__setattr__(self, "half_extents", np.asarray(self.half_extents, dtype=float).reshape(3))
        if self.mass <= 0 or self.mu < 0 or np.any(self.half_extents <= 0):
            raise ValueError("object needs positive mass and extents and mu >= 0")

    @property
    def weight(self) -> float:
        return self.mass * GRAVITY


@dataclass(frozen=True)
class Pad:
    """Static support surface: an axis-aligned footprint at height ``top``."""

    center: tuple[float, float]
    half_size: tuple[float, float]
    top: float
    removable: bool = False  # disappears once the object resting on it is grasped

    def covers(self, xy) -> bool:
        return (abs(xy[0] - self.center[0]) <= self.half_size[0] + 1e-12
                and abs(xy[1] - self.center[1]) <= self.half_size[1] + 1e-12)


@dataclass(frozen=True)
class GraspState:
    nodes: tuple[int, int]
    axis: int
    status: GraspStatus = GraspStatus.FREE
    normal_forces: np.ndarray = field(default_factory=lambda: np.zeros(2))
    normals: np.ndarray = field(default_factory=lambda: np.zeros((2, 3)))
    offset: np.ndarray = field(default_factory=lambda: np.zeros(3))  # box centre minus grasp midpoint
    supported: bool = True

    @property
    def held(self) -> bool:
        return self.status in (GraspStatus.GRASPED, GraspStatus.SLIPPING)


# a support counts when its top lies no more than this far above the box bottom
SUPPORT_TOLERANCE = 0.01


def support_height(xy, supports, bottom: float = np.inf) -> float:
    """Highest support top under ``xy`` not above ``bottom``; the ground is at z = 0."""
    tops = [top for covers, top in supports if covers(xy) and top <= bottom + SUPPORT_TOLERANCE]
    return max([0.0] + tops)


def _contact(p, center, obj: RigidObject, axis: int, radius: float, stiffness: float):
    d = np.asarray(p) - center
    along = d[axis]
    others = [a for a in range(3) if a != axis]
    n = np.zeros(3)
    n[axis] = -1.0 if along >= 0 else 1.0  # from node toward the box
    if any(abs(d[a]) > obj.half_extents[a] for a in others):
        return 0.0, n
    pen = radius + obj.half_extents[axis] - abs(along)
    return stiffness * max(pen, 0.0), n


def grasp_update(grasp: GraspState, positions, obj: RigidObject, obj_pos, dt: float, *, engaged: bool,
                 supports=(), stiffness: float = 5.0e4, radius: float = 0.03, slip_speed: float = 0.05):
    """Advance one grasp by ``dt``.

    Returns ``(grasp, object_position, loads)`` where ``loads`` maps each
    grasp node to the force the box applies to it.  ``supports`` is a
    sequence of ``(covers(xy) -> bool, top_z)`` pairs the box can rest on.
    """
    a, b = grasp.nodes
    P = np.asarray(positions)
    pa, pb = P[a], P[b]
    h = obj.half_extents
    mid = 0.5 * (pa + pb)
    status = grasp.status
    offset = grasp.offset.copy()

    if grasp.held:
        o = mid + offset
        o[grasp.axis] = mid[grasp.axis]
        floor = support_height(o[:2], supports, o[2] - h[2])
        supported = o[2] - h[2] <= floor + 1e-9
        if supported:
            o[2] = floor + h[2]
            offset = o - mid
    else:
        o = np.array(obj_pos, dtype=float)
        o[2] = support_height(o[:2], supports, o[2] - h[2]) + h[2]
        supported = True

    Na, na = _contact(pa, o, obj, grasp.axis, radius, stiffness)
    Nb, nb = _contact(pb, o, obj, grasp.axis, radius, stiffness)
    lifted_demand = 0.5 * obj.weight
    demand = 0.0 if supported else lifted_demand
    grip = obj.mu * min(Na, Nb)
    touching = Na > 0.0 and Nb > 0.0

    if status in (GraspStatus.FREE,):
        # a box resting on its support puts no tangential demand on the contacts
        if engaged and touching and (supported or lifted_demand <= grip):
            status = GraspStatus.GRASPED
            offset = o - mid
            offset[grasp.axis] = 0.0
    elif status == GraspStatus.GRASPED:
        if not touching:
            # a box still resting on its support is merely let go of
            status = GraspStatus.SLIPPING if engaged and not supported else GraspStatus.FREE
        elif demand > grip:
            status = GraspStatus.SLIPPING
    elif status == GraspStatus.SLIPPING:
        if not touching:
            status = GraspStatus.DROPPED if engaged else GraspStatus.FREE
        elif lifted_demand <= grip:
            status = GraspStatus.GRASPED
        elif not supported:
            offset[2] -= slip_speed * dt

    held_now = status in (GraspStatus.GRASPED, GraspStatus.SLIPPING)
    if not held_now and grasp.held:
        o[2] = support_height(o[:2], supports, o[2] - h[2]) + h[2]
        supported = True
        demand = 0.0

    loads = {a: -Na * na, b: -Nb * nb}
    if held_now and not supported:
        for node, N in ((a, Na), (b, Nb)):
            friction = 0.5 * obj.weight if status == GraspStatus.GRASPED else min(0.5 * obj.weight, obj.mu * N)
            loads[node] = loads[node] + np.array([0.0, 0.0, -friction])

    new = replace(grasp, status=status, normal_forces=np.array([Na, Nb]), normals=np.vstack([na, nb]),
                  offset=offset, supported=bool(supported))
    return new, o, loads
