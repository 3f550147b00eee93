"""Closed-loop quasi-static world.

Members are rigid length sources.  Each tick the actuators move, node
positions are re-solved from the new lengths, contacts are evaluated, and the
true member forces follow from static equilibrium of the free nodes::

    J_free.T @ lam = W_free + R_free          (R: contact reactions on nodes)

Over-constrained structures add the self-stress ``k_ax * (l - L)`` of the
least-squares length misfit, which lies in the null space of ``J_free.T``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..actuator import ActuatorModel, ActuatorState, PiGains, advance
from ..errors import SimDiverged
from ..statics import PINV_RCOND
from ..truss import TrussTopology, forward_lengths, inverse_jacobian
from .contact import GraspState, GraspStatus, Pad, RigidObject, Wall, grasp_update
from .solver import SolverConfig, solve_positions

# a removable pedestal is taken away once friction could carry this multiple of the load
PEDESTAL_GRIP_MARGIN = 2.0


@dataclass(frozen=True)
class World:
    topology: TrussTopology
    model: ActuatorModel
    gains: PiGains
    loads: np.ndarray  # (N, 3) gravity on nodes
    walls: tuple[Wall, ...] = ()
    objects: tuple[RigidObject, ...] = ()
    pads: tuple[Pad, ...] = ()
    grasp_nodes: tuple[int, int] | None = None
    grasp_axis: int = 1
    contact_stiffness: float = 5.0e4
    node_radius: float = 0.03
    slip_speed: float = 0.05
    solver: SolverConfig = field(default_factory=SolverConfig)
    dt: float = 0.01


@dataclass(frozen=True)
class ObjectState:
    position: np.ndarray
    grasp: GraspState


@dataclass(frozen=True)
class SimState:
    time: float
    positions: np.ndarray
    actuators: ActuatorState
    member_forces: np.ndarray  # true (noise-free) forces, N, tension positive
    wall_forces: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objects: tuple[ObjectState, ...] = ()
    pads_active: tuple[bool, ...] = ()
    iterations: int = 0


def equilibrium_forces(topology: TrussTopology, P, rest_lengths, node_loads, k_ax: float, J=None) -> np.ndarray:
    """Member forces balancing ``node_loads`` (gravity plus contact reactions) at the free nodes."""
    if J is None:
        J = inverse_jacobian(topology, P)
    cols = topology.free_coords
    lam = np.zeros(topology.member_count)
    if cols.size:
        A = J[:, cols].T
        rhs = np.asarray(node_loads, dtype=float).ravel()[cols]
        lam = np.linalg.lstsq(A, rhs, rcond=PINV_RCOND)[0]
    active = topology.active_members
    misfit = forward_lengths(topology, P) - np.asarray(rest_lengths, dtype=float)
    lam[active] += k_ax * misfit[active]
    lam[~active] = 0.0
    return lam


def _supports(world: World, objects, pads_active, skip: int):
    out = [(pad.covers, pad.top) for pad, on in zip(world.pads, pads_active) if on]
    for idx, (obj, st) in enumerate(zip(world.objects, objects)):
        if idx == skip:
            continue
        c, h = st.position, obj.half_extents
        out.append((lambda xy, c=c, h=h: abs(xy[0] - c[0]) <= h[0] and abs(xy[1] - c[1]) <= h[1], c[2] + h[2]))
    return out


def contact_loads(world: World, state: SimState, P, engaged, dt: float):
    """Contact reactions on nodes, wall readings and updated object states."""
    R = np.zeros((world.topology.node_count, 3))
    wall_forces = np.zeros(len(world.walls))
    for w_idx, wall in enumerate(world.walls):
        for k in wall.nodes:
            pen = wall.penetration(P[k], world.node_radius)
            if pen > 0.0:
                f = wall.stiffness * pen
                R[k] += f * wall.normal
                wall_forces[w_idx] += f
    objects = list(state.objects)
    pads_active = list(state.pads_active)
    for idx, obj in enumerate(world.objects):
        st = objects[idx]
        grasp, pos, loads = grasp_update(
            st.grasp, P, obj, st.position, dt, engaged=bool(engaged[idx]),
            supports=_supports(world, objects, pads_active, idx),
            stiffness=world.contact_stiffness, radius=world.node_radius, slip_speed=world.slip_speed,
        )
        firm = obj.mu * float(np.min(grasp.normal_forces)) >= PEDESTAL_GRIP_MARGIN * 0.5 * obj.weight
        if grasp.status == GraspStatus.GRASPED and firm:
            for p_idx, pad in enumerate(world.pads):
                if pad.removable and pads_active[p_idx] and pad.covers(pos[:2]):
                    pads_active[p_idx] = False
        for k, f in loads.items():
            R[k] += f
        objects[idx] = ObjectState(pos, grasp)
    return R, wall_forces, tuple(objects), tuple(pads_active)


def initial_state(world: World, P0, rng: np.random.Generator | None = None, object_positions=()) -> SimState:
    """Settled state at ``P0``: actuator lengths equal the geometric lengths."""
    topo = world.topology
    P0 = np.asarray(P0, dtype=float).reshape(-1, 3)
    lengths = forward_lengths(topo, P0)
    objects = tuple(
        ObjectState(np.asarray(pos, dtype=float), GraspState(tuple(world.grasp_nodes), world.grasp_axis))
        for pos in object_positions
    ) if world.grasp_nodes is not None else ()
    state = SimState(0.0, P0, ActuatorState(length=lengths.copy(), measured_force=np.zeros_like(lengths),
                                           integrator=np.zeros_like(lengths), commanded_force=np.zeros_like(lengths),
                                           saturated=np.zeros_like(lengths, dtype=bool)),
                     np.zeros_like(lengths), np.zeros(len(world.walls)), objects, tuple(True for _ in world.pads))
    R, wall_forces, objects, pads = contact_loads(world, state, P0, [False] * len(objects), 0.0)
    lam = equilibrium_forces(topo, P0, lengths, world.loads + R, world.model.k_ax)
    measured = lam + _noise(world, rng, lam.size)
    acts = replace(state.actuators, measured_force=measured, commanded_force=lam.copy())
    return replace(state, actuators=acts, member_forces=lam, wall_forces=wall_forces, objects=objects, pads_active=pads)


def _noise(world: World, rng, size):
    if rng is None or world.model.loadcell_noise_sd <= 0:
        return np.zeros(size)
    return rng.normal(0.0, world.model.loadcell_noise_sd, size=size)


def tick(world: World, state: SimState, lam_cmd, rng: np.random.Generator | None = None,
         engaged=None, dt: float | None = None) -> SimState:
    """Advance the closed loop by one low-level period.

    ``lam_cmd`` holds one command per member; NaN entries (and members between
    two anchors) keep their current length.
    """
    dt = world.dt if dt is None else dt
    topo = world.topology
    lam_cmd = np.asarray(lam_cmd, dtype=float)
    engaged = [False] * len(world.objects) if engaged is None else engaged

    acts = state.actuators
    driven = topo.active_members & np.isfinite(lam_cmd)
    cmd = np.where(driven, lam_cmd, acts.measured_force)
    stepped = advance(acts, cmd, dt, world.model, world.gains)
    acts = replace(
        stepped,
        length=np.where(driven, stepped.length, acts.length),
        integrator=np.where(driven, stepped.integrator, acts.integrator),
        saturated=np.where(driven, stepped.saturated, False),
        commanded_force=np.where(driven, lam_cmd, np.nan),
    )

    sol = solve_positions(topo, acts.length, state.positions, config=world.solver, check_rank=False)
    P = sol.positions
    jump = float(np.max(np.abs(P - state.positions))) if P.size else 0.0
    if jump > world.solver.step_limit:
        raise SimDiverged(f"node moved {jump:.3f} m in one tick at t={state.time:.2f} s")

    R, wall_forces, objects, pads = contact_loads(world, state, P, engaged, dt)
    lam = equilibrium_forces(topo, P, acts.length, world.loads + R, world.model.k_ax)
    measured = lam + _noise(world, rng, lam.size)
    acts = replace(acts, measured_force=measured)
    return SimState(state.time + dt, P, acts, lam, wall_forces, objects, pads, sol.iterations)
