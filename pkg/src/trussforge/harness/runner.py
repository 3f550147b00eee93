"""Closed-loop execution of a scenario: controller at the high-level rate,
actuators and world at the low-level rate, commands zero-order held."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..controller import HybridCommand, Target, compute_member_commands
from ..errors import NoConvergence, SimDiverged, UnderConstrained
from ..scenarios.loader import Scenario
from ..sim.contact import GraspStatus
from ..sim.world import SimState, initial_state, tick
from ..truss import inverse_jacobian

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_DROPPED = 4

STATUS_CODES = {GraspStatus.FREE: 0, GraspStatus.GRASPED: 1, GraspStatus.SLIPPING: 2, GraspStatus.DROPPED: 3}
PHASE_CODES = {"none": 0, "move": 1, "ramp": 2, "hold": 3}


@dataclass
class RunResult:
    scenario: Scenario
    seed: int
    columns: list[str]
    rows: np.ndarray  # (samples, columns)
    exit_code: int = EXIT_OK
    error: str | None = None
    final_state: SimState | None = None
    events: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]


def trace_columns(scn: Scenario) -> list[str]:
    topo = scn.world.topology
    cols = ["time_s", "segment", "phase", "measure", "force_setpoint_N"]
    cols += [f"ref_des_{a}_m" for a in "xyz"] + [f"ref_act_{a}_m" for a in "xyz"]
    for k in range(topo.node_count):
        cols += [f"node{k}_des_{a}_m" for a in "xyz"] + [f"node{k}_act_{a}_m" for a in "xyz"]
    for m in range(topo.member_count):
        cols += [f"member{m}_cmd_N", f"member{m}_force_N", f"member{m}_length_m"]
    for i, w in enumerate(scn.world.walls):
        cols.append(f"wall{i}_force_N")
    for i in range(len(scn.world.objects)):
        cols += [f"obj{i}_status", f"obj{i}_normal_a_N", f"obj{i}_normal_b_N"] + [f"obj{i}_{a}_m" for a in "xyz"]
    return cols


def _desired_nodes(scn: Scenario, sp, P0):
    """Per-node desired positions and desired forces for the target nodes."""
    des = P0.copy()
    forces = {}
    if scn.mode == "grasp":
        a, b = scn.target_nodes
        ax = scn.world.grasp_axis
        obj_idx = sp.engaged if sp.engaged is not None else 0
        obj = scn.world.objects[min(obj_idx, len(scn.world.objects) - 1)]
        e = np.zeros(3)
        e[ax] = 1.0
        reach = scn.world.node_radius + obj.half_extents[ax] + sp.gap
        des[a] = sp.position - reach * e
        des[b] = sp.position + reach * e
        forces[a] = sp.force * e
        forces[b] = -sp.force * e
    else:
        k = scn.target_nodes[0]
        des[k] = sp.position
        forces[k] = sp.force * scn.force_direction
    return des, forces


def _reference(scn: Scenario, P):
    if scn.mode == "grasp":
        a, b = scn.target_nodes
        return 0.5 * (P[a] + P[b])
    return P[scn.target_nodes[0]]


def _payload_loads(scn: Scenario, state: SimState):
    extra = {}
    for obj, st in zip(scn.world.objects, state.objects):
        if st.grasp.held and not st.grasp.supported:
            for k in st.grasp.nodes:
                extra[k] = extra.get(k, 0.0) + np.array([0.0, 0.0, -0.5 * obj.weight])
    return extra


def run(scn: Scenario, seed: int | None = None, deterministic: bool = False) -> RunResult:
    """Execute ``scn`` to completion and return its decimated trace."""
    seed = scn.seed if seed is None else int(seed)
    world = scn.world
    if deterministic:
        from dataclasses import replace
        world = replace(world, model=replace(world.model, loadcell_noise_sd=0.0))
    rng = np.random.default_rng(seed)
    topo = world.topology
    P0 = scn.initial_positions
    state = initial_state(world, P0, rng, scn.object_positions)
    holds = {k: P0[k].copy() for k in topo.free_nodes if k not in scn.target_nodes}

    dt = world.dt
    ratio = int(round(scn.high_level_dt / dt))
    n_ticks = int(round(scn.program.duration / dt))
    cols = trace_columns(scn)
    rows = []
    lam_cmd = np.full(topo.member_count, np.nan)
    des_nodes = P0.copy()
    sp = scn.program.evaluate(0.0)
    statuses = [STATUS_CODES[o.grasp.status] for o in state.objects]
    events = []
    exit_code, error = EXIT_OK, None

    def record(i):
        t = i * dt
        P = state.positions
        ref = _reference(scn, P)
        row = [t, sp.segment, PHASE_CODES.get(sp.phase, 0), float(sp.measure), sp.force]
        row += list(sp.position) + list(ref)
        for k in range(topo.node_count):
            row += list(des_nodes[k]) + list(P[k])
        acts = state.actuators
        for m in range(topo.member_count):
            row += [lam_cmd[m], acts.measured_force[m], acts.length[m]]
        row += list(state.wall_forces)
        for st in state.objects:
            row += [STATUS_CODES[st.grasp.status], st.grasp.normal_forces[0], st.grasp.normal_forces[1]]
            row += list(st.position)
        rows.append(row)

    for i in range(n_ticks + 1):
        if i % ratio == 0:
            sp = scn.program.evaluate(i * dt)
            des_nodes, forces = _desired_nodes(scn, sp, P0)
            targets = tuple(Target(k, des_nodes[k], forces[k]) for k in scn.target_nodes)
            cmd = HybridCommand(targets, scn.k_pos, holds, _payload_loads(scn, state))
            J = inverse_jacobian(topo, state.positions)
            lam_cmd = compute_member_commands(topo, J, cmd, world.loads, state.positions, time=i * dt,
                                              force_limit=world.model.force_limit).as_array(topo.member_count)
        if i % scn.trace_decimation == 0:
            record(i)
        if i == n_ticks:
            break
        engaged = [sp.engaged == j for j in range(len(world.objects))]
        try:
            state = tick(world, state, lam_cmd, rng, engaged)
        except (SimDiverged, NoConvergence, UnderConstrained) as exc:
            exit_code, error = EXIT_DIVERGED, f"{type(exc).__name__}: {exc}"
            log.error("run diverged: %s", error)
            break
        new = [STATUS_CODES[o.grasp.status] for o in state.objects]
        for j, (old, cur) in enumerate(zip(statuses, new)):
            if old != cur:
                events.append({"time_s": round((i + 1) * dt, 10), "object": j,
                               "status": state.objects[j].grasp.status.value})
                log.info("t=%.2f s object %d -> %s", (i + 1) * dt, j, state.objects[j].grasp.status.value)
        statuses = new
        if scn.grasp_required and any(s == STATUS_CODES[GraspStatus.DROPPED] for s in new):
            exit_code, error = EXIT_DROPPED, "grasp dropped"
            log.error("object dropped at t=%.2f s", (i + 1) * dt)
            if (i + 1) % scn.trace_decimation != 0:
                i += 1
                record(i)
            break
    return RunResult(scn, seed, cols, np.asarray(rows, dtype=float), exit_code, error, state, events)
