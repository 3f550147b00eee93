"""High-level hybrid position/force law and its member-force mapping."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AnchorNode, SharedMemberConflict
from .statics import PINV_RCOND, allocate_member_forces
from .truss import TrussTopology, as_positions


@dataclass(frozen=True)
class Target:
    node: int
    position: np.ndarray  # desired node position, m
    force: np.ndarray  # desired force applied to the environment, N

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "force", np.asarray(self.force, dtype=float).reshape(3))


@dataclass(frozen=True)
class HybridCommand:
    """Targets for the controlled nodes plus the shared stiffness gain.

    ``holds`` optionally pins other free nodes to a position with the same
    stiffness; free nodes without a hold entry are only gravity compensated.
    ``extra_loads`` are known external loads per node (a grasped payload) that
    the allocation compensates on top of the structure's own weight.
    """

    targets: tuple[Target, ...]
    k_pos: float = 800.0
    holds: dict[int, np.ndarray] = field(default_factory=dict)
    extra_loads: dict[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if self.k_pos < 0:
            raise ValueError("k_pos must be non-negative")


@dataclass(frozen=True)
class MemberCommandSet:
    commands: dict[int, float]
    time: float = 0.0

    def as_array(self, member_count: int, fill=np.nan) -> np.ndarray:
        out = np.full(member_count, fill, dtype=float)
        for m, lam in self.commands.items():
            out[m] = lam
        return out


def hybrid_nodal_command(P_des, P_curr, F_des, k_pos: float) -> np.ndarray:
    """Commanded nodal force: desired force plus stiffness times position error."""
    P_des = np.asarray(P_des, dtype=float)
    P_curr = np.asarray(P_curr, dtype=float)
    F_des = np.asarray(F_des, dtype=float)
    return F_des + k_pos * (P_des - P_curr)


def argmax_direction_invariance_check(target: Target, P_curr, k_pos: float, s: float, tol: float = 1e-12) -> bool:
    """True when scaling both the desired force and ``k_pos`` by ``s`` scales the command by ``s``."""
    if s <= 0:
        raise ValueError("scale must be positive")
    base = hybrid_nodal_command(target.position, P_curr, target.force, k_pos)
    scaled = hybrid_nodal_command(target.position, P_curr, s * target.force, s * k_pos)
    scale = max(np.linalg.norm(scaled), 1.0)
    return bool(np.linalg.norm(scaled - s * base) <= tol * scale)


def check_targets(topology: TrussTopology, command: HybridCommand) -> None:
    owner: dict[int, int] = {}
    for tgt in command.targets:
        if tgt.node in topology.anchors:
            raise AnchorNode(tgt.node)
        for m in topology.incidence[tgt.node]:
            if m in owner and owner[m] != tgt.node:
                raise SharedMemberConflict(m, (owner[m], tgt.node))
            owner[m] = tgt.node


def compute_member_commands(topology: TrussTopology, J, command: HybridCommand, W, P_curr,
                            time: float = 0.0, force_limit: float | None = None) -> MemberCommandSet:
    """Member force commands realizing ``command`` at the current state.

    Every target node gets its own pseudoinverse allocation of the hybrid
    command force.  Members not owned by a target but touching another free
    node are solved jointly over those remaining nodes, treating the target
    members' commands as known loads; members between two anchors are not
    commanded.
    """
    check_targets(topology, command)
    P = as_positions(P_curr, topology.node_count)
    W = as_positions(W, topology.node_count)
    J = np.asarray(J, dtype=float)
    extra = {k: np.asarray(v, dtype=float) for k, v in command.extra_loads.items()}

    commands: dict[int, float] = {}
    claimed = set()
    for tgt in command.targets:
        k = tgt.node
        F_cmd = hybrid_nodal_command(tgt.position, P[k], tgt.force, command.k_pos)
        W_k = W[k] + extra.get(k, 0.0)
        res = allocate_member_forces(topology, J, k, F_cmd, W_k, force_limit=force_limit, saturate=force_limit is not None)
        for m, lam in zip(res.members, res.forces):
            commands[m] = float(lam)
            claimed.add(m)

    target_nodes = {t.node for t in command.targets}
    rest = [k for k in topology.free_nodes if k not in target_nodes]
    if rest:
        free_members = [m for m in range(topology.member_count)
                        if m not in claimed and any(n in rest for n in topology.members[m])]
        if free_members:
            cols = np.concatenate([3 * k + np.array(topology.free_axes[k]) for k in rest])
            F_rest = np.zeros((topology.node_count, 3))
            for k in rest:
                F_rest[k] = W[k] + extra.get(k, 0.0)
                if k in command.holds:
                    F_rest[k] -= hybrid_nodal_command(command.holds[k], P[k], np.zeros(3), command.k_pos)
            rhs = F_rest.ravel()[cols]
            if claimed:
                cl = np.array(sorted(claimed), dtype=int)
                lam_c = np.array([commands[m] for m in cl])
                rhs = rhs - J[np.ix_(cl, cols)].T @ lam_c
            A = J[np.ix_(np.array(free_members), cols)].T
            lam_u = np.linalg.pinv(A, rcond=PINV_RCOND) @ rhs
            if force_limit is not None:
                lam_u = np.clip(lam_u, -force_limit, force_limit)
            for m, lam in zip(free_members, lam_u):
                commands[m] = float(lam)
    return MemberCommandSet(dict(sorted(commands.items())), float(time))
