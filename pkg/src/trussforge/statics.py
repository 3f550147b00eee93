"""Static force model of the truss.

Sign convention: a positive member force is *tension*, the member pulling its
two end nodes toward each other.  With ``J`` oriented as in
:mod:`trussforge.truss` (``dL = J dP``), a tension ``lam`` acts on the nodes
as ``-J.T @ lam``, so the force each node applies to its surroundings is::

    F = W - J.T @ lam

where ``W`` stacks the external loads carried by the nodes (gravity of the
node and half of each incident member).  Reading ``lam`` as a compression
(push) force instead turns this into the familiar ``F = J.T @ lam + W``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, ForceLimitExceeded
from .truss import TrussTopology, node_submatrix

GRAVITY = 9.81  # m/s^2
PINV_RCOND = 1e-10  # singular values below sigma_max * PINV_RCOND are dropped
DEFAULT_FORCE_LIMIT = 200.0  # N


class Constrainedness(str, enum.Enum):
    FULLY = "fully"
    OVER = "over"
    UNDER = "under"


@dataclass(frozen=True)
class AllocationResult:
    node: int
    members: tuple[int, ...]
    forces: np.ndarray
    residual: np.ndarray
    rank: int
    constrainedness: Constrainedness


def nodal_forces(J, lam, W) -> np.ndarray:
    """Stacked force each node applies to its surroundings, ``W - J.T @ lam``."""
    J = np.asarray(J, dtype=float)
    lam = np.asarray(lam, dtype=float).ravel()
    W = np.asarray(W, dtype=float).ravel()
    if J.ndim != 2 or J.shape[0] != lam.size or J.shape[1] != W.size:
        raise DimensionMismatch(f"J {J.shape}, lambda {lam.shape}, W {W.shape} do not agree")
    return W - J.T @ lam


def _rank(s: np.ndarray) -> int:
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > s[0] * PINV_RCOND))


def allocate_member_forces(topology: TrussTopology, J, k: int, F_des, W_k,
                           force_limit: float | None = None, saturate: bool = False) -> AllocationResult:
    """Member forces on node ``k``'s members that make it apply ``F_des``.

    Solves ``W_k - J_k.T @ lam_k = F_des`` with the Moore-Penrose
    pseudoinverse, which gives the exact solution when one exists, the
    minimum-norm one when the node is over-constrained, and the least-squares
    solution otherwise (``residual`` then holds the part of ``F_des`` the
    members cannot produce).

    With ``force_limit`` set, forces beyond the limit raise
    :class:`ForceLimitExceeded`, or are clipped when ``saturate`` is true.
    """
    J_k = node_submatrix(J, topology, k)
    F_des = np.asarray(F_des, dtype=float).reshape(3)
    W_k = np.asarray(W_k, dtype=float).reshape(3)
    A = J_k.T  # 3 x |E_k|
    s = np.linalg.svd(A, compute_uv=False)
    rank = _rank(s)
    lam = np.linalg.pinv(A, rcond=PINV_RCOND) @ (W_k - F_des)
    if force_limit is not None:
        over = np.flatnonzero(np.abs(lam) > force_limit)
        if over.size:
            if not saturate:
                m = topology.incidence[k][over[0]]
                raise ForceLimitExceeded(m, float(lam[over[0]]), force_limit)
            lam = np.clip(lam, -force_limit, force_limit)
    residual = (W_k - A @ lam) - F_des
    n_members = J_k.shape[0]
    if rank < 3:
        kind = Constrainedness.UNDER
    elif n_members == 3:
        kind = Constrainedness.FULLY
    else:
        kind = Constrainedness.OVER
    return AllocationResult(k, topology.incidence[k], lam, residual, rank, kind)


def gravity_loads(topology: TrussTopology, node_masses, member_masses, g: float = GRAVITY) -> np.ndarray:
    """``(N, 3)`` gravity loads: node mass plus half of every incident member."""
    node_masses = np.broadcast_to(np.asarray(node_masses, dtype=float), (topology.node_count,))
    member_masses = np.broadcast_to(np.asarray(member_masses, dtype=float), (topology.member_count,))
    if np.any(node_masses < 0) or np.any(member_masses < 0):
        raise ValueError("masses must be non-negative")
    carried = node_masses.copy()
    for m, (i, j) in enumerate(topology.members):
        carried[i] += 0.5 * member_masses[m]
        carried[j] += 0.5 * member_masses[m]
    W = np.zeros((topology.node_count, 3))
    W[:, 2] = -carried * g
    return W
