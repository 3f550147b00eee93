"""Truss graph and kinematics.

Positions are stacked as an ``(N, 3)`` array (row ``k`` is node ``k``), the
flattened ``3N`` vector uses the same order.  Member ``m`` joining nodes
``(i, j)`` contributes row ``m`` of the inverse Jacobian, which maps stacked
node velocities to member length rates::

    dL/dt = J @ dP/dt,   J[m, 3i:3i+3] = (p_i - p_j) / l_m,   J[m, 3j:3j+3] = -J[m, 3i:3i+3]

Row order of ``J`` and of every per-member vector follows the member list.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import AnchorNode, DegenerateMember, DimensionMismatch, InvalidTopology

EPS_LEN = 1e-9  # m; below this a member has no usable direction


@dataclass(frozen=True)
class TrussTopology:
    """Nodes, members and ground constraints of a truss.

    ``anchors`` are nodes fixed to the ground.  ``guides`` maps a node to the
    world axes along which it may move (a slider on a test fixture, for
    example); nodes in neither set are free in all three axes.
    """

    node_count: int
    members: tuple[tuple[int, int], ...]
    anchors: frozenset[int] = frozenset()
    guides: tuple[tuple[int, tuple[int, ...]], ...] = ()
    labels: dict[int, str] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        members = tuple((int(i), int(j)) for i, j in self.members)
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "anchors", frozenset(int(a) for a in self.anchors))
        guides = tuple(sorted((int(k), tuple(sorted(int(a) for a in axes))) for k, axes in dict(self.guides).items()))
        object.__setattr__(self, "guides", guides)

        n = self.node_count
        if n < 1:
            raise InvalidTopology("a truss needs at least one node")
        seen = set()
        for m, (i, j) in enumerate(members):
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidTopology(f"member {m} references a node outside 0..{n - 1}")
            if i == j:
                raise InvalidTopology(f"member {m} is a self-loop on node {i}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise InvalidTopology(f"duplicate member between nodes {key}")
            seen.add(key)
        for a in self.anchors:
            if not 0 <= a < n:
                raise InvalidTopology(f"anchor {a} is not a node")
        for k, axes in guides:
            if not 0 <= k < n or k in self.anchors:
                raise InvalidTopology(f"guided node {k} must be a non-anchored node")
            if not axes or any(a not in (0, 1, 2) for a in axes):
                raise InvalidTopology(f"guided node {k} has invalid axes {axes}")

    @property
    def member_count(self) -> int:
        return len(self.members)

    @cached_property
    def incidence(self) -> tuple[tuple[int, ...], ...]:
        """``incidence[k]`` is the ascending tuple of member ids touching node ``k``."""
        inc = [[] for _ in range(self.node_count)]
        for m, (i, j) in enumerate(self.members):
            inc[i].append(m)
            inc[j].append(m)
        return tuple(tuple(e) for e in inc)

    @cached_property
    def free_nodes(self) -> tuple[int, ...]:
        return tuple(k for k in range(self.node_count) if k not in self.anchors)

    @cached_property
    def free_axes(self) -> dict[int, tuple[int, ...]]:
        axes = {k: (0, 1, 2) for k in self.free_nodes}
        axes.update(dict(self.guides))
        return axes

    @cached_property
    def free_coords(self) -> np.ndarray:
        """Indices into the flattened ``3N`` position vector that are free to move."""
        idx = [3 * k + a for k in self.free_nodes for a in self.free_axes[k]]
        return np.array(idx, dtype=int)

    @cached_property
    def active_members(self) -> np.ndarray:
        """Boolean mask of members with at least one non-anchored end."""
        return np.array([not (i in self.anchors and j in self.anchors) for i, j in self.members], dtype=bool)

    @cached_property
    def _ends(self) -> tuple[np.ndarray, np.ndarray]:
        arr = np.array(self.members, dtype=int).reshape(-1, 2)
        return arr[:, 0].copy(), arr[:, 1].copy()

    def is_free(self, k: int) -> bool:
        return 0 <= k < self.node_count and k not in self.anchors

    def neighbors(self, k: int) -> tuple[int, ...]:
        return tuple(j if i == k else i for i, j in (self.members[m] for m in self.incidence[k]))


def as_positions(P, node_count: int | None = None) -> np.ndarray:
    """Return ``P`` as a float ``(N, 3)`` array, accepting the flat ``3N`` form too."""
    arr = np.asarray(P, dtype=float)
    if arr.ndim == 1:
        if arr.size % 3:
            raise DimensionMismatch(f"flat position vector has length {arr.size}, not a multiple of 3")
        arr = arr.reshape(-1, 3)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise DimensionMismatch(f"positions must be (N, 3), got {arr.shape}")
    if node_count is not None and arr.shape[0] != node_count:
        raise DimensionMismatch(f"expected {node_count} nodes, got {arr.shape[0]}")
    return arr


def member_length(p_i, p_j) -> float:
    p_i = np.asarray(p_i, dtype=float)
    p_j = np.asarray(p_j, dtype=float)
    if not (np.all(np.isfinite(p_i)) and np.all(np.isfinite(p_j))):
        raise ValueError("node positions must be finite")
    length = float(np.linalg.norm(p_i - p_j))
    if length < EPS_LEN:
        raise DegenerateMember(None, length)
    return length


def _member_vectors(topology: TrussTopology, P) -> tuple[np.ndarray, np.ndarray]:
    P = as_positions(P, topology.node_count)
    i, j = topology._ends
    d = P[i] - P[j]
    lengths = np.sqrt(np.einsum("ij,ij->i", d, d))
    if lengths.size and lengths.min() < EPS_LEN:
        m = int(np.argmin(lengths))
        raise DegenerateMember(m, float(lengths[m]))
    return d, lengths


def forward_lengths(topology: TrussTopology, P) -> np.ndarray:
    """Member lengths ``L = f(P)`` in member-list order."""
    return _member_vectors(topology, P)[1]


def inverse_jacobian(topology: TrussTopology, P) -> np.ndarray:
    """Dense ``M x 3N`` matrix of member direction cosines (``dL = J dP``)."""
    d, lengths = _member_vectors(topology, P)
    u = d / lengths[:, None]
    M = topology.member_count
    J = np.zeros((M, topology.node_count, 3))
    rows = np.arange(M)
    i, j = topology._ends
    J[rows, i] = u
    J[rows, j] = -u
    return J.reshape(M, 3 * topology.node_count)


def node_submatrix(J: np.ndarray, topology: TrussTopology, k: int) -> np.ndarray:
    """Rows of ``J`` for members incident to node ``k``, restricted to its 3 columns."""
    if k in topology.anchors:
        raise AnchorNode(k)
    if not 0 <= k < topology.node_count:
        raise IndexError(f"node {k} out of range")
    J = np.asarray(J)
    if J.shape != (topology.member_count, 3 * topology.node_count):
        raise DimensionMismatch(f"J has shape {J.shape}, topology needs {(topology.member_count, 3 * topology.node_count)}")
    return J[np.array(topology.incidence[k], dtype=int)][:, 3 * k:3 * k + 3]
