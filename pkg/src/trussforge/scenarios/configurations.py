"""Reference truss configurations.

Numbering (used by scenario files and reports):

``single_member``
    node 0 anchored at the origin, node 1 on a horizontal guide along +x
    (a bench test: gravity is carried by the guide).
``tetrahedron``
    nodes 0-2 anchored (equilateral base), node 3 apex.
``pyramid``
    nodes 0-3 anchored (square base), node 4 apex.
``double_tetrahedron``
    nodes 0-2 anchor tetrahedron A, node 3 its apex; nodes 4-6 anchor
    tetrahedron B, node 7 its apex.  Nodes 3 and 7 grasp along y.
``octahedron_internal``
    nodes 0-2 bottom face (anchored), 3-5 top face, 6 and 7 internal grasp
    nodes hung from the -x and +x sides.  Nodes 6 and 7 grasp along x.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ..actuator import ActuatorModel
from ..config import load_defaults
from ..errors import InvalidGeometry
from ..statics import PINV_RCOND
from ..truss import TrussTopology, forward_lengths, inverse_jacobian, node_submatrix


class ConfigurationId(str, enum.Enum):
    SINGLE_MEMBER = "single_member"
    TETRAHEDRON = "tetrahedron"
    PYRAMID = "pyramid"
    DOUBLE_TETRAHEDRON = "double_tetrahedron"
    OCTAHEDRON_INTERNAL = "octahedron_internal"


@dataclass(frozen=True)
class Configuration:
    id: ConfigurationId
    topology: TrussTopology
    positions: np.ndarray  # (N, 3) nominal node positions, m
    node_masses: np.ndarray  # kg
    member_masses: np.ndarray  # kg
    grasp_nodes: tuple[int, int] | None = None
    grasp_axis: int | None = None
    geometry: dict = field(default_factory=dict)

    @property
    def anchor_positions(self) -> dict[int, np.ndarray]:
        return {k: self.positions[k].copy() for k in sorted(self.topology.anchors)}

    @property
    def lengths(self) -> np.ndarray:
        return forward_lengths(self.topology, self.positions)


GEOMETRY_DEFAULTS = {
    ConfigurationId.SINGLE_MEMBER: {"length_m": 1.0},
    ConfigurationId.TETRAHEDRON: {"edge_m": 1.0},
    ConfigurationId.PYRAMID: {"edge_m": 1.0},
    ConfigurationId.DOUBLE_TETRAHEDRON: {
        "object_center_m": [0.0, 0.0, 0.7],
        "apex_offset_m": 0.14,  # |y| of each apex from the object centre
        "base_far_m": [0.8, 1.6],  # (|x|, |y|) of the two outer base nodes
        "base_near_y_m": 0.2,  # |y| of the inner base node
    },
    ConfigurationId.OCTAHEDRON_INTERNAL: {
        "edge_m": 2.0,
        "internal_nodes_m": [[-0.23, -0.25, 0.6], [0.23, -0.25, 0.6]],
    },
}


def _tetrahedron(a):
    base = np.array([[0.0, 0.0, 0.0], [a, 0.0, 0.0], [a / 2, a * math.sqrt(3) / 2, 0.0]])
    apex = base.mean(axis=0) + [0.0, 0.0, a * math.sqrt(2.0 / 3.0)]
    return np.vstack([base, apex])


def _octahedron(a):
    R = a / math.sqrt(3.0)
    H = a * math.sqrt(2.0 / 3.0)
    ang_bottom = np.radians([90.0, 210.0, 330.0])
    ang_top = np.radians([270.0, 30.0, 150.0])
    bottom = np.column_stack([R * np.cos(ang_bottom), R * np.sin(ang_bottom), np.zeros(3)])
    top = np.column_stack([R * np.cos(ang_top), R * np.sin(ang_top), np.full(3, H)])
    return np.vstack([bottom, top])


def build_configuration(config_id, overrides: dict | None = None, model: ActuatorModel | None = None,
                        masses: dict | None = None) -> Configuration:
    """Topology, nominal positions and masses of one reference configuration.

    ``overrides`` replaces entries of :data:`GEOMETRY_DEFAULTS`; every
    actuated member must fit within the actuator's length range.
    """
    cid = ConfigurationId(config_id)
    geo = dict(GEOMETRY_DEFAULTS[cid])
    unknown = set(overrides or {}) - set(geo)
    if unknown:
        raise InvalidGeometry(f"unknown geometry keys for {cid.value}: {sorted(unknown)}")
    geo.update(overrides or {})
    model = model or ActuatorModel.from_config()
    m_cfg = load_defaults()["masses"]
    m_cfg.update(masses or {})

    grasp_nodes = grasp_axis = None
    labels: dict[int, str] = {}
    guides = ()
    if cid == ConfigurationId.SINGLE_MEMBER:
        P = np.array([[0.0, 0.0, 0.0], [float(geo["length_m"]), 0.0, 0.0]])
        members = [(0, 1)]
        anchors = {0}
        guides = ((1, (0,)),)
        labels = {0: "base", 1: "tip"}
    elif cid == ConfigurationId.TETRAHEDRON:
        P = _tetrahedron(float(geo["edge_m"]))
        members = [(0, 1), (1, 2), (0, 2), (0, 3), (1, 3), (2, 3)]
        anchors = {0, 1, 2}
        labels = {3: "apex"}
    elif cid == ConfigurationId.PYRAMID:
        a = float(geo["edge_m"])
        P = np.array([[0, 0, 0], [a, 0, 0], [a, a, 0], [0, a, 0], [a / 2, a / 2, a / math.sqrt(2.0)]], dtype=float)
        members = [(0, 1), (1, 2), (2, 3), (0, 3), (0, 4), (1, 4), (2, 4), (3, 4)]
        anchors = {0, 1, 2, 3}
        labels = {4: "apex"}
    elif cid == ConfigurationId.DOUBLE_TETRAHEDRON:
        c = np.asarray(geo["object_center_m"], dtype=float)
        off = float(geo["apex_offset_m"])
        fx, fy = geo["base_far_m"]
        ny = float(geo["base_near_y_m"])
        a_base = [[c[0] - fx, c[1] - fy, 0.0], [c[0] + fx, c[1] - fy, 0.0], [c[0], c[1] - ny, 0.0]]
        b_base = [[c[0] + fx, c[1] + fy, 0.0], [c[0] - fx, c[1] + fy, 0.0], [c[0], c[1] + ny, 0.0]]
        P = np.array(a_base + [[c[0], c[1] - off, c[2]]] + b_base + [[c[0], c[1] + off, c[2]]])
        members = [(0, 1), (1, 2), (0, 2), (0, 3), (1, 3), (2, 3),
                   (4, 5), (5, 6), (4, 6), (4, 7), (5, 7), (6, 7)]
        anchors = {0, 1, 2, 4, 5, 6}
        grasp_nodes, grasp_axis = (3, 7), 1
        labels = {3: "grasp_a", 7: "grasp_b"}
    else:
        P = np.vstack([_octahedron(float(geo["edge_m"])), np.asarray(geo["internal_nodes_m"], dtype=float)])
        members = [(0, 1), (1, 2), (0, 2),  # bottom face
                   (3, 4), (4, 5), (3, 5),  # top face
                   (0, 4), (0, 5), (1, 5), (1, 3), (2, 3), (2, 4),  # sides
                   (0, 6), (1, 6), (5, 6),  # internal node on the -x side
                   (0, 7), (2, 7), (4, 7)]  # internal node on the +x side
        anchors = {0, 1, 2}
        grasp_nodes, grasp_axis = (6, 7), 0
        labels = {6: "grasp_a", 7: "grasp_b"}

    topo = TrussTopology(len(P), tuple(members), frozenset(anchors), guides, labels)
    node_masses = np.full(topo.node_count, float(m_cfg["node_kg"]))
    member_masses = np.full(topo.member_count, float(m_cfg["member_kg"]))
    cfg = Configuration(cid, topo, P, node_masses, member_masses, grasp_nodes, grasp_axis, geo)
    _validate(cfg, model)
    return cfg


def _validate(cfg: Configuration, model: ActuatorModel) -> None:
    topo = cfg.topology
    try:
        L = forward_lengths(topo, cfg.positions)
    except Exception as exc:  # degenerate geometry
        raise InvalidGeometry(str(exc)) from exc
    active = topo.active_members
    bad = np.flatnonzero(active & ((L < model.l_min) | (L > model.l_max)))
    if bad.size:
        m = int(bad[0])
        raise InvalidGeometry(f"member {m} length {L[m]:.3f} m outside [{model.l_min}, {model.l_max}]")
    J = inverse_jacobian(topo, cfg.positions)
    Jf = J[np.ix_(np.flatnonzero(active), topo.free_coords)]
    s = np.linalg.svd(Jf, compute_uv=False)
    if s.size < topo.free_coords.size or s[-1] < 1e-6 * s[0]:
        raise InvalidGeometry("configuration is a mechanism (free-coordinate Jacobian is rank deficient)")
    if cfg.id == ConfigurationId.TETRAHEDRON:
        s = np.linalg.svd(node_submatrix(J, topo, 3), compute_uv=False)
        assert s.size == 3 and s[-1] > 1e-6, "tetrahedron apex must be square and invertible"
    if cfg.id == ConfigurationId.PYRAMID:
        A = node_submatrix(J, topo, 4).T
        s = np.linalg.svd(A, compute_uv=False)
        rank = int(np.sum(s > s[0] * PINV_RCOND))
        assert rank == 3 and A.shape[1] - rank == 1, "pyramid apex must have a one-dimensional null space"
    if cfg.grasp_nodes is not None:
        a, b = cfg.grasp_nodes
        shared = set(topo.incidence[a]) & set(topo.incidence[b])
        if shared:
            raise InvalidGeometry(f"grasp nodes share members {sorted(shared)}")
