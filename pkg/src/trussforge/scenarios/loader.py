"""Scenario files: JSON schema, validation and assembly into a runnable world."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from ..actuator import ActuatorModel, PiGains
from ..config import deep_merge, load_defaults
from ..errors import ConfigError, InvalidGeometry
from ..sim.contact import Pad, RigidObject, Wall
from ..sim.solver import SolverConfig
from ..sim.world import World
from ..statics import gravity_loads
from .configurations import Configuration, ConfigurationId, build_configuration
from .programs import (
    Segment,
    TrajectoryProgram,
    force_ramp_program,
    manipulation_suite_segments,
    octahedron_two_box_program,
)

SCHEMA_VERSION = 1

_vec3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_vec2 = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "configuration", "program"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "description": {"type": "string"},
        "configuration": {
            "type": "object",
            "required": ["id"],
            "additionalProperties": False,
            "properties": {
                "id": {"enum": [c.value for c in ConfigurationId]},
                "geometry": {"type": "object"},
            },
        },
        "actuator": {"type": "object"},
        "gains": {"type": "object"},
        "sim": {"type": "object"},
        "ideal_actuators": {"type": "boolean"},
        "controller": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "target_node": {"type": "integer", "minimum": 0},
                "force_direction": _vec3,
                "k_pos_N_per_m": {"type": "number", "minimum": 0},
            },
        },
        "walls": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["node", "direction"],
                "additionalProperties": False,
                "properties": {
                    "node": {"type": "integer", "minimum": 0},
                    "direction": _vec3,
                    "stiffness_N_per_m": {"type": "number", "exclusiveMinimum": 0},
                    "name": {"type": "string"},
                },
            },
        },
        "objects": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["half_extents_m", "mass_kg", "position_m"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "half_extents_m": _vec3,
                    "mass_kg": {"type": "number", "exclusiveMinimum": 0},
                    "mu": {"type": "number", "minimum": 0},
                    "position_m": _vec3,
                },
            },
        },
        "pads": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["center_m", "half_size_m", "top_m"],
                "additionalProperties": False,
                "properties": {
                    "center_m": _vec2,
                    "half_size_m": _vec2,
                    "top_m": {"type": "number"},
                    "removable": {"type": "boolean"},
                },
            },
        },
        "program": {
            "type": "object",
            "required": ["type"],
            "properties": {"type": {"enum": ["force_ramp", "suite", "octahedron_two_box", "segments"]}},
        },
        "grasp_required": {"type": "boolean"},
        "seed": {"type": "integer", "minimum": 0},
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "trace": {"type": "boolean"},
                "report": {"type": "boolean"},
                "plots": {"type": "boolean"},
            },
        },
    },
}

HARDWARE_REFERENCE = {
    "source": "published hardware experiment",
    "double_tetrahedron_x_axis": {"rmse_x_m": 0.0321, "rmse_y_m": 0.0049, "rmse_z_m": 0.0197, "rmse_force_N": 7.30},
    "double_tetrahedron_xy": {"rmse_x_m": 0.0244, "rmse_y_m": 0.0236, "rmse_z_m": 0.0095, "rmse_force_N": 5.05},
}


@dataclass(frozen=True)
class Scenario:
    name: str
    raw: dict
    configuration: Configuration
    world: World
    program: TrajectoryProgram
    mode: str  # "grasp" (grasp-pair midpoint) or "node" (single target node)
    target_nodes: tuple[int, ...]
    force_direction: np.ndarray
    k_pos: float
    initial_positions: np.ndarray
    object_positions: tuple[np.ndarray, ...] = ()
    grasp_required: bool = False
    seed: int = 0
    outputs: dict = field(default_factory=dict)
    high_level_dt: float = 0.02
    trace_decimation: int = 2


def load_scenario_file(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    validate_scenario(data)
    return data


def validate_scenario(data: dict) -> None:
    try:
        jsonschema.validate(data, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"scenario invalid at {where}: {exc.message}") from exc


def set_dotted(data: dict, path: str, value) -> dict:
    """Copy of ``data`` with the entry at dotted ``path`` replaced."""
    out = copy.deepcopy(data)
    node = out
    keys = path.split(".")
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot set {path}: {key} is not an object")
    node[keys[-1]] = value
    return out


def build_scenario(data: dict, ideal: bool | None = None) -> Scenario:
    """Assemble a validated scenario dict into world, program and targets."""
    validate_scenario(data)
    try:
        return _build(data, ideal)
    except (InvalidGeometry, KeyError, ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"scenario not buildable: {exc}") from exc


def _build(data: dict, ideal: bool | None) -> Scenario:
    defaults = load_defaults()
    act_cfg = deep_merge(defaults["actuator"], data.get("actuator", {}))
    gain_cfg = deep_merge(defaults["gains"], data.get("gains", {}))
    sim_cfg = deep_merge(defaults["sim"], data.get("sim", {}))
    model = ActuatorModel.from_config(act_cfg)
    if data.get("ideal_actuators", False) if ideal is None else ideal:
        model = model.ideal()
    gains = PiGains.from_config(gain_cfg)
    cfg_block = data["configuration"]
    config = build_configuration(cfg_block["id"], cfg_block.get("geometry"), model=model)
    topo = config.topology
    P0 = config.positions.copy()
    radius = float(sim_cfg["node_radius_m"])
    k_contact = float(sim_cfg["contact_stiffness_N_per_m"])

    walls = []
    for i, w in enumerate(data.get("walls", [])):
        k = int(w["node"])
        if k >= topo.node_count or not topo.is_free(k):
            raise ConfigError(f"wall node {k} is not a free node")
        d = np.asarray(w["direction"], dtype=float)
        d = d / np.linalg.norm(d)
        walls.append(Wall(P0[k] + radius * d, -d, (k,), float(w.get("stiffness_N_per_m", k_contact)),
                          w.get("name", f"wall{i}")))
    objects, obj_pos = [], []
    for i, o in enumerate(data.get("objects", [])):
        objects.append(RigidObject(o["half_extents_m"], float(o["mass_kg"]), float(o.get("mu", 0.8)),
                                   o.get("name", f"box{i}")))
        obj_pos.append(np.asarray(o["position_m"], dtype=float))
    pads = [Pad(tuple(p["center_m"]), tuple(p["half_size_m"]), float(p["top_m"]), bool(p.get("removable", False)))
            for p in data.get("pads", [])]

    loads = gravity_loads(topo, config.node_masses, config.member_masses)
    world = World(
        topology=topo, model=model, gains=gains, loads=loads, walls=tuple(walls), objects=tuple(objects),
        pads=tuple(pads), grasp_nodes=config.grasp_nodes, grasp_axis=config.grasp_axis if config.grasp_axis is not None else 1,
        contact_stiffness=k_contact, node_radius=radius, slip_speed=float(sim_cfg["slip_speed_m_per_s"]),
        solver=SolverConfig.from_config(sim_cfg["solver"]), dt=float(sim_cfg["dt_s"]),
    )

    ctrl = data.get("controller", {})
    k_pos = float(ctrl.get("k_pos_N_per_m", gain_cfg["k_pos_N_per_m"]))
    prog_cfg = data["program"]
    kind = prog_cfg["type"]
    if objects:
        if config.grasp_nodes is None:
            raise ConfigError("objects need a configuration with a grasp pair")
        mode = "grasp"
        targets = tuple(config.grasp_nodes)
        start = 0.5 * (P0[targets[0]] + P0[targets[1]])
        ax = config.grasp_axis
        half_gap = 0.5 * abs(P0[targets[1], ax] - P0[targets[0], ax])
        gap = half_gap - radius - objects[0].half_extents[ax]
        direction = np.zeros(3)
    else:
        mode = "node"
        default_node = max(topo.free_nodes)
        targets = (int(ctrl.get("target_node", default_node)),)
        if not topo.is_free(targets[0]):
            raise ConfigError(f"target node {targets[0]} is not free")
        start = P0[targets[0]].copy()
        gap = 0.0
        direction = np.asarray(ctrl.get("force_direction", [0.0, 0.0, 1.0]), dtype=float)
        direction = direction / np.linalg.norm(direction)

    if kind == "force_ramp":
        program = force_ramp_program(float(prog_cfg["target_N"]), float(prog_cfg.get("rate_N_per_s", 10.0)),
                                     float(prog_cfg.get("hold_s", 5.0)), start=start)
    elif kind == "suite":
        segs = manipulation_suite_segments(
            prog_cfg["trajectory"], speed=float(prog_cfg.get("speed_m_per_s", 0.018)),
            radius=float(prog_cfg.get("radius_m", 0.2)), grasp_force=float(prog_cfg.get("grasp_force_N", 30.0)),
            rate=float(prog_cfg.get("rate_N_per_s", 10.0)), profile=prog_cfg.get("profile", "trapezoid"))
        program = TrajectoryProgram(segs, start, gap=gap)
    elif kind == "octahedron_two_box":
        if config.id != ConfigurationId.OCTAHEDRON_INTERNAL:
            raise ConfigError("octahedron_two_box needs the octahedron_internal configuration")
        program = octahedron_two_box_program(start, box_offset=prog_cfg.get("box_offset_m", (0.0, 0.0, -0.17)),
                                             approach_gap=gap, grasp_force=float(prog_cfg.get("grasp_force_N", 12.0)),
                                             rate=float(prog_cfg.get("rate_N_per_s", 10.0)))
    else:
        segs = [Segment(s["kind"], float(s["duration_s"]), dict(s.get("params", {})), bool(s.get("measure", False)),
                        s.get("label", "")) for s in prog_cfg.get("segments", [])]
        program = TrajectoryProgram(segs, start, gap=gap)

    hl_dt = float(sim_cfg["high_level_dt_s"])
    ratio = hl_dt / world.dt
    if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
        raise ConfigError("high-level period must be an integer multiple of the low-level period")
    return Scenario(
        name=data.get("name", config.id.value), raw=data, configuration=config, world=world, program=program,
        mode=mode, target_nodes=targets, force_direction=direction, k_pos=k_pos, initial_positions=P0,
        object_positions=tuple(obj_pos), grasp_required=bool(data.get("grasp_required", False)),
        seed=int(data.get("seed", 0)), outputs={"trace": True, "report": True, "plots": True, **data.get("outputs", {})},
        high_level_dt=hl_dt, trace_decimation=int(sim_cfg["trace_decimation"]),
    )


def load_scenario(path, ideal: bool | None = None) -> Scenario:
    return build_scenario(load_scenario_file(path), ideal=ideal)


def scenario_from_path_or_dict(source) -> dict:
    if isinstance(source, dict):
        validate_scenario(source)
        return source
    return load_scenario_file(Path(source))
