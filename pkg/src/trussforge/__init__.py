"""Quasi-static simulation and hybrid position/force control of truss robots."""
from .actuator import ActuatorModel, ActuatorState, FixtureLoad, PiGains, actuator_step, dead_zone, pi_step
from .controller import (
    HybridCommand,
    MemberCommandSet,
    Target,
    argmax_direction_invariance_check,
    compute_member_commands,
    hybrid_nodal_command,
)
from .statics import AllocationResult, Constrainedness, allocate_member_forces, gravity_loads, nodal_forces
from .truss import TrussTopology, forward_lengths, inverse_jacobian, member_length, node_submatrix

__version__ = "0.1.0"

__all__ = [
    "ActuatorModel", "ActuatorState", "AllocationResult", "Constrainedness", "FixtureLoad", "HybridCommand",
    "MemberCommandSet", "PiGains", "Target", "TrussTopology", "actuator_step", "allocate_member_forces",
    "argmax_direction_invariance_check", "compute_member_commands", "dead_zone", "forward_lengths",
    "gravity_loads", "hybrid_nodal_command", "inverse_jacobian", "member_length", "nodal_forces",
    "node_submatrix", "pi_step",
]
