"""Quasi-static world: position solver, contacts and the closed-loop tick."""
from .contact import GraspState, GraspStatus, Pad, RigidObject, Wall, grasp_update
from .solver import SolveResult, SolverConfig, solve_positions
from .world import ObjectState, SimState, World, equilibrium_forces, initial_state, tick

__all__ = [
    "GraspState", "GraspStatus", "ObjectState", "Pad", "RigidObject", "SimState", "SolveResult",
    "SolverConfig", "Wall", "World", "equilibrium_forces", "grasp_update", "initial_state",
    "solve_positions", "tick",
]
