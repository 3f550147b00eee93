from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trussforge.errors import NoConvergence, SimDiverged, UnderConstrained
from trussforge.scenarios.configurations import ConfigurationId, build_configuration
from trussforge.scenarios.loader import build_scenario
from trussforge.sim.contact import (GraspState, GraspStatus, Pad, RigidObject, Wall, grasp_update, support_height)
from trussforge.sim.solver import SolverConfig, solve_positions
from trussforge.sim.world import equilibrium_forces, initial_state, tick
from trussforge.truss import TrussTopology, forward_lengths, inverse_jacobian

from conftest import TETRA, regular_tetrahedron

# solver ------------------------------------------------------------------


def test_tetrahedron_apex_from_lengths():
    guess = regular_tetrahedron()
    guess[3] = [0.4, 0.2, 0.6]
    res = solve_positions(TETRA, np.ones(6), guess, config=SolverConfig(tolerance=1e-12))
    np.testing.assert_allclose(res.positions[3], [0.5, np.sqrt(3) / 6, np.sqrt(2 / 3)], atol=1e-9)
    assert res.residual < 1e-9


def test_warm_start_after_one_millimetre():
    P = regular_tetrahedron()
    L = np.ones(6)
    L[4] += 1e-3
    res = solve_positions(TETRA, L, P)
    assert res.iterations <= 5
    assert np.max(np.abs(forward_lengths(TETRA, res.positions) - L)) <= 1e-6


def test_collinear_anchors_are_under_constrained():
    topo = TrussTopology(4, ((0, 3), (1, 3), (2, 3)), frozenset({0, 1, 2}))
    P = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0], [1, 0.5, 0.5]])
    with pytest.raises(UnderConstrained):
        solve_positions(topo, forward_lengths(topo, P) + 0.01, P)


def test_impossible_lengths_do_not_converge():
    topo = TrussTopology(3, ((0, 2), (1, 2)), frozenset({0, 1}), guides=((2, (0, 2)),))
    P = np.array([[0, 0, 0], [1, 0, 0], [0.5, 0, 0.5]])
    with pytest.raises(NoConvergence):
        solve_positions(topo, [0.2, 0.2], P)  # the two circles do not meet


def test_over_determined_incompatible_lengths_fit_least_squares():
    topo = TrussTopology(5, ((0, 4), (1, 4), (2, 4), (3, 4)), frozenset({0, 1, 2, 3}))
    P = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [0.5, 0.5, 0.7]])
    L = forward_lengths(topo, P)
    L[0] += 0.01
    res = solve_positions(topo, L, P)
    assert res.least_squares


@settings(max_examples=40, deadline=None)
@given(dl=st.lists(st.floats(-0.05, 0.05), min_size=3, max_size=3))
def test_branch_policy_apex_stays_above_base(dl):
    P = regular_tetrahedron()
    L = np.ones(6)
    L[3:] += dl
    res = solve_positions(TETRA, L, P)
    assert res.positions[3, 2] > 0


def test_every_configuration_solves_from_its_lengths():
    for cid in ConfigurationId:
        cfg = build_configuration(cid)
        guess = cfg.positions + np.where(np.isin(np.arange(len(cfg.positions)), list(cfg.topology.anchors))[:, None],
                                         0.0, 0.01)
        res = solve_positions(cfg.topology, cfg.lengths, guess, config=SolverConfig(tolerance=1e-10))
        assert res.residual < 1e-9, cid

# contacts ----------------------------------------------------------------


def test_minimum_friction_examples():
    cube = RigidObject([0.1, 0.1, 0.1], 0.931)
    assert 0.5 * cube.weight / 30.0 == pytest.approx(0.152, abs=5e-4)
    box = RigidObject([0.1, 0.1, 0.1], 0.309)
    assert 0.5 * box.weight / 12.0 == pytest.approx(0.126, abs=5e-4)
    assert 0.5 * box.weight / 12.0 < box.mu


def _grasp_positions(squeeze, z=0.0, half=0.1, r=0.03):
    P = np.zeros((2, 3))
    P[0] = [0, -(half + r) + squeeze, z]
    P[1] = [0, (half + r) - squeeze, z]
    return P


def _step(state, P, obj, pos, engaged=True, supports=(), n=1):
    for _ in range(n):
        state, pos, loads = grasp_update(state, P, obj, pos, 0.01, engaged=engaged, supports=supports)
    return state, pos, loads


def test_grasp_lift_carry_and_drop():
    obj = RigidObject([0.1, 0.1, 0.1], 0.931, 0.8)
    pad = Pad((0, 0), (0.05, 0.05), 0.4)
    sup = [(pad.covers, pad.top)]
    g = GraspState((0, 1), 1)
    pos = np.array([0, 0, 0.5])
    g, pos, loads = _step(g, _grasp_positions(30 / 5e4, z=0.5), obj, pos, supports=sup)
    assert g.status == GraspStatus.GRASPED and g.supported
    np.testing.assert_allclose(g.normal_forces, [30.0, 30.0])
    # lifted off the pad, friction carries the weight
    g, pos, loads = _step(g, _grasp_positions(30 / 5e4, z=0.55), obj, pos, supports=sup)
    assert g.status == GraspStatus.GRASPED and not g.supported
    assert pos[2] == pytest.approx(0.55)
    total = sum(loads.values())
    np.testing.assert_allclose(total, [0, 0, -obj.weight], atol=1e-9)
    # squeeze relaxes until friction no longer holds: slipping
    weak = 0.5 * obj.weight / obj.mu * 0.5 / 5e4
    g, pos, _ = _step(g, _grasp_positions(weak, z=0.55), obj, pos, supports=sup)
    assert g.status == GraspStatus.SLIPPING
    # contact lost while slipping in the air: dropped
    g, pos, _ = _step(g, _grasp_positions(-0.01, z=0.55), obj, pos, supports=sup)
    assert g.status == GraspStatus.DROPPED


def test_frictionless_box_slides_back_onto_support():
    obj = RigidObject([0.1, 0.1, 0.1], 0.931, 0.0)
    sup = [(lambda xy: True, 0.4)]
    g = GraspState((0, 1), 1)
    pos = np.array([0, 0, 0.5])
    g, pos, _ = _step(g, _grasp_positions(30 / 5e4, z=0.5), obj, pos, supports=sup)
    assert g.status == GraspStatus.GRASPED  # resting box: no tangential demand yet
    g, pos, _ = _step(g, _grasp_positions(30 / 5e4, z=0.52), obj, pos, supports=sup, n=100)
    assert g.status == GraspStatus.SLIPPING and pos[2] == pytest.approx(0.5)


def test_zero_normal_force_on_one_side_drops_a_carried_box():
    obj = RigidObject([0.1, 0.1, 0.1], 0.5, 0.8)
    g = GraspState((0, 1), 1, status=GraspStatus.SLIPPING, supported=False)
    P = _grasp_positions(0.001, z=0.5)
    P[1, 1] += 0.01
    g, _, _ = _step(g, P, obj, np.array([0, 0, 0.5]))
    assert g.normal_forces[1] == 0.0 and g.status == GraspStatus.DROPPED


def test_release_on_support_is_free():
    obj = RigidObject([0.1, 0.1, 0.1], 0.5, 0.8)
    g = GraspState((0, 1), 1, status=GraspStatus.GRASPED)
    g, pos, _ = _step(g, _grasp_positions(-0.01), obj, np.zeros(3), engaged=False)
    assert g.status == GraspStatus.FREE
    assert pos[2] == pytest.approx(0.1)  # settles on the ground


@settings(max_examples=60, deadline=None)
@given(n1=st.floats(12.0, 60.0), extra=st.floats(0.0, 40.0), mass=st.floats(0.1, 2.0))
def test_grasp_monotonicity(n1, extra, mass):
    obj = RigidObject([0.1, 0.1, 0.1], mass, 0.8)
    g = GraspState((0, 1), 1, status=GraspStatus.GRASPED, supported=False)
    pos = np.array([0, 0, 0.5])
    g1, _, _ = _step(g, _grasp_positions(n1 / 5e4, z=0.5), obj, pos)
    g2, _, _ = _step(g, _grasp_positions((n1 + extra) / 5e4, z=0.5), obj, pos)
    if g1.status == GraspStatus.GRASPED:
        assert g2.status == GraspStatus.GRASPED


def test_stacked_boxes_support_only_from_below():
    below = (lambda xy: True, 0.33)
    above = (lambda xy: True, 0.53)
    assert support_height((0, 0), [below, above], bottom=0.33) == pytest.approx(0.33)
    assert support_height((0, 0), [below, above]) == pytest.approx(0.53)
    assert support_height((5, 5), [(lambda xy: False, 1.0)]) == 0.0


def test_wall_penetration():
    w = Wall([1.0, 0, 0], [-1.0, 0, 0], (1,))
    assert w.penetration([0.97, 0, 0], 0.03) == pytest.approx(0.0)
    assert w.penetration([0.98, 0, 0], 0.03) == pytest.approx(0.01)

# world -------------------------------------------------------------------


def _tetra_world(**extra):
    return build_scenario({"schema_version": 1, "configuration": {"id": "tetrahedron"}, "ideal_actuators": True,
                           "program": {"type": "segments", "segments": [{"kind": "hold", "duration_s": 1.0}]},
                           **extra})


def test_equilibrium_consistency_at_initial_state():
    scn = _tetra_world()
    s = initial_state(scn.world, scn.initial_positions)
    J = inverse_jacobian(scn.world.topology, s.positions)
    resid = (J.T @ s.member_forces - scn.world.loads.ravel())[scn.world.topology.free_coords]
    assert np.linalg.norm(resid) < 0.5


def test_zero_command_is_stationary_and_bit_deterministic():
    scn = _tetra_world()
    s0 = initial_state(scn.world, scn.initial_positions)
    s = s0
    for _ in range(50):
        s = tick(scn.world, s, s.member_forces)
        assert np.max(np.abs(s.positions - s0.positions)) <= 1e-9
    a = tick(scn.world, s0, s0.member_forces + 3.0, np.random.default_rng(4))
    b = tick(scn.world, s0, s0.member_forces + 3.0, np.random.default_rng(4))
    assert np.array_equal(a.positions, b.positions) and np.array_equal(a.actuators.measured_force,
                                                                        b.actuators.measured_force)


def test_solver_residual_after_every_tick():
    scn = _tetra_world()
    s = initial_state(scn.world, scn.initial_positions)
    topo = scn.world.topology
    for i in range(100):
        s = tick(scn.world, s, s.member_forces + np.array([0, 0, 0, 20.0, -5.0, 0.0]))
        err = np.abs(forward_lengths(topo, s.positions) - s.actuators.length)[topo.active_members]
        assert err.max() <= scn.world.solver.tolerance


def test_equilibrium_forces_self_stress_on_misfit():
    P = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [0.5, 0.5, 0.7]])
    topo = TrussTopology(5, ((0, 4), (1, 4), (2, 4), (3, 4)), frozenset({0, 1, 2, 3}))
    L = forward_lengths(topo, P)
    lam = equilibrium_forces(topo, P, L - 0.001, np.zeros((5, 3)), 2e4)
    np.testing.assert_allclose(lam, 20.0)


def test_large_jump_raises_sim_diverged():
    scn = _tetra_world()
    s = initial_state(scn.world, scn.initial_positions)
    acts = replace(s.actuators, length=s.actuators.length + np.array([0, 0, 0, 0.2, 0.2, 0.2]))
    world = replace(scn.world, solver=replace(scn.world.solver, step_limit=0.05))
    with pytest.raises(SimDiverged):
        tick(world, replace(s, actuators=acts), np.full(6, np.nan))
