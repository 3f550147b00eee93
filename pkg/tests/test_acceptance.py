"""The nine acceptance criteria, each at its stated tolerance and time budget.

Every test prints one ``ACCEPTANCE n: PASS/FAIL`` line; the lines are
repeated in the pytest terminal summary.
"""
import time
from dataclasses import replace

import numpy as np

from trussforge.controller import hybrid_nodal_command
from trussforge.harness.metrics import (column, flat_intervals, force_rmse, holding_error_pct, position_rmse,
                                        segment_summary)
from trussforge.harness.runner import EXIT_OK, run
from trussforge.harness.trace import write_trace
from trussforge.scenarios.loader import build_scenario, load_scenario, load_scenario_file, set_dotted
from trussforge.scenarios.programs import SUITE_ROWS, Segment, TrajectoryProgram
from trussforge.sim.solver import SolverConfig, solve_positions
from trussforge.statics import allocate_member_forces
from trussforge.truss import forward_lengths, inverse_jacobian, node_submatrix

from conftest import SCENARIOS, TETRA, random_truss, regular_tetrahedron
from test_truss import PYRAMID, PYRAMID_P


def _scenario(name, **overrides):
    data = load_scenario_file(SCENARIOS / f"{name}.json")
    for path, value in overrides.items():
        data = set_dotted(data, path, value)
    return build_scenario(data)


def test_1_kinematics_oracle(acceptance):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = 0.0
    h = 1e-6
    for i in range(100):
        topo, P = random_truss(rng, 4 + i % 4)
        J = inverse_jacobian(topo, P)
        flat = P.ravel()
        fd = np.empty_like(J)
        for c in range(flat.size):
            up, dn = flat.copy(), flat.copy()
            up[c] += h
            dn[c] -= h
            fd[:, c] = (forward_lengths(topo, up) - forward_lengths(topo, dn)) / (2 * h)
        worst = max(worst, np.max(np.abs(J - fd)) / np.max(np.abs(J)))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-6 and elapsed < 1.0
    acceptance(1, "inverse Jacobian vs central differences, 100 trusses", ok,
               f"max rel err {worst:.2e}, {elapsed:.2f} s")
    assert ok


def test_2_statics_optimality(acceptance):
    t0 = time.perf_counter()
    J = inverse_jacobian(PYRAMID, PYRAMID_P)
    F_des = np.array([8.0, -14.0, 30.0])
    W = np.array([0.0, 0.0, -11.77])
    res = allocate_member_forces(PYRAMID, J, 4, F_des, W)
    A = node_submatrix(J, PYRAMID, 4).T
    residual = np.linalg.norm(W - A @ res.forces - F_des)
    null = np.linalg.svd(A)[2][-1]
    assert np.linalg.norm(A @ null) < 1e-12
    norms = [np.linalg.norm(res.forces + t * null) for t in np.linspace(-20.0, 20.0, 21)]
    minimal = all(n >= np.linalg.norm(res.forces) - 1e-12 for n in norms)
    elapsed = time.perf_counter() - t0
    ok = residual < 1e-9 and minimal and elapsed < 1.0
    acceptance(2, "pyramid apex allocation exact and minimum-norm", ok,
               f"residual {residual:.1e} N, 21/21 perturbations not shorter: {minimal}, {elapsed:.3f} s")
    assert ok


def test_3_single_actuator_force_tracking(acceptance):
    t0 = time.perf_counter()
    errors, flats, exits = {}, {}, []
    for target in (10.0, 20.0, 50.0, 100.0, 200.0):
        scn = _scenario("single_member_ramp", **{"program.target_N": target})
        res = run(scn)
        exits.append(res.exit_code)
        errors[target] = holding_error_pct(res, scn, target)
        flats[target] = len(flat_intervals(res, scn))
    elapsed = time.perf_counter() - t0
    low_force_steps = all(flats[t] >= 1 for t in (10.0, 20.0))
    ok = (all(e == EXIT_OK for e in exits) and max(errors.values()) < 5.0 and low_force_steps and elapsed < 10.0)
    detail = ", ".join(f"{t:.0f} N {e:.2f}%" for t, e in errors.items())
    acceptance(3, "single actuator ramps hold within 5%, dead-zone steps at low force", ok,
               f"{detail}; flat intervals 10 N {flats[10.0]}, 20 N {flats[20.0]}; {elapsed:.1f} s")
    assert ok


def test_4_node_level_force_tracking(acceptance):
    t0 = time.perf_counter()
    worst, failed = 0.0, []
    for name in ("tetrahedron_force_x", "tetrahedron_force_z", "pyramid_force_x", "pyramid_force_z"):
        for target in (10.0, 20.0, 30.0, 40.0, 50.0):
            scn = _scenario(name, **{"program.target_N": target})
            res = run(scn)
            err = holding_error_pct(res, scn, target)
            worst = max(worst, err)
            if res.exit_code != EXIT_OK or not err < 5.0:
                failed.append(f"{name} {target:.0f} N: {err:.2f}%")
    elapsed = time.perf_counter() - t0
    ok = not failed and elapsed < 60.0
    acceptance(4, "tetrahedron and pyramid x/z holds within 5% in 20 runs", ok,
               f"worst {worst:.2f}%, failures {failed or 'none'}, {elapsed:.1f} s")
    assert ok


def test_5_quasi_static_solver(acceptance):
    guess = regular_tetrahedron()
    guess[3] += [0.05, -0.03, -0.1]
    res = solve_positions(TETRA, np.ones(6), guess, config=SolverConfig(tolerance=1e-12))
    height_err = abs(res.positions[3, 2] - np.sqrt(2.0 / 3.0))
    L = np.ones(6)
    L[5] += 1e-3
    warm = solve_positions(TETRA, L, res.positions)
    ok = height_err <= 1e-9 and warm.iterations <= 5
    acceptance(5, "apex height from lengths; warm re-solve after 1 mm", ok,
               f"height error {height_err:.1e} m, {warm.iterations} iterations")
    assert ok


def _suite_metrics(res, scn):
    pos = position_rmse(res)
    return pos, force_rmse(res, scn), column(res, "obj0_status").astype(int)


def test_6_double_tetrahedron_manipulation_suite(acceptance):
    t0 = time.perf_counter()
    problems, worst_pos, worst_force, worst_ideal = [], 0.0, 0.0, 0.0
    for traj in SUITE_ROWS:
        scn = _scenario("double_tetrahedron_suite", **{"program.trajectory": traj})
        for seed in (1, 2, 3):
            res = run(scn, seed=seed)
            pos, frc, status = _suite_metrics(res, scn)
            worst_pos, worst_force = max(worst_pos, *pos.values()), max(worst_force, frc)
            if res.exit_code != EXIT_OK or np.any(status == 3):
                problems.append(f"{traj} seed {seed}: exit {res.exit_code}")
            if not (max(pos.values()) < 0.05 and frc < 15.0):
                problems.append(f"{traj} seed {seed}: rmse {pos} force {frc:.2f}")
        ideal = build_scenario(scn.raw, ideal=True)
        res = run(ideal, seed=1)
        pos, _, _ = _suite_metrics(res, ideal)
        worst_ideal = max(worst_ideal, *pos.values())
        if res.exit_code != EXIT_OK or not max(pos.values()) < 0.002:
            problems.append(f"{traj} ideal: exit {res.exit_code}, rmse {pos}")
    elapsed = time.perf_counter() - t0
    ok = not problems and elapsed < 300.0
    acceptance(6, "double-tetrahedron suite, 7 trajectories x 3 seeds plus ideal actuators", ok,
               f"worst axis RMSE {worst_pos * 1000:.2f} mm, worst force RMSE {worst_force:.2f} N, "
               f"ideal {worst_ideal * 1000:.2f} mm, {elapsed:.0f} s, problems {problems or 'none'}")
    assert ok


def test_7_octahedron_two_box(acceptance):
    t0 = time.perf_counter()
    scn = load_scenario(SCENARIOS / "octahedron_two_box.json")
    res = run(scn)
    elapsed = time.perf_counter() - t0
    sim_time = float(column(res, "time_s")[-1])
    complete = res.exit_code == EXIT_OK and abs(sim_time - scn.program.duration) < 1e-9
    dy = [column(res, f"obj{j}_y_m")[-1] - column(res, f"obj{j}_y_m")[0] for j in range(2)]
    displaced = all(abs(d - 0.5) <= 0.05 for d in dy)
    held = True
    for seg in segment_summary(res, scn):
        if seg["kind"] == "line" and seg["measured"]:
            j = 0 if seg["label"].endswith("box1") else 1
            held &= seg["statuses"][j] == ["grasped"]
    duration_ok = abs(scn.program.duration - 290.0) <= 29.0
    ok = complete and displaced and held and duration_ok and elapsed < 180.0
    acceptance(7, "octahedron two-box program", ok,
               f"complete {complete}, y displacement {dy[0]:.3f}/{dy[1]:.3f} m, grasped while carrying {held}, "
               f"simulated {sim_time:.1f} s, {elapsed:.0f} s")
    assert ok


def _wall_steady_force(f, depth, k_pos, k_env):
    data = {"schema_version": 1, "configuration": {"id": "single_member"}, "ideal_actuators": True,
            "controller": {"target_node": 1, "force_direction": [1, 0, 0], "k_pos_N_per_m": k_pos},
            "walls": [{"node": 1, "direction": [1, 0, 0], "stiffness_N_per_m": k_env}],
            "program": {"type": "segments",
                        "segments": [{"kind": "force_ramp", "duration_s": 40.0, "params": {"target": f, "rate": 10.0}}]}}
    scn = build_scenario(data)
    prog = TrajectoryProgram(scn.program.segments, scn.program.start + np.array([depth, 0.0, 0.0]))
    res = run(replace(scn, program=prog), seed=0)
    return float(column(res, "wall0_force_N")[-1])


def test_8_hybrid_law_properties(acceptance):
    rng = np.random.default_rng(8)
    worst_sum = 0.0
    for _ in range(1000):
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        f, e, k = rng.uniform(0, 100), rng.uniform(0, 0.05), rng.uniform(0, 3000)
        F = hybrid_nodal_command(e * u, np.zeros(3), f * u, k)
        worst_sum = max(worst_sum, abs(np.linalg.norm(F) - (f + k * e)) / max(1.0, f + k * e))
    worst_wall = 0.0
    for f, depth, k_pos, k_env in ((20.0, 0.0, 800.0, 5e4), (20.0, 0.002, 800.0, 5e4), (10.0, 0.004, 2000.0, 2e4)):
        analytic = (f + k_pos * depth) * k_env / (k_env + k_pos)
        worst_wall = max(worst_wall, abs(_wall_steady_force(f, depth, k_pos, k_env) - analytic) / analytic)
    ok = worst_sum <= 1e-12 and worst_wall < 0.01
    acceptance(8, "same-direction superposition and 1-D wall steady state", ok,
               f"superposition error {worst_sum:.1e}, wall force error {worst_wall * 100:.2f}%")
    assert ok


def test_9_determinism(acceptance, tmp_path):
    names = ["single_member_ramp", "tetrahedron_force_x", "pyramid_force_z", "tetrahedron_hold", "frictionless_drop"]
    same = []
    for name in names:
        scn = load_scenario(SCENARIOS / f"{name}.json")
        paths = []
        for rep in range(2):
            res = run(scn, seed=11)
            paths.append(write_trace(tmp_path / f"{name}_{rep}.csv", res.columns, res.rows))
        same.append(paths[0].read_bytes() == paths[1].read_bytes())
    ok = all(same)
    acceptance(9, "same scenario and seed give byte-identical trace CSVs", ok, f"{sum(same)}/{len(same)} scenarios")
    assert ok
