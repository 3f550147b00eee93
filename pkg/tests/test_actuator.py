import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trussforge.actuator import (ActuatorModel, ActuatorState, FixtureLoad, PiGains, actuator_step, advance,
                                 dead_zone, pi_step)

MODEL = ActuatorModel()
GAINS = PiGains.from_config()


def test_defaults_come_from_config():
    m = ActuatorModel.from_config()
    assert (m.u_dz, m.k_v, m.v_max, m.k_ax, m.loadcell_noise_sd) == (0.08, 0.05, 0.03, 2e4, 0.2)
    assert PiGains.from_config({"k_p_per_N": 0.1}).k_p == 0.1


def test_pi_step_examples():
    s = ActuatorState(length=1.0, measured_force=5.0)
    assert pi_step(s, 5.0, 0.01, GAINS) == (0.0, 0.0)
    u, _ = pi_step(ActuatorState(length=1.0), 50.0, 0.01, PiGains(k_p=0.01, k_i=0.0))
    assert u == pytest.approx(0.5)
    g = PiGains(k_p=0.0, k_i=0.01)
    s = ActuatorState(length=1.0, measured_force=0.0)
    for _ in range(100):
        u, integ = pi_step(s, 10.0, 0.01, g)
        s = ActuatorState(length=1.0, measured_force=0.0, integrator=integ)
    assert u == pytest.approx(0.1)
    with pytest.raises(ValueError):
        pi_step(s, 1.0, 0.0, g)


def test_dead_zone_examples():
    assert dead_zone(0.5 * MODEL.u_dz, MODEL) == 0.0
    assert dead_zone(MODEL.u_dz, MODEL) == 0.0
    m = ActuatorModel(u_dz=0.1, k_v=0.1, v_max=1.0)
    assert dead_zone(0.6, m) == pytest.approx(0.05)
    assert dead_zone(-0.6, m) == pytest.approx(-0.05)
    assert dead_zone(1.0, ActuatorModel(u_dz=0.0, k_v=1.0)) == MODEL.v_max


@settings(max_examples=200, deadline=None)
@given(a=st.floats(-1, 1), b=st.floats(-1, 1))
def test_dead_zone_monotone(a, b):
    lo, hi = sorted((a, b))
    assert dead_zone(lo, MODEL) <= dead_zone(hi, MODEL)


@settings(max_examples=100, deadline=None)
@given(cmds=st.lists(st.floats(-500, 500), min_size=1, max_size=200))
def test_anti_windup_and_length_limits(cmds):
    s = ActuatorState(length=1.0)
    for c in cmds:
        s = advance(s, c, 0.01, MODEL, GAINS)
        assert abs(s.integrator) <= GAINS.integrator_limit
        assert MODEL.l_min <= s.length <= MODEL.l_max


def test_length_clamped_and_flagged():
    s = ActuatorState(length=MODEL.l_min + 1e-5, integrator=1.0)
    s = advance(s, 100.0, 0.01, MODEL, GAINS)
    assert s.length == MODEL.l_min and s.saturated


def test_positive_duty_retracts():
    s = advance(ActuatorState(length=1.0), 100.0, 0.1, MODEL, GAINS)
    assert s.length < 1.0


def test_balanced_command_leaves_state_unchanged():
    s = ActuatorState(length=1.2, measured_force=-20.0)
    n = actuator_step(s, -20.0, 0.01, MODEL, GAINS, FixtureLoad(1.2, 2e4, -20.0))
    assert n.length == 1.2 and n.integrator == 0.0 and n.measured_force == -20.0


def _ramp(target, rng, model=MODEL, hold=5.0, dt=0.01):
    load = FixtureLoad(1.0, model.k_ax)
    s = ActuatorState(length=1.0)
    ramp = target / 10.0
    t, out = 0.0, []
    while t < ramp + hold:
        cmd = -min(10.0 * t, target)  # pushing into the fixture is compression
        s = actuator_step(s, cmd, dt, model, GAINS, load, rng)
        t += dt
        out.append((t, cmd, s.measured_force, load.force(s.length)))
    return np.array(out)


def test_ramp_to_50_newton_holds_within_5_percent():
    tr = _ramp(50.0, np.random.default_rng(0))
    hold = tr[:, 0] > 5.0
    assert np.mean(np.abs(tr[hold, 3] + 50.0)) < 0.05 * 50.0


def test_low_force_ramp_is_step_like():
    tr = _ramp(10.0, None)
    ramp = tr[:, 0] <= 1.0
    F = tr[ramp, 3]
    still = np.abs(np.diff(F)) < 1e-9
    # the force stalls for consecutive samples while the duty is inside the dead zone
    longest = max(len(r) for r in "".join("1" if s else "0" for s in still).split("0"))
    assert longest >= 10
