"""Force-controlled linear actuator with a PWM dead zone.

Each member is a speed-limited length source.  A PI loop on the loadcell
force error produces a PWM duty ``u`` in [-1, 1]; the drive only moves once
``|u|`` clears the dead zone.  Positive ``u`` asks for more tension, so the
member *retracts*: ``dl/dt = -dead_zone(u)``.

All functions accept scalars or equally shaped numpy arrays, so one
:class:`ActuatorState` can describe a single member or a whole bank.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .config import load_defaults


@dataclass(frozen=True)
class ActuatorModel:
    l_min: float = 0.3
    l_max: float = 2.4
    v_max: float = 0.03
    u_dz: float = 0.08
    k_v: float = 0.05
    force_limit: float = 200.0
    k_ax: float = 2.0e4
    loadcell_noise_sd: float = 0.2

    def __post_init__(self):
        if not 0 < self.l_min < self.l_max:
            raise ValueError("need 0 < l_min < l_max")
        if self.v_max <= 0:
            raise ValueError("v_max must be positive")
        if not 0 <= self.u_dz < 1:
            raise ValueError("u_dz must lie in [0, 1)")
        if self.k_ax <= 0 or self.k_v < 0 or self.force_limit <= 0 or self.loadcell_noise_sd < 0:
            raise ValueError("k_ax, force_limit must be positive; k_v, noise must be non-negative")

    @classmethod
    def from_config(cls, cfg: dict | None = None) -> "ActuatorModel":
        c = load_defaults()["actuator"]
        c.update(cfg or {})
        return cls(
            l_min=c["l_min_m"], l_max=c["l_max_m"], v_max=c["v_max_m_per_s"], u_dz=c["u_dz"],
            k_v=c["k_v_m_per_s"], force_limit=c["force_limit_N"], k_ax=c["k_ax_N_per_m"],
            loadcell_noise_sd=c["loadcell_noise_sd_N"],
        )

    def ideal(self) -> "ActuatorModel":
        """Same actuator without dead zone or sensor noise."""
        return replace(self, u_dz=0.0, loadcell_noise_sd=0.0)


@dataclass(frozen=True)
class PiGains:
    k_p: float = 0.02
    k_i: float = 0.05
    integrator_limit: float = 1.0

    def __post_init__(self):
        if self.k_p < 0 or self.k_i < 0 or self.integrator_limit <= 0:
            raise ValueError("PI gains must be non-negative and the integrator limit positive")

    @classmethod
    def from_config(cls, cfg: dict | None = None) -> "PiGains":
        c = load_defaults()["gains"]
        c.update(cfg or {})
        return cls(k_p=c["k_p_per_N"], k_i=c["k_i_per_N_s"], integrator_limit=c["integrator_limit"])


@dataclass(frozen=True)
class ActuatorState:
    length: float | np.ndarray
    measured_force: float | np.ndarray = 0.0
    integrator: float | np.ndarray = 0.0
    commanded_force: float | np.ndarray = 0.0
    saturated: bool | np.ndarray = False


def pi_step(state: ActuatorState, lam_cmd, dt: float, gains: PiGains):
    """One PI update.  Returns ``(u, integrator)``; ``u`` is clipped to [-1, 1]."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    err = np.asarray(lam_cmd, dtype=float) - state.measured_force
    integ = np.clip(state.integrator + gains.k_i * err * dt, -gains.integrator_limit, gains.integrator_limit)
    u = np.clip(gains.k_p * err + integ, -1.0, 1.0)
    if np.ndim(u) == 0:
        return float(u), float(integ)
    return u, integ


def dead_zone(u, model: ActuatorModel):
    """Drive speed (m/s, positive = retracting) produced by duty ``u``."""
    u = np.asarray(u, dtype=float)
    mag = np.abs(u) - model.u_dz
    v = np.where(mag > 0.0, np.sign(u) * model.k_v * mag, 0.0)
    v = np.clip(v, -model.v_max, model.v_max)
    return float(v) if v.ndim == 0 else v


def advance(state: ActuatorState, lam_cmd, dt: float, model: ActuatorModel, gains: PiGains) -> ActuatorState:
    """PI, dead zone and length integration; the measured force is left as is."""
    u, integ = pi_step(state, lam_cmd, dt, gains)
    v = dead_zone(u, model)
    raw = state.length - v * dt
    length = np.clip(raw, model.l_min, model.l_max)
    saturated = raw != length
    if np.ndim(length) == 0:
        length, saturated = float(length), bool(saturated)
    return replace(state, length=length, integrator=integ, commanded_force=lam_cmd, saturated=saturated)


@dataclass(frozen=True)
class FixtureLoad:
    """A member pushing into a fixed load cell.

    Beyond ``contact_length`` the member is compressed with ``stiffness``;
    the returned force is negative (compression) in that range.
    """

    contact_length: float
    stiffness: float
    preload: float = 0.0

    def force(self, length):
        deflection = np.maximum(np.asarray(length, dtype=float) - self.contact_length, 0.0)
        f = self.preload - self.stiffness * deflection
        return float(f) if np.ndim(f) == 0 else f


def actuator_step(state: ActuatorState, lam_cmd, dt: float, model: ActuatorModel, gains: PiGains,
                  load, rng: np.random.Generator | None = None) -> ActuatorState:
    """Advance a member against a load that maps length to member force.

    ``load`` needs a ``force(length)`` method (see :class:`FixtureLoad`).
    Loadcell noise is drawn from ``rng`` when one is given.
    """
    nxt = advance(state, lam_cmd, dt, model, gains)
    force = load.force(nxt.length)
    if rng is not None and model.loadcell_noise_sd > 0:
        force = force + rng.normal(0.0, model.loadcell_noise_sd, size=np.shape(force))
        if np.ndim(force) == 0:
            force = float(force)
    return replace(nxt, measured_force=force)
