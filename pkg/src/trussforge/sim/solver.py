"""Node positions from member lengths (inverse of ``L = f(P)``)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NoConvergence, UnderConstrained
from ..truss import TrussTopology, as_positions, forward_lengths, inverse_jacobian


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 50
    tolerance: float = 1e-6  # m, on the length residual
    damping: float = 1e-3  # initial Levenberg parameter
    step_limit: float = 0.05  # m per iteration

    def __post_init__(self):
        if self.tolerance <= 0 or self.max_iterations < 1 or self.step_limit <= 0 or self.damping < 0:
            raise ValueError("invalid solver configuration")

    @classmethod
    def from_config(cls, cfg: dict) -> "SolverConfig":
        return cls(max_iterations=int(cfg["max_iterations"]), tolerance=float(cfg["tolerance_m"]),
                   damping=float(cfg["damping"]), step_limit=float(cfg["step_limit_m"]))


@dataclass(frozen=True)
class SolveResult:
    positions: np.ndarray
    iterations: int
    residual: float  # max |f(P) - L| over members touching a free node
    least_squares: bool = False  # True when lengths were incompatible and P is the best fit


def solve_positions(topology: TrussTopology, lengths, guess, anchor_positions=None,
                    config: SolverConfig | None = None, check_rank: bool = True) -> SolveResult:
    """Damped Gauss-Newton (Levenberg-Marquardt) fit of free coordinates to ``lengths``.

    Anchored nodes (and the fixed axes of guided nodes) keep their coordinates
    from ``guess`` unless ``anchor_positions`` overrides them.  Steps are
    capped at ``config.step_limit`` so the iterate cannot jump to the mirror
    configuration.  Over-determined, incompatible length sets converge to the
    least-squares configuration, flagged in the result.
    """
    cfg = config or SolverConfig()
    P = as_positions(guess, topology.node_count).copy()
    if anchor_positions is not None:
        for k, p in dict(anchor_positions).items():
            P[k] = p
    L = np.asarray(lengths, dtype=float)
    rows = np.flatnonzero(topology.active_members)
    cols = topology.free_coords
    if cols.size == 0:
        return SolveResult(P, 0, 0.0)
    L = L[rows]
    flat = P.ravel()

    def evaluate(x):
        return forward_lengths(topology, x.reshape(-1, 3))[rows] - L

    r = evaluate(flat)
    cost = r @ r
    mu = cfg.damping
    over = rows.size > cols.size
    A = None
    for it in range(cfg.max_iterations + 1):
        if np.max(np.abs(r)) <= cfg.tolerance:
            return SolveResult(flat.reshape(-1, 3), it, float(np.max(np.abs(r))))
        if it == cfg.max_iterations:
            break
        Jf = inverse_jacobian(topology, flat.reshape(-1, 3))[np.ix_(rows, cols)]
        JtJ = Jf.T @ Jf
        if check_rank and A is None:
            s = np.linalg.svd(Jf, compute_uv=False)
            if s.size < cols.size or s[-1] <= s[0] * 1e-9:
                raise UnderConstrained(f"free-coordinate Jacobian has rank {int(np.sum(s > s[0] * 1e-9))} < {cols.size}")
        g = Jf.T @ r
        if over and np.max(np.abs(g)) <= cfg.tolerance * 1e-3:
            return SolveResult(flat.reshape(-1, 3), it, float(np.max(np.abs(r))), least_squares=True)
        while True:
            A = JtJ + mu * np.diag(np.diag(JtJ) + 1e-12)
            step = -np.linalg.solve(A, g)
            big = np.max(np.abs(step))
            if big > cfg.step_limit:
                step *= cfg.step_limit / big
            trial = flat.copy()
            trial[cols] += step
            r_new = evaluate(trial)
            cost_new = r_new @ r_new
            if cost_new < cost or cost_new <= (cfg.tolerance ** 2):
                flat, r, cost = trial, r_new, cost_new
                mu = max(mu / 10.0, 1e-12)
                break
            mu *= 10.0
            if mu > 1e12:
                if over:
                    return SolveResult(flat.reshape(-1, 3), it + 1, float(np.max(np.abs(r))), least_squares=True)
                raise NoConvergence(f"step rejected at every damping level (residual {np.max(np.abs(r)):.3e} m)")
    raise NoConvergence(f"no convergence in {cfg.max_iterations} iterations (residual {np.max(np.abs(r)):.3e} m)")
