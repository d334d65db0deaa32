"""Randomized row-action solver for magnitude measurements.

Each step picks one row a_i and replaces the iterate with its nearest
point on the nonconvex set {w : |a_i^* w| = y_i}, which has a closed-form
nearest-point map.  With unit-norm rows and step size 1 this coincides
with stochastic gradient descent on the mean squared magnitude residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import dist_phase_aligned
from .regularity import objective_f

__all__ = [
    "ROW_UNIFORM",
    "ROW_INVERSE_NORM",
    "SolverConfig",
    "SolverState",
    "project_magnitude",
    "step",
    "solve",
]

ROW_UNIFORM = "uniform"
ROW_INVERSE_NORM = "inverse_norm"
_ROW_RULES = (ROW_UNIFORM, ROW_INVERSE_NORM)


@dataclass
class SolverConfig:
    """Iteration budget, stopping rule, and row-selection rule.

    Exactly one of the tolerances must be set: ``tol_aligned_rel`` stops on
    phase-aligned error relative to ||z|| (needs the true signal; experiment
    mode), ``tol_residual`` stops on the objective value (blind mode,
    checked at history samples).  ``history_stride`` defaults to one epoch
    (n iterations) when None.
    """

    max_iters: int
    tol_aligned_rel: float | None = None
    tol_residual: float | None = None
    row_rule: str = ROW_UNIFORM
    zero_threshold: float = 1e-14
    seed: int = 0
    history_stride: int | None = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.zero_threshold <= 0.0:
            raise ValueError("zero_threshold must be positive")
        if self.row_rule not in _ROW_RULES:
            raise ValueError(f"unknown row rule {self.row_rule!r}")
        if (self.tol_aligned_rel is None) == (self.tol_residual is None):
            raise ValueError("exactly one of tol_aligned_rel / tol_residual must be set")
        if self.history_stride is not None and self.history_stride < 1:
            raise ValueError("history_stride must be >= 1")


@dataclass
class SolverState:
    """Single-owner iteration state; ``step`` mutates it in place.

    ``history`` holds (k, raw_error, aligned_error, residual) tuples with
    strictly increasing k; error entries are NaN when no reference signal
    is available.
    """

    x: np.ndarray
    k: int = 0
    rng: np.random.Generator = field(default_factory=np.random.default_rng)
    history: list = field(default_factory=list)


def project_magnitude(x, a, y: float, tau: float = 1e-14) -> np.ndarray:
    """Nearest point to x on {w : |a^* w| = y}.

    With s = a^* x, the nearest point keeps the phase of s:

        w = x - (1 - y / |s|) * s * a / ||a||^2

    and satisfies |a^* w| = y.  When |s| < tau the phase of s is
    meaningless; the offset phase is then pinned to 1, a deterministic
    choice (the event has probability zero under the sampling models
    used here, and determinism beats a random tie-break for replay).
    """
    x = np.asarray(x, dtype=complex)
    a = np.asarray(a, dtype=complex)
    if x.shape != a.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {a.shape}")
    na2 = np.vdot(a, a).real
    if na2 == 0.0:
        raise ValueError("sensing vector must be nonzero")
    s = np.vdot(a, x)
    sa = abs(s)
    if sa >= tau:
        return x - ((1.0 - y / sa) * s / na2) * a
    return x + (y / na2) * a


def _draw_row(rng: np.random.Generator, ensemble, rule: str) -> int:
    if rule == ROW_UNIFORM:
        return int(rng.integers(ensemble.m))
    # probability proportional to 1 / ||a_i||^2; identical to uniform for
    # unit-norm rows, but the draw consumes the stream differently
    w = 1.0 / np.sum(np.abs(ensemble.vectors) ** 2, axis=1)
    return int(rng.choice(ensemble.m, p=w / w.sum()))


def step(state: SolverState, ensemble, y, cfg: SolverConfig) -> SolverState:
    """One randomized projection step; mutates and returns ``state``."""
    i = _draw_row(state.rng, ensemble, cfg.row_rule)
    state.x = project_magnitude(
        state.x, ensemble.vectors[i], float(y.values[i]), cfg.zero_threshold
    )
    state.k += 1
    return state


def solve(ensemble, y, x0, cfg: SolverConfig, z=None) -> SolverState:
    """Iterate ``step`` until a stopping rule fires or max_iters is reached.

    In aligned-error mode the stopping test runs every iteration (O(n));
    the residual is evaluated at history samples only (O(mn)).  The final
    state is always the last history entry.
    """
    if y.ensemble_ref != ensemble.ident:
        raise ValueError("measurement set does not belong to this ensemble")
    if len(y.values) != ensemble.m:
        raise ValueError("measurement count does not match ensemble")
    x0 = np.asarray(x0, dtype=complex)
    if x0.shape != (ensemble.n,):
        raise ValueError(f"x0 dimension {x0.shape} does not match n={ensemble.n}")
    experiment = cfg.tol_aligned_rel is not None
    if experiment and z is None:
        raise ValueError("aligned-error stopping requires the true signal z")

    stride = cfg.history_stride if cfg.history_stride is not None else ensemble.n
    state = SolverState(
        x=np.array(x0, dtype=complex),
        k=0,
        rng=np.random.default_rng(int(cfg.seed)),
        history=[],
    )
    nz = float(np.linalg.norm(z)) if z is not None else math.nan

    def aligned_error() -> float:
        return dist_phase_aligned(state.x, z).aligned

    def sample_history():
        if z is not None:
            d = dist_phase_aligned(state.x, z)
            raw, aligned = d.raw, d.aligned
        else:
            raw, aligned = math.nan, math.nan
        res = objective_f(ensemble, y, state.x)
        state.history.append((state.k, raw, aligned, res))
        return aligned, res

    aligned, res = sample_history()
    if experiment and aligned <= cfg.tol_aligned_rel * nz:
        return state
    if not experiment and res <= cfg.tol_residual:
        return state

    while state.k < cfg.max_iters:
        step(state, ensemble, y, cfg)
        if experiment:
            if aligned_error() <= cfg.tol_aligned_rel * nz:
                sample_history()
                return state
            if state.k % stride == 0:
                sample_history()
        elif state.k % stride == 0:
            _, res = sample_history()
            if res <= cfg.tol_residual:
                return state

    if state.history[-1][0] != state.k:
        sample_history()
    return state
