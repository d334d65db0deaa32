"""Self-verification suite: exact invariants plus the Monte-Carlo lemma
checks, sized by a trials budget.  Used by the ``verify`` CLI subcommand;
the pytest suite covers the same ground (and more) at fixed budgets.

Statistical tolerances widen to 4.5 standard errors when the budget is
below the tolerance's reference sample count, so a correct build passes
deterministically at any budget >= 1e5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import sensing
from .core import dist_phase_aligned, inner, phase_diff_bound_check
from .regularity import (
    dir_deriv_f,
    objective_f,
    second_dir_deriv_at_signal,
    second_dir_deriv_fi,
    span_projection_mass_mc,
    validate_lemmas,
    wedge,
)
from .seeding import derive_seed
from .solver import SolverConfig, SolverState, project_magnitude, solve, step
from .spectral import SpectralConfig, spectral_init, truncated_covariance

__all__ = ["CheckResult", "run_verification"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _unit(rng, n):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def _check_inner_product(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 12))
        a, b = _unit(rng, n) * 2.0, _unit(rng, n)
        sym = abs(inner(a, b) - np.conj(inner(b, a)))
        self_ip = inner(a, a)
        norm_gap = abs(self_ip.real - np.linalg.norm(a) ** 2)
        worst = max(worst, sym, norm_gap, abs(self_ip.imag))
    return CheckResult("inner_product_identities", worst <= 1e-12, f"worst dev {worst:.2e}")


def _check_aligned_distance(seed):
    rng = np.random.default_rng(seed)
    thetas = np.linspace(0.0, 2.0 * np.pi, 1_000_000, endpoint=False)
    rot = np.exp(1j * thetas)
    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(2, 8))
        x, z = _unit(rng, n) * 1.3, _unit(rng, n)
        d = dist_phase_aligned(x, z)
        # independent oracle: explicit minimization over the phase grid
        grid = np.sqrt(
            np.abs(x[None, :] - rot[:, None] * z[None, :]) ** 2 @ np.ones(n)
        ).min()
        worst = max(worst, abs(d.aligned - grid))
        phase_inv = abs(
            dist_phase_aligned(np.exp(1j * rng.uniform(0, 2 * np.pi)) * x, z).aligned
            - d.aligned
        )
        worst = max(worst, phase_inv)
        if d.aligned > d.raw + 1e-12:
            return CheckResult("aligned_distance", False, "aligned exceeded raw")
    return CheckResult("aligned_distance", worst <= 1e-8, f"worst dev {worst:.2e}")


def _check_phase_diff_bound(seed, trials):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(trials) + 1j * rng.standard_normal(trials)
    z = rng.standard_normal(trials) + 1j * rng.standard_normal(trials)
    ok = phase_diff_bound_check(x, z)
    bad = int(trials - np.count_nonzero(ok))
    return CheckResult("phase_diff_bound", bad == 0, f"{bad} violations in {trials}")


def _check_sphere_sampler(seed, trials):
    m = max(10_000, min(trials, 200_000))
    ens = sensing.sample_sphere(4, m, seed)
    norm_dev = float(np.abs(np.linalg.norm(ens.vectors, axis=1) - 1.0).max())
    again = sensing.sample_sphere(4, m, seed)
    identical = bool(np.array_equal(ens.vectors, again.vectors))
    w = sensing.sample_unit_vector(4, seed + 1)
    mean_sq = float(np.mean(np.abs(ens.vectors.conj() @ w) ** 2))
    tol = max(0.05 / 4, 4.5 * math.sqrt(2.0 / m) / 4)
    ok = norm_dev <= 1e-12 and identical and abs(mean_sq - 0.25) <= tol
    return CheckResult(
        "sphere_sampler",
        ok,
        f"norm dev {norm_dev:.2e}, reproducible {identical}, mean|a^*w|^2 {mean_sq:.5f}",
    )


def _check_unitary_sampler(seed):
    n, K = 8, 16
    ens = sensing.sample_block_unitary(n, K, seed)
    worst_u = 0.0
    worst_p = 0.0
    w = sensing.sample_unit_vector(n, seed + 1)
    eye = np.eye(n)
    for k in range(K):
        block = ens.vectors[k * n : (k + 1) * n].T  # columns are the sensing vectors
        worst_u = max(worst_u, float(np.abs(block.conj().T @ block - eye).max()))
        mass = float(np.sum(np.abs(block.conj().T @ w) ** 2))
        worst_p = max(worst_p, abs(mass - 1.0))
    ok = worst_u <= 1e-12 and worst_p <= 1e-10
    return CheckResult(
        "unitary_sampler", ok, f"unitarity dev {worst_u:.2e}, Parseval dev {worst_p:.2e}"
    )


def _check_projection(seed):
    rng = np.random.default_rng(seed)
    thetas = np.linspace(0.0, 2.0 * np.pi, 1_000_000, endpoint=False)
    cos_t, sin_t = np.cos(thetas), np.sin(thetas)
    worst_gap = 0.0
    worst_feas = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 9))
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        y = abs(rng.standard_normal())
        w = project_magnitude(x, a, y)
        s = np.vdot(a, x)
        na = np.linalg.norm(a)
        d2 = y * y + abs(s) ** 2 - 2.0 * y * (cos_t * s.real + sin_t * s.imag)
        oracle = math.sqrt(max(float(d2.min()), 0.0)) / na
        worst_gap = max(worst_gap, abs(float(np.linalg.norm(w - x)) - oracle))
        worst_feas = max(worst_feas, abs(abs(np.vdot(a, w)) - y) / max(y, 1e-30))
    ok = worst_gap <= 1e-8 and worst_feas <= 1e-10
    return CheckResult(
        "projection_vs_phase_grid",
        ok,
        f"distance gap {worst_gap:.2e}, feasibility rel dev {worst_feas:.2e}",
    )


def _check_contraction_identity(seed):
    rng = np.random.default_rng(seed)
    n, m = 8, 64
    worst = 0.0
    for rep in range(100):
        ens = sensing.sample_sphere(n, m, derive_seed(seed, rep))
        z = sensing.sample_unit_vector(n, rng)
        y = sensing.measure(ens, z)
        while True:
            x = z + 0.4 * _unit(rng, n)
            if np.abs(ens.vectors.conj() @ x).min() > 1e-6:
                break
        lhs = np.mean(
            [
                np.linalg.norm(project_magnitude(x, ens.vectors[i], y.values[i]) - z) ** 2
                for i in range(m)
            ]
        )
        rhs = (
            objective_f(ens, y, x)
            + dir_deriv_f(ens, y, x, z - x)
            + np.linalg.norm(z - x) ** 2
        )
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    return CheckResult("contraction_identity", worst <= 1e-10, f"worst rel dev {worst:.2e}")


def _check_derivatives(seed):
    rng = np.random.default_rng(seed)
    n, m = 4, 20
    worst1 = 0.0
    for rep in range(50):
        ens = sensing.sample_sphere(n, m, derive_seed(seed, 10, rep))
        z = sensing.sample_unit_vector(n, rng)
        y = sensing.measure(ens, z)
        while True:
            x = z + 0.5 * _unit(rng, n)
            v = _unit(rng, n)
            if np.abs(ens.vectors.conj() @ x).min() < 1e-3:
                continue
            d = dir_deriv_f(ens, y, x, v)
            if abs(d) >= 5e-2:  # slope must dominate the O(t) truncation term
                break
        t = 1e-6
        fd = (objective_f(ens, y, x + t * v) - objective_f(ens, y, x)) / t
        worst1 = max(worst1, abs(fd - d) / abs(d))
    worst2 = 0.0
    for rep in range(50):
        a = _unit(rng, 3)
        z = _unit(rng, 3)
        while True:
            x = _unit(rng, 3) * 1.2
            v = _unit(rng, 3)
            if abs(np.vdot(a, x)) < 0.1:
                continue
            d2 = second_dir_deriv_fi(a, z, x, v)
            if abs(d2) >= 1e-3:
                break
        t = 1e-4
        yv = abs(np.vdot(a, z))

        def fi(pt):
            return (yv - abs(np.vdot(a, pt))) ** 2

        fd2 = (fi(x + t * v) - 2.0 * fi(x) + fi(x - t * v)) / (t * t)
        worst2 = max(worst2, abs(fd2 - d2) / abs(d2))
    ok = worst1 <= 1e-4 and worst2 <= 1e-3
    return CheckResult(
        "directional_derivatives", ok, f"f' rel dev {worst1:.2e}, f'' rel dev {worst2:.2e}"
    )


def _check_curvature_bounds(seed):
    rng = np.random.default_rng(seed)
    n, m = 6, 40
    for rep in range(20):
        ens = sensing.sample_sphere(n, m, derive_seed(seed, 20, rep))
        z = sensing.sample_unit_vector(n, rng)
        v = _unit(rng, n)
        w1 = second_dir_deriv_at_signal(ens, z, v)
        cap = 2.0 * np.abs(ens.vectors.conj() @ v) ** 2
        if np.any(w1 < 0.0) or np.any(w1 > cap * (1.0 + 1e-12)):
            return CheckResult("curvature_bounds", False, "bound violated")
    return CheckResult("curvature_bounds", True, "0 <= f''_i(z) <= 2|a^*v|^2 held")


def _check_wedge_monotonicity(seed):
    rng = np.random.default_rng(seed)
    ens = sensing.sample_sphere(5, 200, seed)
    z = sensing.sample_unit_vector(5, rng)
    v = _unit(rng, 5)
    betas = [0.1, 0.5, 1.0, 2.0, 5.0]
    sets = [set(wedge(ens, z, v, b).indices.tolist()) for b in betas]
    ok = all(sets[i] <= sets[i + 1] for i in range(len(sets) - 1))
    full = set(wedge(ens, z, z, 1.0).indices.tolist()) == set(range(200))
    return CheckResult("wedge_monotonicity", ok and full, f"sizes {[len(s) for s in sets]}")


def _check_spectral(seed):
    ens = sensing.sample_sphere(12, 600, seed)
    z = sensing.sample_unit_vector(12, seed + 1)
    y = sensing.measure(ens, z)
    cfg = SpectralConfig(seed=seed + 2)
    Y, lam0 = truncated_covariance(ens, y, cfg.truncation_multiplier)
    herm = float(np.abs(Y - Y.conj().T).max())
    x0 = spectral_init(ens, y, cfg)
    norm_dev = abs(float(np.linalg.norm(x0)) - lam0)
    y2 = sensing.measure(ens, np.exp(0.7j) * z)
    x0b = spectral_init(ens, y2, cfg)
    equiv = float(np.linalg.norm(x0 - x0b))
    ok = herm <= 1e-12 and norm_dev <= 1e-10 and equiv <= 1e-10
    return CheckResult(
        "spectral_init",
        ok,
        f"hermitian dev {herm:.2e}, norm dev {norm_dev:.2e}, phase equivariance {equiv:.2e}",
    )


def _check_solver_determinism(seed):
    ens = sensing.sample_sphere(6, 60, seed)
    z = sensing.sample_unit_vector(6, seed + 1)
    y = sensing.measure(ens, z)
    cfg = SolverConfig(max_iters=300, tol_aligned_rel=1e-12, seed=seed + 2)
    x0 = sensing.sample_unit_vector(6, seed + 3)
    s1 = solve(ens, y, x0, cfg, z=z)
    s2 = solve(ens, y, x0, cfg, z=z)
    identical = bool(np.array_equal(s1.x, s2.x)) and s1.history == s2.history
    state = SolverState(x=np.array(x0), rng=np.random.default_rng(seed + 4))
    step_cfg = SolverConfig(max_iters=1, tol_residual=1.0, seed=0)
    worst = 0.0
    for _ in range(50):
        replay = np.random.default_rng()
        replay.bit_generator.state = state.rng.bit_generator.state
        i = int(replay.integers(ens.m))  # the row the next step will draw
        step(state, ens, y, step_cfg)
        worst = max(
            worst,
            abs(abs(np.vdot(ens.vectors[i], state.x)) - y.values[i]) / y.values[i],
        )
    ok = identical and worst <= 1e-10
    return CheckResult(
        "solver_determinism_and_constraint",
        ok,
        f"reproducible {identical}, worst post-step constraint dev {worst:.2e}",
    )


def run_verification(trials: int, seed: int) -> tuple[list[CheckResult], bool]:
    """Run every invariant and lemma check; returns (results, all_passed)."""
    trials = max(int(trials), 100_000)
    results = [
        _check_inner_product(derive_seed(seed, 101)),
        _check_aligned_distance(derive_seed(seed, 102)),
        _check_phase_diff_bound(derive_seed(seed, 103), trials),
        _check_sphere_sampler(derive_seed(seed, 104), trials),
        _check_unitary_sampler(derive_seed(seed, 105)),
        _check_projection(derive_seed(seed, 106)),
        _check_contraction_identity(derive_seed(seed, 107)),
        _check_derivatives(derive_seed(seed, 108)),
        _check_curvature_bounds(derive_seed(seed, 109)),
        _check_wedge_monotonicity(derive_seed(seed, 110)),
        _check_spectral(derive_seed(seed, 111)),
        _check_solver_determinism(derive_seed(seed, 112)),
    ]
    report = validate_lemmas(4, trials, derive_seed(seed, 113))
    for check in report.checks:
        results.append(
            CheckResult(
                f"lemma_{check.name}",
                check.passed,
                f"estimate {check.estimate:.5f}, target {check.target:.5f}, tol {check.tol:.4g}",
            )
        )
    for n in (16, 64):
        mass = span_projection_mass_mc(n, trials, derive_seed(seed, 114, n))
        results.append(
            CheckResult(
                f"lemma_projection_mass_n{n}",
                mass >= 0.74,
                f"estimate {mass:.5f}, threshold 0.74",
            )
        )
    return results, all(r.passed for r in results)
