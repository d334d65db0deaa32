import numpy as np
import pytest

from kaczmarz_pr import dist_phase_aligned, inner, norm, phase_diff_bound_check


def unit(rng, n):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def e(k, n):
    v = np.zeros(n, dtype=complex)
    v[k] = 1.0
    return v


def grid_aligned(x, z, points):
    # independent oracle: direct minimization over a phase grid
    thetas = np.linspace(0.0, 2.0 * np.pi, points, endpoint=False)
    diffs = x[None, :] - np.exp(1j * thetas)[:, None] * z[None, :]
    return float(np.sqrt((np.abs(diffs) ** 2).sum(axis=1)).min())


class TestInner:
    def test_identity_cases(self):
        n = 3
        assert inner(e(0, n), e(0, n)) == 1.0 + 0.0j
        assert inner(e(0, n), e(1, n)) == 0.0 + 0.0j
        assert inner(1j * e(0, n), e(0, n)) == -1j  # conjugation of first argument

    def test_conjugate_symmetry_and_norm(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            n = int(rng.integers(1, 10))
            a = unit(rng, n) * rng.uniform(0.5, 2.0)
            b = unit(rng, n)
            assert abs(inner(a, b) - np.conj(inner(b, a))) <= 1e-12
            ip = inner(a, a)
            assert abs(ip.real - norm(a) ** 2) <= 1e-12
            assert abs(ip.imag) <= 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            inner(np.ones(2, dtype=complex), np.ones(3, dtype=complex))


class TestPhaseAlignedDistance:
    def test_equal_vectors(self):
        z = unit(np.random.default_rng(1), 5)
        d = dist_phase_aligned(z, z)
        assert d.raw == 0.0
        assert d.aligned == 0.0

    def test_pure_phase_rotation(self):
        z = unit(np.random.default_rng(2), 4)
        x = np.exp(1j * np.pi / 3) * z
        d = dist_phase_aligned(x, z)
        assert d.aligned <= 1e-12
        assert abs(d.raw - abs(1 - np.exp(1j * np.pi / 3))) <= 1e-12  # = 1

    def test_matches_phase_grid(self):
        rng = np.random.default_rng(3)
        x = unit(rng, 4) * 1.3
        z = unit(rng, 4)
        d = dist_phase_aligned(x, z)
        assert abs(d.aligned - grid_aligned(x, z, 1_000_000)) <= 1e-8

    def test_closed_form_fine_grid(self):
        rng = np.random.default_rng(4)
        x = unit(rng, 6) * 0.9
        z = unit(rng, 6)
        d = dist_phase_aligned(x, z)
        closed = np.sqrt(norm(x) ** 2 + norm(z) ** 2 - 2 * abs(inner(x, z)))
        assert abs(d.aligned - closed) <= 1e-12
        assert abs(d.aligned - grid_aligned(x, z, 10_000_000)) <= 1e-10

    def test_phase_invariance_and_ordering(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            n = int(rng.integers(2, 8))
            x = unit(rng, n) * rng.uniform(0.5, 1.5)
            z = unit(rng, n)
            d = dist_phase_aligned(x, z)
            rotated = dist_phase_aligned(np.exp(1j * rng.uniform(0, 2 * np.pi)) * x, z)
            assert abs(rotated.aligned - d.aligned) <= 1e-10
            assert d.aligned <= d.raw + 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            dist_phase_aligned(np.ones(2, dtype=complex), np.ones(3, dtype=complex))


class TestPhaseDiffBound:
    def test_trivial_cases(self):
        assert phase_diff_bound_check(1.0 + 0j, 1.0 + 0j)
        assert phase_diff_bound_check(-1.0 + 0j, 1.0 + 0j)  # bound tight at 2

    def test_million_random_pairs(self):
        rng = np.random.default_rng(6)
        x = rng.standard_normal(1_000_000) + 1j * rng.standard_normal(1_000_000)
        z = rng.standard_normal(1_000_000) + 1j * rng.standard_normal(1_000_000)
        assert bool(np.all(phase_diff_bound_check(x, z)))

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            phase_diff_bound_check(0.0 + 0j, 1.0 + 0j)
        with pytest.raises(ValueError):
            phase_diff_bound_check(1.0 + 0j, 0.0 + 0j)
