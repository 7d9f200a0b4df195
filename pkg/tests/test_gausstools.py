import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.stats import norm

from bvm.errors import InvalidInput, SingularMatrix
from bvm.gausstools import (
    gauss_shifted_tail,
    kl_gaussians,
    rescale_tv_penalty,
    tv_pinsker,
    z_lower,
    z_quantile,
    z_score_bound,
)


def kl_quadrature_1d(u2, beta):
    """KL(N(0,1), N(beta, 1/u2)) by integrating f0 log(f0/f1)."""
    sd1 = 1.0 / math.sqrt(u2)

    def integrand(t):
        return norm.pdf(t) * (norm.logpdf(t) - norm.logpdf(t, loc=beta, scale=sd1))

    val, _ = integrate.quad(integrand, -40, 40, epsabs=1e-13, epsrel=1e-13, limit=400)
    return val


def tv_quadrature_1d(u2, beta):
    sd1 = 1.0 / math.sqrt(u2)
    val, _ = integrate.quad(lambda t: abs(norm.pdf(t) - norm.pdf(t, loc=beta, scale=sd1)),
                            -40, 40, epsabs=1e-12, limit=400, points=[0.0, beta])
    return 0.5 * val


class TestZQuantile:
    def test_p1_x1(self):
        assert z_quantile(1, 1.0) ** 2 == pytest.approx(7.6)
        assert z_quantile(1, 1.0) == pytest.approx(2.7568, abs=1e-4)

    def test_small_x_tends_to_p(self):
        assert z_quantile(7, 1e-12) ** 2 == pytest.approx(7.0, abs=1e-4)

    @pytest.mark.parametrize("x", [0.0, -1.0])
    def test_rejects_nonpositive_x(self, x):
        with pytest.raises(InvalidInput):
            z_quantile(3, x)

    def test_monte_carlo_p5_x2(self):
        rng = np.random.default_rng(5)
        norms = np.linalg.norm(rng.standard_normal((1_000_000, 5)), axis=1)
        hit = np.mean(norms >= z_quantile(5, 2.0))
        se = math.sqrt(math.exp(-2) * (1 - math.exp(-2)) / 1e6)
        assert hit <= math.exp(-2) + 3 * se

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 200), st.floats(1e-3, 50))
    def test_monotone_in_x(self, p, x):
        assert z_quantile(p, x) <= z_quantile(p, 1.5 * x)


class TestZLower:
    def test_p100_x1(self):
        assert z_lower(100, 1.0) ** 2 == pytest.approx(80.0)
        assert z_lower(100, 1.0) == pytest.approx(8.944, abs=1e-3)

    def test_small_x(self):
        assert z_lower(9, 1e-14) ** 2 == pytest.approx(9.0, abs=1e-5)

    def test_degenerate_boundary(self):
        with pytest.raises(InvalidInput):
            z_lower(16, 4.0)

    def test_monte_carlo_lower_tail(self):
        rng = np.random.default_rng(6)
        norms = np.linalg.norm(rng.standard_normal((200_000, 50)), axis=1)
        hit = np.mean(norms <= z_lower(50, 1.0))
        assert hit <= math.exp(-1.0) + 3 * math.sqrt(math.exp(-1) / 2e5)


class TestZScoreBound:
    def test_formula(self):
        assert z_score_bound(5, 2, 1.0) ** 2 == pytest.approx(17.0)
        assert z_score_bound(5, 2, 1.0) == pytest.approx(4.123, abs=1e-3)

    def test_small_x(self):
        assert z_score_bound(5, 2, 1e-14) ** 2 == pytest.approx(5.0)

    @pytest.mark.parametrize("args", [(1, 2, 1.0), (5, 0, 1.0), (5, 2, 0.0)])
    def test_invalid(self, args):
        with pytest.raises(InvalidInput):
            z_score_bound(*args)

    def test_dominates_monte_carlo_quantile(self):
        rng = np.random.default_rng(7)
        sq = np.sum(rng.standard_normal((1_000_000, 5)) ** 2, axis=1)
        assert z_score_bound(5, 1, 2.0) ** 2 >= np.quantile(sq, 1 - math.exp(-2))


class TestShiftedTail:
    def test_formula(self):
        assert gauss_shifted_tail(2, 0.0, 3.0) == pytest.approx(math.exp(-9 / 4 + 1), rel=1e-12)
        assert gauss_shifted_tail(2, 0.0, 3.0) == pytest.approx(0.2865, abs=1e-4)

    def test_vanishes_for_large_z(self):
        assert gauss_shifted_tail(3, 1.0, 100.0) < 1e-300

    def test_monte_carlo_p3_u1_z5(self):
        rng = np.random.default_rng(8)
        u = np.array([1.0, 0.0, 0.0])
        hit = np.mean(np.linalg.norm(rng.standard_normal((1_000_000, 3)) - u, axis=1) >= 5.0)
        assert hit <= gauss_shifted_tail(3, 1.0, 5.0)


class TestKl:
    def test_identity(self):
        assert kl_gaussians(np.eye(4), np.zeros(4)) == 0.0

    def test_scalar_case(self):
        expected = (-math.log(1.2) + 0.2 + 1.2 * 0.09) / 2
        val = kl_gaussians(np.array([[math.sqrt(1.2)]]), np.array([0.3]))
        assert val == pytest.approx(expected, rel=1e-12)
        assert val == pytest.approx(0.06284, abs=1e-5)
        assert abs(val - kl_quadrature_1d(1.2, 0.3)) <= 1e-6

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_quadrature(self, seed):
        rng = np.random.default_rng(seed)
        u2, beta = rng.uniform(0.3, 3.0), rng.uniform(-2, 2)
        assert abs(kl_gaussians([[math.sqrt(u2)]], [beta]) - kl_quadrature_1d(u2, beta)) <= 1e-6

    def test_singular(self):
        with pytest.raises(SingularMatrix):
            kl_gaussians(np.array([[1.0, 0.0], [1.0, 0.0]]), np.zeros(2))

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInput):
            kl_gaussians(np.eye(2), np.zeros(3))

    def test_bound_random(self):
        rng = np.random.default_rng(9)
        for _ in range(200):
            p = int(rng.integers(1, 8))
            a = rng.standard_normal((p, p))
            sym = (a + a.T) / 2
            sym *= rng.uniform(0, 0.4) / max(np.linalg.norm(sym, 2), 1e-12)
            # U^T U = I + sym, with ||U^T U - I|| <= 0.4
            u = np.linalg.cholesky(np.eye(p) + sym).T
            beta = rng.standard_normal(p) * rng.uniform(0, 2)
            assert 2 * kl_gaussians(u, beta) <= 0.16 * p + 1.4 * beta @ beta + 1e-12

    def test_rotation_invariance(self):
        rng = np.random.default_rng(10)
        u = rng.standard_normal((4, 4)) + 3 * np.eye(4)
        beta = rng.standard_normal(4)
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        assert abs(kl_gaussians(u @ q.T, q @ beta) - kl_gaussians(u, beta)) <= 1e-12

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2**31 - 1))
    def test_nonnegative(self, p, seed):
        rng = np.random.default_rng(seed)
        u = rng.standard_normal((p, p)) + 2 * np.eye(p)
        assert kl_gaussians(u, rng.standard_normal(p)) >= 0.0


class TestPinsker:
    @pytest.mark.parametrize("kl,expected", [(0.0, 0.0), (0.125679, 0.2507), (10.0, 1.0)])
    def test_values(self, kl, expected):
        assert tv_pinsker(kl) == pytest.approx(expected, abs=1e-4)

    @pytest.mark.parametrize("u2,beta", [(1.0, 0.5), (1.5, 0.0), (0.7, -0.3), (2.0, 1.0)])
    def test_dominates_exact_tv(self, u2, beta):
        kl = kl_gaussians([[math.sqrt(u2)]], [beta])
        assert tv_pinsker(kl) >= tv_quadrature_1d(u2, beta) - 1e-4


class TestRescalePenalty:
    def test_zero(self):
        assert rescale_tv_penalty(0.0, 0.0, 3) == 0.0

    def test_formula(self):
        assert rescale_tv_penalty(0.1, 0.2, 4) == pytest.approx(0.5 * math.sqrt(0.04 + 1.21 * 0.04))
        assert rescale_tv_penalty(0.1, 0.2, 4) == pytest.approx(0.1487, abs=1e-4)

    def test_pure_shift(self):
        assert rescale_tv_penalty(0.0, 0.7, 10) == pytest.approx(0.35)
