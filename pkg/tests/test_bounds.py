import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bvm.bounds import (
    BvmBudget,
    ModelConstants,
    budget_from_delta,
    bvm_budget,
    delta_plus_minus,
    entropy_term,
    gaussian_prior_flatness,
    iid_spread,
    linear_delta,
    minimal_r0,
    radius_solver,
    sieve_budget,
    spread,
    tail_mass,
    tau,
)
from bvm.errors import InvalidInput
from bvm.gausstools import z_quantile, z_score_bound


def constants(**kw):
    base = dict(nu0=1.0, omega=0.0, g=1.0, b=1.0, delta_of_r=linear_delta(0.0), p_star=1, p=1,
                trace_B=1.0, lambda_B=1.0)
    base.update(kw)
    return ModelConstants(**base)


def score_constants(zb_sq, **kw):
    """Constants with z(B, x)^2 = zb_sq at x = 1 (lambda_B = 1)."""
    return constants(trace_B=zb_sq - 6.0, lambda_B=1.0, **kw)


class TestModelConstants:
    @pytest.mark.parametrize("bad", [dict(nu0=0.0), dict(omega=-1.0), dict(g=0.0), dict(b=0.0), dict(b=1.5),
                                     dict(p=2, p_star=1), dict(trace_B=0.5, lambda_B=1.0)])
    def test_rejects_invalid(self, bad):
        with pytest.raises(InvalidInput):
            constants(**bad)

    def test_rejects_decreasing_delta(self):
        with pytest.raises(InvalidInput):
            constants(delta_of_r=lambda r: 1.0 / r)


class TestEntropyTerm:
    def test_worked_value(self):
        assert entropy_term(5, 2.0, 1.0) == pytest.approx(2 * math.sqrt(5) + 2 + 3 * 20)
        assert entropy_term(5, 2.0, 1.0) == pytest.approx(66.472, abs=1e-3)

    def test_small_x(self):
        assert entropy_term(7, 1e-14, 1.0) == pytest.approx(2 * math.sqrt(7) + 28, abs=1e-6)

    def test_large_g(self):
        assert entropy_term(5, 2.0, 1e9) == pytest.approx(2 * math.sqrt(5) + 2, abs=1e-6)

    def test_invalid(self):
        with pytest.raises(InvalidInput):
            entropy_term(0, 1.0, 1.0)


class TestSpread:
    def test_exact_quadratic(self):
        assert spread(constants(), 3.0, 1.0) == 0.0

    def test_worked_value(self):
        # choose g so that qQ(x) = 4 exactly: entropy term is decreasing in g
        from scipy.optimize import brentq

        x = 1.0
        g = brentq(lambda g: entropy_term(1, x, g) - 4.0, 0.5, 1e6)
        c = constants(nu0=0.5, omega=0.01, g=g, delta_of_r=lambda r: 0.02)
        assert spread(c, 3.0, x) == pytest.approx(1.26, rel=1e-10)

    def test_omega_zero_is_delta_r_squared(self):
        c = constants(delta_of_r=linear_delta(0.3))
        assert spread(c, 2.5, 1.0) == 0.3 * 2.5 * 2.5**2

    def test_iid_scaling_slope(self):
        # delta(r) = r / sqrt(n), r0^2 = p  ->  Delta = p^{3/2} / sqrt(n)
        n = 1e6
        ps = np.array([10, 20, 40, 80, 160])
        vals = [spread(constants(p_star=int(p), delta_of_r=linear_delta(1 / math.sqrt(n))), math.sqrt(p), 1.0)
                for p in ps]
        slope = np.polyfit(np.log(ps), np.log(vals), 1)[0]
        assert slope == pytest.approx(1.5, abs=0.05)

    def test_invalid(self):
        with pytest.raises(InvalidInput):
            spread(constants(), 0.0, 1.0)


class TestRadiusSolver:
    def test_omega_zero_b1(self):
        c = score_constants(25.0)
        assert z_score_bound(c.trace_B, c.lambda_B, 1.0) == pytest.approx(5.0)
        assert radius_solver(c, 1.0, 3.0) == pytest.approx(10.0)
        assert radius_solver(c, 1.0, 12.0) == pytest.approx(12.0)

    def test_omega_zero_half_b(self):
        c = score_constants(16.0, b=0.5)
        assert radius_solver(c, 1.0, 1.0) == pytest.approx(16.0)

    def test_matches_bisection(self):
        c = constants(nu0=1.0, omega=0.01, g=1.0, p_star=5, b=1.0, trace_B=5.0, lambda_B=1.0)
        x, r0 = 2.0, 4.0
        zb = z_score_bound(5.0, 1.0, x)

        def excess(r):
            return r - 2.0 * (zb + 6.0 * entropy_term(5, x + math.log(2 * r / r0), 1.0) * 0.01)

        lo, hi = r0, 1e4
        assert excess(lo) < 0 < excess(hi)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            lo, hi = (lo, mid) if excess(mid) >= 0 else (mid, hi)
        oracle = max(hi, minimal_r0(c, x))
        assert radius_solver(c, x, r0) == pytest.approx(oracle, rel=1e-6)
        # the solution satisfies its own inequality
        r = radius_solver(c, x, r0)
        assert excess(r) >= -1e-6 * r

    def test_floor_enforced(self):
        c = constants(p_star=50, trace_B=1.0, lambda_B=1.0)
        r = radius_solver(c, 1.0, 0.1)
        assert r >= z_quantile(50, 1.0) + z_score_bound(1.0, 1.0, 1.0)


class TestTailMass:
    def test_worked_value(self):
        assert tail_mass(0.1, 3.0) == pytest.approx(math.exp(0.2 + 2 * math.exp(-3) - 3))
        assert tail_mass(0.1, 3.0) == pytest.approx(0.0672, abs=1e-4)

    def test_limit(self):
        assert tail_mass(0.0, 700.0) < 1e-300

    def test_monotone(self):
        grid = np.linspace(0, 2, 9)
        xs = np.linspace(0.5, 10, 9)
        for x in xs:
            vals = [tail_mass(d, x) for d in grid]
            assert np.all(np.diff(vals) > 0)
        for d in grid:
            vals = [tail_mass(d, x) for x in xs]
            assert np.all(np.diff(vals) < 0)


class TestTau:
    def test_zero(self):
        assert tau(0.0, 5) == 0.0

    def test_plain(self):
        assert tau(0.1, 2) == pytest.approx(0.01605)

    def test_sqrt_variant(self):
        assert tau(0.1, 2, sqrt_form=True) == pytest.approx(0.5 * math.sqrt(0.0321))
        assert tau(0.1, 2, sqrt_form=True) == pytest.approx(0.0896, abs=1e-4)


class TestDeltaPlusMinus:
    def test_worked_value(self):
        dp, _ = delta_plus_minus(0.1, 5.0)
        assert dp == pytest.approx(0.2288, abs=1e-4)

    def test_limit(self):
        dp, dm = delta_plus_minus(0.0, 800.0)
        assert dp == 0.0 and dm == 0.0

    def test_lower_dominates(self):
        for d in np.linspace(0, 1, 6):
            for x in (0.5, 1, 3, 8):
                dp, dm = delta_plus_minus(d, x)
                assert dm >= dp - math.exp(-x) + 2 * math.exp(d + 4 * math.exp(-x) - x) - 1e-12


class TestBudget:
    def test_worked_mean_bound(self):
        b = budget_from_delta(0.1, 5.0, 1)
        assert b.mean_bound == pytest.approx(0.4 + 16 * math.exp(-5))
        assert b.mean_bound == pytest.approx(0.5078, abs=1e-4)
        assert b.cov_bound == b.mean_bound

    def test_limit(self):
        b = budget_from_delta(0.0, 700.0, 3)
        assert b.mean_bound < 1e-290
        assert b.tv_factor == pytest.approx(1.0)

    def test_formula_reevaluation(self):
        c = constants(nu0=0.7, omega=0.002, g=2.0, b=0.8, delta_of_r=linear_delta(0.01), p_star=4, p=2,
                      trace_B=4.0, lambda_B=1.5)
        r0, x = 5.0, 3.0
        b = bvm_budget(c, r0, x)
        e = math.exp(-x)
        qq = 2 * 2 + math.sqrt(2 * x) + (x / 4 + 1) * 16 / 2
        d = (0.01 * r0 + 6 * 0.7 * qq * 0.002) * r0**2
        assert b.delta == d
        assert b.mean_bound == 4 * d + 16 * e
        assert b.tau == 0.5 * (2 * d**2 + (1 + d) ** 2 * d**2)
        assert b.rho_star == math.exp(2 * d + 2 * e - x)
        assert b.delta_plus == 2 * d + 2 * e + 2 * math.exp(d + 4 * e - x)
        assert b.delta_minus == 2 * d + 3 * e + 4 * math.exp(d + 4 * e - x)
        assert b.tv_factor == math.exp(2 * d + 5 * e)
        assert b.tv_lower_factor == math.exp(-2 * d - 8 * e)

    def test_deterministic(self):
        c = constants(omega=0.01, delta_of_r=linear_delta(0.02))
        assert bvm_budget(c, 3.0, 2.0, solve_outer=True) == bvm_budget(c, 3.0, 2.0, solve_outer=True)

    def test_monotone_in_r0_and_x(self):
        c = constants(omega=0.01, delta_of_r=linear_delta(0.02), p_star=3, p=1, trace_B=3.0)
        fields = ("delta", "tau", "rho_star", "delta_plus", "delta_minus", "mean_bound", "tv_factor")
        for x in (1.0, 2.0, 4.0):
            prev = None
            for r0 in (1.0, 2.0, 4.0, 8.0):
                cur = bvm_budget(c, r0, x)
                if prev is not None:
                    assert all(getattr(cur, f) >= getattr(prev, f) for f in fields)
                prev = cur

    def test_monotone_in_delta_decreasing_in_x(self):
        fields = ("tau", "rho_star", "delta_plus", "delta_minus", "mean_bound", "tv_factor")
        for x in (1.0, 3.0):
            prev = None
            for d in (0.0, 0.05, 0.2, 1.0):
                cur = budget_from_delta(d, x, 2)
                if prev is not None:
                    assert all(getattr(cur, f) >= getattr(prev, f) for f in fields)
                prev = cur
        fields = ("rho_star", "delta_plus", "delta_minus", "mean_bound", "tv_factor")
        for d in (0.0, 0.3):
            prev = None
            for x in (0.5, 1.0, 3.0, 9.0):
                cur = budget_from_delta(d, x, 2)
                if prev is not None:
                    assert all(getattr(cur, f) <= getattr(prev, f) for f in fields)
                prev = cur

    def test_overflow_saturates(self):
        b = budget_from_delta(1000.0, 1.0, 1)
        assert math.isinf(b.tv_factor) and b.tv_bound == 1.0

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0, 5), st.floats(0.1, 20), st.integers(1, 50))
    def test_fields_nonnegative(self, d, x, p):
        b = budget_from_delta(d, x, p)
        assert all(v >= 0 for v in b.to_dict().values() if isinstance(v, float) and not math.isnan(v))
        assert b.tv_factor >= 1.0
        assert 0.0 <= b.tv_bound <= 1.0


class TestSieveBudget:
    def base(self):
        # Delta* = 4 Delta + 16 e^{-x} = 0.5
        x = 5.0
        return budget_from_delta((0.5 - 16 * math.exp(-x)) / 4, x, 1)

    def test_unchanged(self):
        b = self.base()
        s = sieve_budget(b, 0.0, 0.0)
        assert s.mean_bound == pytest.approx(b.mean_bound) and s.cov_bound == pytest.approx(b.cov_bound)

    def test_worked_value(self):
        s = sieve_budget(self.base(), 0.1, 0.01)
        assert s.mean_bound == pytest.approx(0.605)
        assert s.cov_bound == pytest.approx(0.515)

    def test_monotone(self):
        b = self.base()
        grid = (0.0, 0.01, 0.1, 1.0)
        means = [[sieve_budget(b, a, c).mean_bound for c in grid] for a in grid]
        assert np.all(np.diff(means, axis=0) > 0) and np.all(np.diff(means, axis=1) > 0)

    def test_negative(self):
        with pytest.raises(InvalidInput):
            sieve_budget(self.base(), -0.1, 0.0)


class TestGaussianPrior:
    def test_eps_zero(self):
        assert gaussian_prior_flatness(0.0, 3.0, 1.5) == (0.0, pytest.approx(math.exp(1.125)))

    def test_worked_value(self):
        alpha, c = gaussian_prior_flatness(0.1, 5.0, 2.0)
        assert alpha == pytest.approx(1.0) and c == pytest.approx(math.e**2)

    def test_zero_norm(self):
        assert gaussian_prior_flatness(0.2, 3.0, 0.0)[0] == pytest.approx(0.5 * 0.04 * 9)


class TestIidSpread:
    def test_worked_value(self):
        assert iid_spread(1.0, 27, 27000) == pytest.approx(math.sqrt(0.729))
        assert iid_spread(1.0, 27, 27000) == pytest.approx(0.8538, abs=1e-4)

    def test_critical_boundary(self):
        assert iid_spread(1.0, 10, 1000) == pytest.approx(1.0)

    def test_doubling_n(self):
        assert iid_spread(2.0, 5, 400) / iid_spread(2.0, 5, 800) == pytest.approx(math.sqrt(2))


def test_budget_is_frozen():
    b = budget_from_delta(0.1, 2.0, 1)
    assert isinstance(b, BvmBudget)
    with pytest.raises(Exception):
        b.delta = 1.0
