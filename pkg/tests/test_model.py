import math

import numpy as np
import pytest
from scipy.integrate import quad

from vasicek_barrier import (VasicekParams, b_factor, bond_context, bond_price,
                             bond_price_from_ode, effective_vol_sq,
                             integrated_variance)

REF = VasicekParams(a=1.0, theta=0.04, sigma1=0.3, sigma2=0.3, rho=0.5, r0=0.05)

# integral of effective_vol_sq over [0, 1] at REF params, frozen from
# scipy.integrate.quad(epsabs=1e-14); the live quadrature below re-derives it.
REF_TOTAL_VARIANCE = 0.138237361370642


def test_params_validation():
    with pytest.raises(ValueError):
        VasicekParams(a=1.0, theta=0.04, sigma1=-0.1, sigma2=0.3, rho=0.5, r0=0.05)
    with pytest.raises(ValueError):
        VasicekParams(a=1.0, theta=0.04, sigma1=0.3, sigma2=-1e-9, rho=0.5, r0=0.05)
    with pytest.raises(ValueError):
        VasicekParams(a=1.0, theta=0.04, sigma1=0.3, sigma2=0.3, rho=1.2, r0=0.05)


class TestBFactor:
    def test_vanishes_at_maturity(self):
        assert b_factor(1.0, 1.0, 1.0) == 0.0

    def test_small_a_limit_is_horizon(self):
        assert b_factor(0.0, 1.0, 1e-9) == pytest.approx(1.0, rel=1e-9)
        assert b_factor(0.0, 1.0, 0.0) == 1.0

    def test_unit_speed_value(self):
        assert b_factor(0.0, 1.0, 1.0) == pytest.approx(1.0 - math.exp(-1.0), rel=1e-15)

    def test_rejects_t_past_maturity(self):
        with pytest.raises(ValueError):
            b_factor(1.5, 1.0, 1.0)

    def test_branch_continuity_at_threshold(self):
        # series branch just below |a| = 1e-6, closed form just above
        for tau in (0.5, 1.0, 10.0):
            below = b_factor(0.0, tau, 1e-6 * (1 - 1e-9))
            above = b_factor(0.0, tau, 1e-6 * (1 + 1e-9))
            assert below == pytest.approx(above, rel=1e-10)
            below = b_factor(0.0, tau, -1e-6 * (1 - 1e-9))
            above = b_factor(0.0, tau, -1e-6 * (1 + 1e-9))
            assert below == pytest.approx(above, rel=1e-10)

    def test_vectorized_over_time(self):
        t = np.linspace(0.0, 1.0, 5)
        vals = b_factor(t, 1.0, 2.0)
        assert vals.shape == t.shape
        assert vals[-1] == 0.0


class TestBondPrice:
    def test_unity_at_maturity(self):
        for r in (-0.02, 0.0, 0.05, 0.2):
            assert bond_price(r, 1.0, 1.0, REF) == 1.0

    def test_deterministic_rate_reduction(self):
        p = VasicekParams(a=1.0, theta=0.05, sigma1=0.3, sigma2=0.0, rho=0.5, r0=0.05)
        # with sigma2 = 0 and r0 = theta the rate never moves
        assert bond_price(0.05, 0.0, 1.0, p) == pytest.approx(math.exp(-0.05), rel=1e-12)
        assert bond_price(0.05, 0.25, 1.0, p) == pytest.approx(math.exp(-0.05 * 0.75), rel=1e-12)

    def test_matches_ode_solution(self):
        cases = [
            (0.05, 0.0, 1.0, REF),
            (0.03, 0.2, 2.5, VasicekParams(0.7, 0.06, 0.2, 0.15, -0.3, 0.03)),
            (0.08, 0.0, 5.0, VasicekParams(2.5, 0.02, 0.1, 0.4, 0.9, 0.08)),
        ]
        for r, t, tau, p in cases:
            assert bond_price(r, t, tau, p) == pytest.approx(
                bond_price_from_ode(r, t, tau, p), rel=1e-8)

    def test_reference_value_frozen(self):
        # pinned against the ODE oracle above
        assert bond_price(0.05, 0.0, 1.0, REF) == pytest.approx(0.9619843470027912, rel=1e-12)

    def test_alt_variant_disagrees_with_ode(self):
        alt = bond_price(0.05, 0.0, 1.0, REF, variant="alt")
        assert alt == pytest.approx(0.97706136, rel=1e-8)
        assert abs(alt - bond_price_from_ode(0.05, 0.0, 1.0, REF)) > 1e-2

    def test_unknown_variant_rejected(self):
        with pytest.raises(ValueError):
            bond_price(0.05, 0.0, 1.0, REF, variant="mystery")

    def test_small_a_against_ode(self):
        p = VasicekParams(a=1e-8, theta=0.04, sigma1=0.2, sigma2=0.3, rho=0.0, r0=0.05)
        assert bond_price(0.05, 0.0, 2.0, p) == pytest.approx(
            bond_price_from_ode(0.05, 0.0, 2.0, p), rel=1e-8)

    def test_context_consistent(self):
        ctx = bond_context(0.2, 1.0, REF)
        assert ctx.a_factor * math.exp(-0.07 * ctx.b_factor) == pytest.approx(
            bond_price(0.07, 0.2, 1.0, REF), rel=1e-14)
        assert bond_context(1.0, 1.0, REF).b_factor == 0.0
        assert bond_context(1.0, 1.0, REF).a_factor == 1.0


class TestEffectiveVolSq:
    def test_equals_stock_variance_at_maturity(self):
        assert effective_vol_sq(1.0, 1.0, REF) == pytest.approx(0.09, rel=1e-14)

    def test_degenerate_rate_vol(self):
        p = VasicekParams(a=1.0, theta=0.04, sigma1=0.3, sigma2=0.0, rho=0.5, r0=0.05)
        for t in (0.0, 0.3, 0.9):
            assert effective_vol_sq(t, 1.0, p) == pytest.approx(0.09, rel=1e-14)

    def test_quadratic_form_recomputation(self):
        # recompute via B(t) and the plain quadratic, independent of the
        # sum-of-squares arrangement used inside
        b = (1.0 - math.exp(-1.0)) / 1.0
        expected = 0.09 + 2 * 0.5 * 0.09 * b + 0.09 * b * b
        assert effective_vol_sq(0.0, 1.0, REF) == pytest.approx(expected, rel=1e-14)

    def test_non_negative_at_extreme_correlation(self):
        rng = np.random.default_rng(7)
        for rho in (-1.0, 1.0):
            for _ in range(50):
                p = VasicekParams(a=rng.uniform(0.01, 5), theta=0.04,
                                  sigma1=rng.uniform(0, 1), sigma2=rng.uniform(0, 1),
                                  rho=rho, r0=0.05)
                assert effective_vol_sq(rng.uniform(0, 1), 1.0, p) >= 0.0


class TestIntegratedVariance:
    def test_constant_integrand(self):
        p = VasicekParams(a=1.0, theta=0.04, sigma1=0.3, sigma2=0.0, rho=0.5, r0=0.05)
        assert integrated_variance(0.0, 1.0, 1.0, p) == pytest.approx(0.09, rel=1e-14)

    def test_reference_params_against_adaptive_quadrature(self):
        val = integrated_variance(0.0, 1.0, 1.0, REF)
        assert val == pytest.approx(REF_TOTAL_VARIANCE, rel=1e-12)
        ref, _ = quad(lambda t: effective_vol_sq(t, 1.0, REF), 0.0, 1.0,
                      epsabs=1e-14, epsrel=1e-13)
        assert val == pytest.approx(ref, rel=1e-10)

    def test_additivity(self):
        whole = integrated_variance(0.0, 1.0, 1.0, REF)
        parts = integrated_variance(0.0, 0.4, 1.0, REF) + integrated_variance(0.4, 1.0, 1.0, REF)
        assert parts == pytest.approx(whole, rel=1e-12)

    def test_random_draws_against_quadrature(self):
        rng = np.random.default_rng(42)
        for _ in range(25):
            p = VasicekParams(a=rng.uniform(0.01, 5.0), theta=0.04,
                              sigma1=rng.uniform(0.0, 1.0), sigma2=rng.uniform(0.0, 1.0),
                              rho=rng.uniform(-1.0, 1.0), r0=0.05)
            tau = rng.uniform(0.1, 10.0)
            val = integrated_variance(0.0, tau, tau, p)
            ref, _ = quad(lambda t: effective_vol_sq(t, tau, p), 0.0, tau,
                          epsabs=1e-14, epsrel=1e-13, limit=200)
            assert val == pytest.approx(ref, rel=1e-10, abs=1e-14)

    def test_small_a_branch_against_quadrature(self):
        p = VasicekParams(a=5e-7, theta=0.04, sigma1=0.3, sigma2=0.3, rho=0.5, r0=0.05)
        val = integrated_variance(0.0, 2.0, 2.0, p)
        ref, _ = quad(lambda t: effective_vol_sq(t, 2.0, p), 0.0, 2.0,
                      epsabs=1e-14, epsrel=1e-13)
        assert val == pytest.approx(ref, rel=1e-10)

    def test_ordering_violation_rejected(self):
        with pytest.raises(ValueError):
            integrated_variance(0.6, 0.4, 1.0, REF)
        with pytest.raises(ValueError):
            integrated_variance(0.0, 1.2, 1.0, REF)

    def test_vectorized_steps_match_scalar(self):
        grid = np.linspace(0.0, 1.0, 9)
        vec = integrated_variance(grid[:-1], grid[1:], 1.0, REF)
        for j in range(8):
            assert vec[j] == pytest.approx(
                integrated_variance(grid[j], grid[j + 1], 1.0, REF), rel=1e-14)
