import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from zeroris.specfun import (
    MAX_QUADRATURE_ORDER,
    bessel_j,
    gauss_laguerre,
    laguerre_half,
    laguerre_half_moments,
    regularized_lower_gamma,
    regularized_upper_gamma,
)


class TestIncompleteGamma:
    def test_origin_is_one(self):
        assert regularized_upper_gamma(1, 0) == 1.0

    def test_shape_one_is_exponential_survival(self):
        assert regularized_upper_gamma(1, 1) == pytest.approx(math.exp(-1), abs=1e-14)

    def test_against_defining_integral(self):
        a, x = 3.5, 2.7
        tail, _ = integrate.quad(lambda t: t ** (a - 1) * math.exp(-t), x, np.inf, epsabs=1e-14, epsrel=1e-13)
        assert regularized_upper_gamma(a, x) == pytest.approx(tail / math.gamma(a), abs=1e-10)

    @pytest.mark.parametrize("a,x", [(0.3, 0.01), (2.0, 1.5), (15, 3.0), (15, 40.0), (80.5, 70.0), (4.5, 300.0)])
    def test_both_branches_match_quadrature(self, a, x):
        # log-space integrand keeps large shapes finite
        lg = math.lgamma(a)
        f = lambda t: math.exp((a - 1) * math.log(t) - t - lg)
        lower, _ = integrate.quad(f, 0, x, epsabs=0, epsrel=1e-12, limit=200)
        expected = 1.0 - lower if lower < 0.5 else integrate.quad(f, x, np.inf, epsabs=0, epsrel=1e-12, limit=200)[0]
        assert regularized_upper_gamma(a, x) == pytest.approx(expected, rel=1e-9, abs=1e-300)

    def test_lower_complements_upper(self):
        assert regularized_lower_gamma(2.5, 1.7) + regularized_upper_gamma(2.5, 1.7) == pytest.approx(1.0, abs=1e-15)

    def test_vectorized_matches_scalar(self):
        xs = np.array([0.0, 0.5, 3.0, 20.0])
        np.testing.assert_allclose(regularized_upper_gamma(4, xs), [regularized_upper_gamma(4, x) for x in xs])

    @pytest.mark.parametrize("shape", [0, -1.0])
    def test_nonpositive_shape_rejected(self, shape):
        with pytest.raises(ValueError):
            regularized_upper_gamma(shape, 1.0)

    def test_tends_to_zero(self):
        assert regularized_upper_gamma(3, 1e3) < 1e-300 or regularized_upper_gamma(3, 1e3) == 0.0

    @given(st.floats(0.1, 60), st.lists(st.floats(0, 120), min_size=2, max_size=30, unique=True))
    @settings(max_examples=60, deadline=None)
    def test_decreasing_in_x(self, a, xs):
        xs = np.sort(np.array(xs))
        q = regularized_upper_gamma(a, xs)
        assert np.all(np.diff(q) <= 1e-15)
        assert np.all((q >= 0) & (q <= 1))


class TestBessel:
    def test_values_at_zero(self):
        assert bessel_j(0, 0.0) == 1.0
        assert bessel_j(3, 0.0) == 0.0

    def test_against_ascending_series(self):
        n, x = 2, 5.0
        series = sum((-1) ** k * (x / 2) ** (2 * k + n) / (math.factorial(k) * math.factorial(k + n)) for k in range(40))
        assert bessel_j(n, x) == pytest.approx(series, abs=1e-10)

    def test_against_integral_representation(self):
        n, x = 4, 7.3
        val, _ = integrate.quad(lambda t: math.cos(n * t - x * math.sin(t)), 0, math.pi)
        assert bessel_j(n, x) == pytest.approx(val / math.pi, abs=1e-10)

    @given(st.integers(1, 30), st.floats(0.01, 200))
    @settings(max_examples=80, deadline=None)
    def test_recurrence(self, n, x):
        lhs = bessel_j(n - 1, x) + bessel_j(n + 1, x)
        assert lhs == pytest.approx(2 * n / x * bessel_j(n, x), abs=1e-9)

    def test_negative_order_rejected(self):
        with pytest.raises(ValueError):
            bessel_j(-1, 1.0)


class TestLaguerreHalf:
    def test_rayleigh_case(self):
        mean, var = laguerre_half_moments(0.0)
        assert mean == pytest.approx(math.sqrt(math.pi) / 2, abs=1e-15)
        assert var == pytest.approx(1 - math.pi / 4, abs=1e-15)

    def test_unit_noncentrality_against_sampling(self):
        rng = np.random.default_rng(7)
        n = 10**7
        h = 1.0 + (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * math.sqrt(0.5)
        env = np.abs(h)
        mean, var = laguerre_half_moments(1.0)
        assert mean == pytest.approx(env.mean(), rel=1e-3)
        assert var == pytest.approx(env.var(), rel=1e-3)

    def test_large_noncentrality(self):
        mu_sq = 1e8
        mean, _ = laguerre_half_moments(mu_sq)
        assert mean / math.sqrt(mu_sq) == pytest.approx(1.0, abs=1e-6)

    def test_hypergeometric_series(self):
        # L_{1/2}(-x) = 1F1(-1/2; 1; -x)
        from scipy.special import hyp1f1

        for x in (0.1, 1.0, 4.0, 25.0):
            assert laguerre_half(x) == pytest.approx(hyp1f1(-0.5, 1.0, -x), rel=1e-12)

    @given(st.floats(0, 1e4))
    @settings(max_examples=80, deadline=None)
    def test_second_moment_identity(self, mu_sq):
        mean, var = laguerre_half_moments(mu_sq)
        assert mean**2 + var == pytest.approx(1 + mu_sq, rel=1e-9)
        assert var > 0


class TestGaussLaguerre:
    def test_order_one(self):
        rule = gauss_laguerre(1)
        np.testing.assert_allclose(rule.nodes, [1.0])
        np.testing.assert_allclose(rule.weights, [1.0])

    def test_order_two_closed_form(self):
        rule = gauss_laguerre(2)
        r2 = math.sqrt(2)
        np.testing.assert_allclose(rule.nodes, [2 - r2, 2 + r2], rtol=1e-14)
        np.testing.assert_allclose(rule.weights, [(2 + r2) / 4, (2 - r2) / 4], rtol=1e-13)

    def test_order_thirty_fifth_moment(self):
        assert gauss_laguerre(30).integrate(lambda x: x**5) == pytest.approx(120.0, abs=1e-9)

    @pytest.mark.parametrize("order", [2, 5, 30, 64, 100, MAX_QUADRATURE_ORDER])
    def test_invariants(self, order):
        rule = gauss_laguerre(order)
        assert np.all(rule.nodes > 0)
        assert np.all(np.diff(rule.nodes) > 0)
        assert np.all(rule.weights > 0)
        assert rule.weights.sum() == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("order", [3, 10, 20])
    def test_exact_for_every_degree(self, order):
        for k in range(2 * order):
            got = gauss_laguerre(order).integrate(lambda x: x**k)
            assert got == pytest.approx(math.factorial(k), rel=1e-10)

    @given(st.integers(2, 25), st.data())
    @settings(max_examples=40, deadline=None)
    def test_random_polynomials(self, order, data):
        deg = data.draw(st.integers(0, 2 * order - 1))
        coeffs = np.array(data.draw(st.lists(st.floats(-1, 1), min_size=deg + 1, max_size=deg + 1)))
        exact = sum(c * math.factorial(k) for k, c in enumerate(coeffs))
        scale = sum(abs(c) * math.factorial(k) for k, c in enumerate(coeffs))
        got = gauss_laguerre(order).integrate(lambda x: np.polynomial.polynomial.polyval(x, coeffs))
        assert abs(got - exact) <= 1e-9 * max(scale, 1e-300)

    @pytest.mark.parametrize("order", [0, 129, 2.5])
    def test_invalid_order(self, order):
        with pytest.raises(ValueError):
            gauss_laguerre(order)
