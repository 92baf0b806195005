"""Fractional integral E and the one-dimensional maximal function."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.special import beta as beta_fn

from _helpers import pointwise_bound_ratio, random_knot_h
from chemomild.fractional import FracIntegralParams, fractional_integral_E, maximal_function_1d

NODES = np.concatenate([[0.0], np.geomspace(1e-3, 1.0, 60)])
BOUND_MARGIN = 1.25


def brute_maximal(s, h):
    a = np.abs(h)
    out = a.copy()
    for k in range(len(s)):
        for i in range(k + 1):
            for j in range(k, len(s)):
                if j > i:
                    avg = np.trapezoid(a[i:j + 1], s[i:j + 1]) / (s[j] - s[i])
                    out[k] = max(out[k], avg)
    return out


class TestParams:
    @pytest.mark.parametrize("alpha, beta", [(0.0, 0.5), (1.0, 0.5), (0.5, 0.0), (0.5, 1.2)])
    def test_rejects_outside_unit_interval(self, alpha, beta):
        with pytest.raises(ValueError):
            FracIntegralParams(alpha, beta)
        with pytest.raises(ValueError):
            fractional_integral_E(NODES, np.ones_like(NODES), alpha, beta)

    def test_bounded_range(self):
        assert FracIntegralParams(0.5, 0.5, 2.0).bounded_range()
        assert not FracIntegralParams(0.9, 0.05, 2.0).bounded_range()
        assert not FracIntegralParams(0.05, 0.9, 2.0).bounded_range()


class TestFractionalIntegral:
    def test_constant_gives_pi(self):
        E = fractional_integral_E(NODES, np.ones_like(NODES), 0.5, 0.5)
        assert np.max(np.abs(E[1:] - np.pi)) < 1e-12

    @given(alpha=st.floats(0.05, 0.95), beta=st.floats(0.05, 0.95))
    @settings(max_examples=30, deadline=None)
    def test_constant_beta_closed_form(self, alpha, beta):
        E = fractional_integral_E(NODES, np.ones_like(NODES), alpha, beta)
        exact = NODES[1:] ** (alpha - beta) * beta_fn(1 - beta, alpha)
        assert np.allclose(E[1:], exact, rtol=1e-11, atol=0)

    def test_linear_closed_form(self):
        alpha, beta = 0.4, 0.3
        E = fractional_integral_E(NODES, 2.0 * NODES, alpha, beta)
        exact = 2.0 * NODES[1:] ** (1 + alpha - beta) * beta_fn(2 - beta, alpha)
        assert np.allclose(E[1:], exact, rtol=1e-11)

    def test_zero(self):
        assert np.all(fractional_integral_E(NODES, np.zeros_like(NODES), 0.3, 0.7) == 0.0)

    @pytest.mark.parametrize("alpha, beta", [(0.35, 0.6), (0.5, 0.5), (0.8, 0.1)])
    def test_smooth_h_against_adaptive_quadrature(self, alpha, beta):
        # quad's algebraic weight handles sigma^{-beta} (s - sigma)^{alpha-1} exactly
        s = np.linspace(0, 1, 401)
        E = fractional_integral_E(s, np.exp(s), alpha, beta)
        for k in (100, 250, 400):
            ref = quad(np.exp, 0, s[k], weight="alg", wvar=(-beta, alpha - 1.0))[0]
            assert E[k] == pytest.approx(ref, rel=1e-5)

    def test_linear_in_h(self):
        h1, h2 = random_knot_h(NODES, 1), random_knot_h(NODES, 2)
        a = fractional_integral_E(NODES, h1 + 3 * h2, 0.6, 0.2)
        b = fractional_integral_E(NODES, h1, 0.6, 0.2) + 3 * fractional_integral_E(NODES, h2, 0.6, 0.2)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-14)

    @pytest.mark.parametrize("bad", ["negative", "nan", "shape", "start"])
    def test_input_validation(self, bad):
        s, h = NODES.copy(), np.ones_like(NODES)
        if bad == "negative":
            h[3] = -1.0
        elif bad == "nan":
            h[3] = np.nan
        elif bad == "shape":
            h = h[:-1]
        else:
            s = s + 0.1
        with pytest.raises(ValueError):
            fractional_integral_E(s, h, 0.5, 0.5)


class TestMaximalFunction:
    def test_constant(self):
        assert np.allclose(maximal_function_1d(NODES, np.full_like(NODES, 2.5)), 2.5)

    def test_indicator_window(self):
        s = np.linspace(0, 1, 101)
        h = (s <= 0.5).astype(float)
        assert maximal_function_1d(s, h)[-1] == pytest.approx(0.505, abs=1e-12)

    def test_indicator_at_one_on_coarse_nodes(self):
        s = np.array([0.0, 0.5, 1.0])
        h = np.array([1.0, 1.0, 0.0])
        # the interpolant's average over [0, 1] is (0.5 + 0.25) / 1
        assert maximal_function_1d(s, h)[-1] == pytest.approx(0.75, abs=1e-15)

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_matches_brute_force_and_dominates(self, seed):
        g = np.random.default_rng(seed)
        s = np.concatenate([[0.0], np.sort(g.uniform(0, 1, 11))])
        s = np.unique(s)
        h = g.standard_normal(s.size)
        Mh = maximal_function_1d(s, h)
        assert np.allclose(Mh, brute_maximal(s, h), rtol=1e-13, atol=1e-15)
        assert np.all(Mh >= np.abs(h))

    def test_validation(self):
        with pytest.raises(ValueError):
            maximal_function_1d(np.array([0.0, 0.0]), np.array([1.0, 1.0]))
        with pytest.raises(ValueError):
            maximal_function_1d(np.array([0.0, 1.0]), np.array([1.0, np.inf]))


class TestPointwiseBound:
    @pytest.mark.parametrize("alpha, beta", [(0.5, 0.5), (0.3, 0.6), (0.7, 0.2)])
    def test_frozen_constant_holds_on_fresh_samples(self, alpha, beta):
        calib = max(pointwise_bound_ratio(NODES, random_knot_h(NODES, s), alpha, beta) for s in range(100))
        C = BOUND_MARGIN * calib
        fresh = [pointwise_bound_ratio(NODES, random_knot_h(NODES, 1000 + s), alpha, beta) for s in range(100)]
        assert np.isfinite(C) and C > 0
        assert max(fresh) <= C

    def test_constant_h_attains_beta_value(self):
        # h = 1 has Mh = 1, so the ratio is exactly B(1 - beta, alpha)
        r = pointwise_bound_ratio(NODES, np.ones_like(NODES), 0.5, 0.5)
        assert r == pytest.approx(np.pi, rel=1e-12)
