import math

import numpy as np
import pytest
from pydantic import ValidationError

from exceptions import DomainError
from rate_fn import (
    curve_d1,
    curve_d1_extended,
    curve_d2,
    curve_value,
    entropy,
    gamma_threshold_beta1,
    inflection_points,
    is_convex,
    p0,
    rate,
    rate_d1,
    rate_d1_extended,
    rate_d2,
)
from schemas import GammaCurve


@pytest.fixture
def nonconvex_curve():
    return GammaCurve(p=0.05, gamma=2.0)


class TestEntropy:
    """Test the binary entropy h(u)"""

    def test_half(self):
        """Test h(1/2) = -log 2"""
        assert entropy(0.5) == pytest.approx(-math.log(2.0), abs=1e-15)

    def test_endpoints(self):
        """Test the 0 log 0 = 0 convention at both endpoints"""
        assert entropy(0.0) == 0.0
        assert entropy(1.0) == 0.0

    def test_closed_form(self):
        """Test an interior value against the closed form"""
        expected = 0.11 * math.log(0.11) + 0.89 * math.log(0.89)
        assert entropy(0.11) == pytest.approx(expected, rel=1e-13)
        assert entropy(0.11) == pytest.approx(-0.3465, abs=1e-4)

    def test_array_input(self):
        """Test that arrays come back with the same shape"""
        values = entropy(np.array([0.0, 0.5, 1.0]))
        assert isinstance(values, np.ndarray)
        assert values.shape == (3,)

    def test_out_of_range(self):
        """Test that u outside [0, 1] is rejected"""
        with pytest.raises(DomainError):
            entropy(1.5)
        with pytest.raises(DomainError):
            entropy(float("nan"))


class TestRate:
    """Test the rate function h_p and its derivatives"""

    def test_vanishes_at_mean(self):
        """Test h_p(p) = 0"""
        for p in (0.01, 0.3, 0.9):
            assert rate(p, p) == pytest.approx(0.0, abs=1e-15)

    def test_known_values(self):
        """Test h_p(1) = log(1/p) and h_0.2(0.5)"""
        assert rate(1.0, 0.5) == pytest.approx(math.log(2.0), rel=1e-14)
        assert rate(0.5, 0.2) == pytest.approx(0.223144, abs=1e-6)

    def test_nonnegative(self):
        """Test that h_p is nonnegative on a grid"""
        u = np.linspace(0.0, 1.0, 101)
        assert np.all(rate(u, 0.37) >= 0.0)

    def test_p_must_be_interior(self):
        """Test that p = 0 and p = 1 are rejected"""
        with pytest.raises(DomainError):
            rate(0.5, 0.0)
        with pytest.raises(DomainError):
            rate(0.5, 1.0)

    def test_first_derivative(self):
        """Test h_p'(p) = 0 and h_0.2'(0.5) = log 4"""
        assert rate_d1(0.3, 0.3) == pytest.approx(0.0, abs=1e-15)
        assert rate_d1(0.5, 0.2) == pytest.approx(math.log(4.0), rel=1e-14)

    def test_first_derivative_matches_difference_quotient(self):
        """Test h_p' against a central difference"""
        u, p, step = 0.41, 0.2, 1e-6
        numeric = (rate(u + step, p) - rate(u - step, p)) / (2 * step)
        assert rate_d1(u, p) == pytest.approx(numeric, rel=1e-7)

    def test_extended_derivative_endpoints(self):
        """Test that the extended derivative is infinite at the endpoints"""
        assert rate_d1_extended(0.0, 0.3) == -math.inf
        assert rate_d1_extended(1.0, 0.3) == math.inf
        with pytest.raises(DomainError):
            rate_d1(0.0, 0.3)

    def test_second_derivative(self):
        """Test h''(1/2) = 4"""
        assert rate_d2(0.5) == pytest.approx(4.0)


class TestGammaCurve:
    """Test the gamma-curve x -> h_p(x^(1/gamma))"""

    def test_invalid_parameters(self):
        """Test that p outside (0, 1) and gamma <= 0 are rejected"""
        with pytest.raises(ValidationError):
            GammaCurve(p=1.0, gamma=2.0)
        with pytest.raises(ValidationError):
            GammaCurve(p=0.5, gamma=0.0)

    def test_minimum_at_p_to_gamma(self, nonconvex_curve):
        """Test that the curve vanishes at x = p^gamma"""
        x = nonconvex_curve.p ** nonconvex_curve.gamma
        assert curve_value(nonconvex_curve, x) == pytest.approx(0.0, abs=1e-15)
        assert curve_d1(nonconvex_curve, x) == pytest.approx(0.0, abs=1e-12)

    def test_zero_is_in_the_domain(self, nonconvex_curve):
        """Test that x = 0 gives h_p(0) = -log(1 - p)"""
        assert curve_value(nonconvex_curve, 0.0) == pytest.approx(-math.log(0.95), rel=1e-14)

    def test_first_derivative_matches_difference_quotient(self, nonconvex_curve):
        """Test the curve slope against a central difference"""
        x, step = 0.3, 1e-6
        numeric = (curve_value(nonconvex_curve, x + step) - curve_value(nonconvex_curve, x - step)) / (2 * step)
        assert curve_d1(nonconvex_curve, x) == pytest.approx(numeric, rel=1e-6)

    def test_second_derivative_matches_difference_quotient(self, nonconvex_curve):
        """Test the curvature against a central difference of the slope"""
        x, step = 0.3, 1e-5
        numeric = (curve_d1(nonconvex_curve, x + step) - curve_d1(nonconvex_curve, x - step)) / (2 * step)
        assert curve_d2(nonconvex_curve, x) == pytest.approx(numeric, rel=1e-5)

    def test_concave_middle(self, nonconvex_curve):
        """Test that the curve is concave at q = 1/2 for p = 0.05, gamma = 2"""
        assert curve_d2(nonconvex_curve, 0.25) < 0.0

    def test_extended_slope_endpoints(self):
        """Test the slope limits at the endpoints"""
        assert curve_d1_extended(GammaCurve(p=0.3, gamma=2.0), 0.0) == -math.inf
        assert curve_d1_extended(GammaCurve(p=0.3, gamma=2.0), 1.0) == math.inf
        assert curve_d1_extended(GammaCurve(p=0.3, gamma=0.5), 0.0) == 0.0

    def test_domain(self, nonconvex_curve):
        """Test that x outside [0, 1] is rejected"""
        with pytest.raises(DomainError):
            curve_value(nonconvex_curve, -0.1)
        with pytest.raises(DomainError):
            curve_d1(nonconvex_curve, 1.0)


class TestConvexityThreshold:
    """Test p0, the beta1 threshold and the inflection points"""

    def test_p0_values(self):
        """Test p0(2) = 1/(1 + e^2) and p0(3) = 2/(2 + e^1.5)"""
        assert p0(2.0) == pytest.approx(1.0 / (1.0 + math.e ** 2), rel=1e-14)
        assert p0(2.0) == pytest.approx(0.1192029, abs=1e-7)
        assert p0(3.0) == pytest.approx(2.0 / (2.0 + math.exp(1.5)), rel=1e-14)
        assert p0(3.0) == pytest.approx(0.3085615, abs=1e-6)

    def test_p0_needs_gamma_above_one(self):
        """Test that gamma <= 1 is rejected"""
        with pytest.raises(DomainError):
            p0(1.0)

    def test_p0_increases(self):
        """Test that p0 increases with gamma"""
        values = [p0(g) for g in (1.2, 1.5, 2.0, 3.0, 6.0)]
        assert values == sorted(values)

    def test_beta1_threshold(self):
        """Test log(gamma - 1) - gamma/(gamma - 1) and its logistic image"""
        assert gamma_threshold_beta1(3.0) == pytest.approx(math.log(2.0) - 1.5, rel=1e-14)
        assert gamma_threshold_beta1(2.0) == pytest.approx(-2.0, rel=1e-14)
        assert 1.0 / (1.0 + math.exp(-gamma_threshold_beta1(3.0))) == pytest.approx(p0(3.0), rel=1e-12)

    def test_convex_cases(self):
        """Test that the curve is convex for p >= p0 and for gamma <= 1"""
        assert is_convex(GammaCurve(p=0.2, gamma=2.0))
        assert is_convex(GammaCurve(p=0.01, gamma=0.8))
        assert not is_convex(GammaCurve(p=0.05, gamma=2.0))
        assert inflection_points(GammaCurve(p=0.2, gamma=2.0)) is None

    def test_inflection_points_bracket_concave_stretch(self, nonconvex_curve):
        """Test that the curvature changes sign at both inflection points"""
        x_a, x_b = inflection_points(nonconvex_curve)
        assert 0.0 < x_a < x_b < 1.0
        assert curve_d2(nonconvex_curve, x_a * 0.99) > 0.0
        assert curve_d2(nonconvex_curve, (x_a + x_b) / 2) < 0.0
        assert curve_d2(nonconvex_curve, min(x_b * 1.01, 0.999)) > 0.0


class TestConvexityOnGrids:
    """Test convexity and inflection counts as p crosses p0"""

    @staticmethod
    def _d2_grid(c, points):
        qs = np.linspace(0.0, 1.0, points + 2)[1:-1]
        q_mid = (c.gamma - 1.0) / c.gamma
        return curve_d2(c, np.sort(np.append(qs, q_mid)) ** c.gamma)

    @pytest.mark.parametrize("gamma", [1.8, 2.0, 3.0, 6.0])
    def test_convex_iff_p_at_least_p0(self, gamma):
        """Test the sign of the curvature on a 1e3-point grid at p0 -/+ 1e-3"""
        below = GammaCurve(p=p0(gamma) - 1e-3, gamma=gamma)
        above = GammaCurve(p=p0(gamma) + 1e-3, gamma=gamma)
        assert np.min(self._d2_grid(below, 1000)) < 0.0
        assert np.min(self._d2_grid(above, 1000)) > 0.0
        assert not is_convex(below) and is_convex(above)

    def test_gamma_at_most_one_is_convex(self):
        """Test discrete midpoint convexity for gamma in {0.5, 1}"""
        xs = np.linspace(0.0, 1.0, 1000)
        for gamma in (0.5, 1.0):
            values = curve_value(GammaCurve(p=0.05, gamma=gamma), xs)
            assert np.all(values[:-2] + values[2:] - 2.0 * values[1:-1] >= -1e-12)

    @pytest.mark.parametrize("gamma", [1.8, 2.0, 3.0, 6.0])
    def test_inflection_sign_changes(self, gamma):
        """Test exactly two curvature sign changes below p0 and none above on a 1e4-point grid"""
        for p, expected in ((0.05, 2), (p0(gamma) - 1e-3, 2), (p0(gamma) + 1e-3, 0)):
            c = GammaCurve(p=p, gamma=gamma)
            signs = np.sign(self._d2_grid(c, 10_000))
            assert int(np.count_nonzero(np.diff(signs) != 0)) == expected

    def test_inflection_points_are_sign_changes(self, nonconvex_curve):
        """Test that curve_d2 changes sign across both returned points"""
        for x in inflection_points(nonconvex_curve):
            assert curve_d2(nonconvex_curve, x * (1 - 1e-6)) * curve_d2(nonconvex_curve, x * (1 + 1e-6)) < 0.0


class TestDerivativesAgainstDifferences:
    """Test curve_d1 and curve_d2 against central differences"""

    @pytest.mark.parametrize("p, gamma", [(0.05, 2.0), (0.1, 3.0), (0.3, 1.8), (0.02, 6.0)])
    def test_random_points(self, p, gamma):
        """Test 1e3 random interior points per curve"""
        c = GammaCurve(p=p, gamma=gamma)
        xs = np.random.default_rng(1000).uniform(0.01, 0.99, 1000)
        h1, h2 = 1e-6, 1e-4
        d1 = (curve_value(c, xs + h1) - curve_value(c, xs - h1)) / (2 * h1)
        assert curve_d1(c, xs) == pytest.approx(d1, rel=1e-6, abs=1e-7)

        inner = xs[(xs > 0.05) & (xs < 0.95)]
        d2 = (curve_value(c, inner + h2) - 2 * curve_value(c, inner) + curve_value(c, inner - h2)) / h2 ** 2
        assert curve_d2(c, inner) == pytest.approx(d2, rel=1e-4, abs=1e-5)
