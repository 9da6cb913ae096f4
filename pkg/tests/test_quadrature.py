import numpy as np
import pytest

from curveflow.bspline import curve_eval, fit_closed_curve, make_uniform_periodic_knots
from curveflow.quadrature import gauss_legendre, integrate_spans, span_nodes


class TestGaussLegendre:
    def test_one_point_is_midpoint_rule(self):
        rule = gauss_legendre(1)
        assert rule.nodes[0] == pytest.approx(0.0, abs=1e-15)
        assert rule.weights[0] == pytest.approx(2.0, abs=1e-15)

    def test_two_point_nodes_and_weights(self):
        rule = gauss_legendre(2)
        assert np.allclose(sorted(rule.nodes), [-1 / np.sqrt(3), 1 / np.sqrt(3)], atol=1e-14)
        assert np.allclose(rule.weights, [1.0, 1.0], atol=1e-14)

    def test_weights_sum_to_interval_length(self):
        for q in (1, 2, 3, 5, 8, 13, 32):
            assert gauss_legendre(q).weights.sum() == pytest.approx(2.0, abs=1e-13)

    def test_odd_monomial_integrates_to_zero(self):
        rule = gauss_legendre(5)
        assert abs(np.dot(rule.weights, rule.nodes**9)) < 1e-15

    def test_exact_for_polynomials_up_to_degree_2q_minus_1(self):
        for q in (1, 2, 3, 5, 8):
            rule = gauss_legendre(q)
            for deg in range(2 * q):
                got = np.dot(rule.weights, rule.nodes**deg)
                exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
                assert got == pytest.approx(exact, abs=1e-13)

    def test_rejects_out_of_range(self):
        for q in (0, -1, 33):
            with pytest.raises(ValueError):
                gauss_legendre(q)


class TestIntegrateSpans:
    def test_constant_one(self):
        rule = gauss_legendre(3)
        for N in (3, 4, 9):
            k = make_uniform_periodic_knots(0.0, 1.0, 2, N)
            assert integrate_spans(lambda z: 1.0, k, rule) == pytest.approx(1.0, abs=1e-14)

    def test_quadratic_on_four_spans(self):
        k = make_uniform_periodic_knots(0.0, 1.0, 2, 4)
        for q in (2, 3, 6):
            got = integrate_spans(lambda z: z * z, k, gauss_legendre(q))
            assert got == pytest.approx(1 / 3, abs=1e-15)

    def test_matches_antiderivative_for_random_polynomial(self):
        rng = np.random.default_rng(17)
        coeffs = rng.normal(size=10)  # degree 9, exactly integrable at q=5
        poly = np.polynomial.Polynomial(coeffs)
        exact = poly.integ()(1.0) - poly.integ()(0.0)
        k = make_uniform_periodic_knots(0.0, 1.0, 3, 6)
        got = integrate_spans(poly, k, gauss_legendre(5))
        assert got == pytest.approx(exact, rel=1e-13)

    def test_fitted_unit_circle_length(self):
        th = 2 * np.pi * np.arange(200) / 200
        curve = fit_closed_curve(np.column_stack((np.cos(th), np.sin(th))), 3, 12)
        length = integrate_spans(
            lambda z: float(np.hypot(*curve_eval(curve, z, 1))), curve.knots, gauss_legendre(5)
        )
        assert length == pytest.approx(2 * np.pi, abs=1e-4)

    def test_span_additivity(self):
        # The whole-interval value decomposes into per-span Gauss sums.
        k = make_uniform_periodic_knots(0.0, 1.0, 2, 5)
        rule = gauss_legendre(6)
        f = lambda z: abs(np.sin(5 * np.pi * z)) + z
        total = integrate_spans(f, k, rule)
        zetas, weights = span_nodes(k, rule)
        per_span = sum(
            float(np.dot(weights[span], [f(z) for z in zetas[span]])) for span in range(k.N)
        )
        assert total == pytest.approx(per_span, rel=1e-14)

    def test_refining_q_keeps_exactly_integrable_results(self):
        k = make_uniform_periodic_knots(0.0, 1.0, 3, 4)
        cubic = lambda z: 2 * z**3 - z + 0.25
        lo = integrate_spans(cubic, k, gauss_legendre(2))
        hi = integrate_spans(cubic, k, gauss_legendre(8))
        assert lo == pytest.approx(hi, rel=1e-14)

    def test_positivity(self):
        k = make_uniform_periodic_knots(0.0, 1.0, 2, 7)
        assert integrate_spans(lambda z: np.cos(2 * np.pi * z) ** 2, k, gauss_legendre(4)) >= 0

    def test_nodes_strictly_interior(self):
        k = make_uniform_periodic_knots(0.0, 1.0, 3, 6)
        zetas, _ = span_nodes(k, gauss_legendre(5))
        starts = k.a + np.arange(k.N)[:, None] * k.h
        assert np.all(zetas > starts)
        assert np.all(zetas < starts + k.h)
