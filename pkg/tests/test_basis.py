"""GLL quadrature and differentiation matrices."""
import numpy as np
import pytest
from numpy.polynomial import legendre

from seaquake.basis import diff_matrix, gll_rule, lagrange_values
from seaquake.errors import ConfigurationError


def _gll_oracle(order):
    """Independent construction: numpy Legendre root finding plus the
    closed-form weights 2 / (n (n+1) P_n(x)^2)."""
    coeffs = np.zeros(order + 1)
    coeffs[order] = 1.0
    dcoeffs = legendre.legder(coeffs)
    interior = legendre.legroots(dcoeffs)
    nodes = np.concatenate([[-1.0], np.sort(interior), [1.0]])
    pn = legendre.legval(nodes, coeffs)
    weights = 2.0 / (order * (order + 1) * pn**2)
    return nodes, weights


class TestGllRule:
    def test_order_one_is_endpoints(self):
        r = gll_rule(1)
        assert np.allclose(r.nodes, [-1.0, 1.0])
        assert np.allclose(r.weights, [1.0, 1.0])

    def test_order_two_closed_form(self):
        r = gll_rule(2)
        assert np.allclose(r.nodes, [-1.0, 0.0, 1.0], atol=1e-15)
        assert np.allclose(r.weights, [1 / 3, 4 / 3, 1 / 3], atol=1e-14)

    def test_against_root_finding_oracle(self):
        for order in range(2, 17):
            nodes, weights = _gll_oracle(order)
            r = gll_rule(order)
            assert np.max(np.abs(r.nodes - nodes)) < 1e-12, f"order {order}"
            assert np.max(np.abs(r.weights - weights)) < 1e-12, f"order {order}"

    def test_weight_sum_is_measure(self):
        for order in range(1, 17):
            assert abs(gll_rule(order).weights.sum() - 2.0) < 1e-13

    def test_endpoints_and_monotone(self):
        for order in (3, 7, 12, 16):
            r = gll_rule(order)
            assert r.nodes[0] == -1.0 and r.nodes[-1] == 1.0
            assert np.all(np.diff(r.nodes) > 0)

    def test_polynomial_exactness_to_2p_minus_1(self):
        rng = np.random.default_rng(42)
        for order in (2, 4, 6, 9, 13):
            r = gll_rule(order)
            for _ in range(20):
                deg = int(rng.integers(0, 2 * order))
                c = rng.standard_normal(deg + 1)
                quad = float(r.weights @ np.polyval(c, r.nodes))
                exact = float(np.polyval(np.polyint(c), 1.0)
                              - np.polyval(np.polyint(c), -1.0))
                scale = max(1.0, abs(exact))
                assert abs(quad - exact) < 1e-12 * scale, f"order {order} deg {deg}"

    def test_rejects_out_of_range_orders(self):
        for bad in (0, -1, 17, 40):
            with pytest.raises(ConfigurationError):
                gll_rule(bad)


class TestDiffMatrix:
    def test_order_one_by_hand(self):
        d = diff_matrix(gll_rule(1))
        assert np.allclose(d.entries, [[-0.5, 0.5], [-0.5, 0.5]], atol=1e-15)

    def test_rows_sum_to_zero(self):
        for order in (1, 2, 5, 8, 12, 16):
            d = diff_matrix(gll_rule(order))
            assert np.max(np.abs(d.entries.sum(axis=1))) < 1e-12

    def test_monomial_derivatives(self):
        for order in (2, 4, 7, 11):
            r = gll_rule(order)
            d = diff_matrix(r).entries
            for k in range(order + 1):
                got = d @ r.nodes**k
                want = k * r.nodes ** max(k - 1, 0) if k else np.zeros_like(r.nodes)
                assert np.max(np.abs(got - want)) < 1e-11, f"order {order} k {k}"

    def test_second_derivative_of_square_is_two(self):
        for order in (2, 3, 6):
            r = gll_rule(order)
            d = diff_matrix(r).entries
            got = d @ (d @ r.nodes**2)
            assert np.max(np.abs(got - 2.0)) < 1e-10


class TestLagrange:
    def test_cardinal_property(self):
        r = gll_rule(5)
        for i, x in enumerate(r.nodes):
            vals = lagrange_values(r.nodes, x)
            expect = np.zeros(6)
            expect[i] = 1.0
            assert np.allclose(vals, expect, atol=1e-12)

    def test_partition_of_unity(self):
        r = gll_rule(6)
        for x in np.linspace(-1, 1, 17):
            assert abs(lagrange_values(r.nodes, x).sum() - 1.0) < 1e-12
