import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freecorr.series import TruncatedSeries


def geometric(theta, order, center=0):
    # theta / (1 - theta x) = sum_n theta^{n+1} x^n
    return TruncatedSeries([theta ** (n + 1) for n in range(order + 1)], center)


class TestBasics:
    def test_mul_truncates_to_min_order(self):
        a = TruncatedSeries([1, 1, 1, 1])
        b = TruncatedSeries([1, 2])
        assert (a * b).order == 1
        assert (a * b).coeffs == [1, 3]

    def test_mul_matches_convolution(self):
        a = TruncatedSeries([1, 2, 3, 4])
        b = TruncatedSeries([5, 6, 7, 8])
        c = a * b
        assert c.coeffs == [5, 16, 34, 60]

    def test_pow_int_zero_is_one(self):
        a = TruncatedSeries([0, 1, 5], center=0)
        assert a.pow_int(0).coeffs == [1, 0, 0]

    def test_div_roundtrip(self):
        a = TruncatedSeries([Fraction(2), Fraction(1), Fraction(7), Fraction(-3)])
        b = TruncatedSeries([Fraction(3), Fraction(-1), Fraction(2), Fraction(5)])
        assert (a * b).div(b).coeffs == a.coeffs

    def test_center_mismatch_raises(self):
        with pytest.raises(ValueError):
            TruncatedSeries([1, 2], center=0) * TruncatedSeries([1, 2], center=1)

    def test_json_roundtrip(self):
        a = TruncatedSeries([0.0, 1.0, 0.5], center=1.0)
        assert TruncatedSeries.from_dict(a.to_dict()) == a


class TestCalculus:
    def test_deriv_at_center_is_scaled_coefficient(self):
        s = TruncatedSeries([Fraction(1), Fraction(2), Fraction(3), Fraction(4)])
        assert s.deriv_at_center(0) == 1
        assert s.deriv_at_center(2) == 6
        assert s.deriv_at_center(3) == 24

    def test_deriv_at_center_geometric_against_finite_differences(self):
        # oracle first: central finite differences on f(x) = theta/(1 - theta x)
        theta = 2.0
        f = lambda x: theta / (1.0 - theta * x)
        h = 1e-6
        fd1 = (f(h) - f(-h)) / (2 * h)
        s = geometric(theta, 8)
        assert s.deriv_at_center(1) == pytest.approx(fd1, rel=1e-8)
        # frozen from the oracle: d/dx [theta/(1-theta x)] at 0 is theta^2
        assert s.deriv_at_center(1) == 4.0

    def test_derivative_integrate_inverse(self):
        s = TruncatedSeries([Fraction(0), Fraction(3), Fraction(-2), Fraction(7)])
        back = s.derivative().integrate(constant=s.coeffs[0])
        assert back.coeffs == s.coeffs

    def test_divided_difference_limit_matches_direct_sum(self):
        # direct evaluation of the merging-points sum at rational points i*eps,
        # Richardson-extrapolated in eps, must approach coeffs[n-1]
        coeffs = [Fraction(2), Fraction(-1), Fraction(5, 3), Fraction(7, 2), Fraction(1, 4)]
        s = TruncatedSeries(coeffs)

        def direct(n, eps):
            pts = [i * eps for i in range(1, n + 1)]
            total = Fraction(0)
            for i, xi in enumerate(pts):
                denom = Fraction(1)
                for j, xj in enumerate(pts):
                    if j != i:
                        denom *= xi - xj
                    # evaluate the polynomial exactly
                val = sum(c * xi**k for k, c in enumerate(coeffs))
                total += val / denom
            return total

        for n in (2, 3, 4):
            v1 = direct(n, Fraction(1, 10000))
            v2 = direct(n, Fraction(1, 100000))
            extrap = (10 * v2 - v1) / 9
            assert abs(float(extrap - s.divided_difference_limit(n))) < 1e-6

    def test_divided_difference_limit_n1_is_value(self):
        s = TruncatedSeries([7, 1, 2])
        assert s.divided_difference_limit(1) == 7


class TestTranscendental:
    def test_exp_of_half_square(self):
        s = TruncatedSeries([Fraction(0), Fraction(0), Fraction(1, 2)] + [Fraction(0)] * 4)
        e = s.exp_series()
        assert e.coeffs[:6] == [1, 0, Fraction(1, 2), 0, Fraction(1, 8), 0]

    def test_log_of_geometric_denominator(self):
        # log(1/(1-x)) = sum x^n / n
        s = TruncatedSeries([Fraction(1)] * 7)
        l = s.log_series()
        assert l.coeffs == [0] + [Fraction(1, n) for n in range(1, 7)]

    def test_log_rejects_zero_leading(self):
        with pytest.raises(ZeroDivisionError):
            TruncatedSeries([0, 1, 2]).log_series()

    def test_exp_with_nonzero_constant(self):
        s = TruncatedSeries([1.0, 1.0, 0.0, 0.0])
        e = s.exp_series()
        for j in range(4):
            assert e.coeffs[j] == pytest.approx(math.e / math.factorial(j), rel=1e-12)

    def test_compose_exp_with_exponential_inner(self):
        # Psi(e^u): outer centered at 1, inner e^u centered at 0
        order = 6
        outer = TruncatedSeries.variable(order, center=1)  # identity at 1
        inner = TruncatedSeries([Fraction(1, math.factorial(j)) for j in range(order + 1)])
        comp = outer.compose(inner)
        assert comp.coeffs == inner.coeffs

    def test_compose_requires_matching_value(self):
        outer = TruncatedSeries([0, 1, 2], center=1)
        inner = TruncatedSeries([0, 1, 0])
        with pytest.raises(ValueError):
            outer.compose(inner)


small_fractions = st.fractions(
    min_value=Fraction(-3), max_value=Fraction(3), max_denominator=4
)


def series_strategy(order=4, center=0):
    return st.lists(
        small_fractions, min_size=order + 1, max_size=order + 1
    ).map(lambda c: TruncatedSeries(c, center))


@settings(max_examples=60, deadline=None)
@given(series_strategy(), series_strategy(), series_strategy())
def test_ring_axioms_exact(a, b, c):
    assert (a + b).coeffs == (b + a).coeffs
    assert ((a + b) + c).coeffs == (a + (b + c)).coeffs
    assert (a * b).coeffs == (b * a).coeffs
    assert ((a * b) * c).coeffs == (a * (b * c)).coeffs
    assert (a * (b + c)).coeffs == (a * b + a * c).coeffs


@settings(max_examples=40, deadline=None)
@given(series_strategy(order=5))
def test_exp_log_roundtrip_exact(a):
    g = TruncatedSeries([0] + a.coeffs[1:], a.center)  # force value 0 at center
    assert g.exp_series().log_series().coeffs == g.coeffs


@settings(max_examples=40, deadline=None)
@given(series_strategy(order=5), series_strategy(order=5))
def test_leibniz_rule_exact(a, b):
    lhs = (a * b).derivative()
    rhs = a.derivative() * b.truncate(4) + a.truncate(4) * b.derivative()
    assert lhs.coeffs == rhs.coeffs
