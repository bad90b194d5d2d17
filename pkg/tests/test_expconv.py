from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

import mpmath

from relicomp import ExpPoly, Term, ValidationError, convolve, numeric_convolve, unit_power
from relicomp.expconv import MAX_POWER


def expoly(*terms):
    # (coef, rate, power) ordering for readability at call sites
    return ExpPoly([Term(c, p, r) for c, r, p in terms])


class TestConstruction:
    def test_terms_merge_and_sort(self):
        f = ExpPoly([Term(0.5, 1, 2e-3), Term(0.25, 0, 1e-3), Term(0.5, 1, 2e-3)])
        assert f.terms == (Term(0.25, 0, 1e-3), Term(1.0, 1, 2e-3))

    def test_zero_coefficients_drop(self):
        f = ExpPoly([Term(1.0, 0, 1e-3), Term(-1.0, 0, 1e-3)])
        assert f.terms == ()
        assert f.evaluate(123.0) == 0.0

    def test_negative_zero_rate_normalizes(self):
        f = ExpPoly([Term(1.0, 0, -0.0)])
        assert f.terms == ExpPoly([Term(1.0, 0, 0.0)]).terms

    def test_equality_and_hash(self):
        f = expoly((2.0, 1e-3, 1))
        g = ExpPoly([Term(1.0, 1, 1e-3), Term(1.0, 1, 1e-3)])
        assert f == g
        assert hash(f) == hash(g)

    def test_immutable(self):
        f = expoly((1.0, 1e-3, 0))
        with pytest.raises(AttributeError):
            f.terms = ()

    @pytest.mark.parametrize(
        "bad",
        [
            [Term(1.0, 0, -1e-3)],
            [Term(float("nan"), 0, 1e-3)],
            [Term(float("inf"), 0, 1e-3)],
            [Term(1.0, 0, float("nan"))],
            [Term(1.0, -1, 1e-3)],
            [Term(1.0, MAX_POWER + 1, 1e-3)],
        ],
    )
    def test_rejects_invalid_terms(self, bad):
        with pytest.raises(ValidationError):
            ExpPoly(bad)

    def test_fractional_power_rejected(self):
        with pytest.raises(ValidationError):
            ExpPoly([Term(1.0, 1.5, 1e-3)])


class TestEvaluate:
    def test_scalar_and_array(self):
        f = ExpPoly.exponential(1e-3)
        assert f.evaluate(0.0) == 1.0
        out = f.evaluate([0.0, 1000.0])
        assert out.shape == (2,)
        assert out[1] == pytest.approx(np.exp(-1.0), rel=1e-15)

    def test_shape_preserved(self):
        f = ExpPoly.exponential(1e-3)
        tau = np.array([[0.0, 1.0], [2.0, 3.0]])
        assert f.evaluate(tau).shape == (2, 2)

    def test_rejects_negative_tau(self):
        f = ExpPoly.exponential(1e-3)
        with pytest.raises(ValidationError):
            f.evaluate(-1.0)

    def test_rejects_nonfinite_tau(self):
        f = ExpPoly.exponential(1e-3)
        with pytest.raises(ValidationError):
            f.evaluate(float("nan"))

    def test_underflow_is_zero_not_nan(self):
        f = expoly((1.0, 1.0, 2))
        out = f.evaluate(1e6)
        assert out == 0.0

    def test_constant(self):
        assert ExpPoly.constant(2.5).evaluate(777.0) == 2.5

    def test_unit_power(self):
        # k-fold unit convolution: tau^(k-1) / (k-1)!
        f = unit_power(3)
        assert f.evaluate(2.0) == pytest.approx(2.0, rel=1e-15)
        with pytest.raises(ValidationError):
            unit_power(0)

    def test_cancellation_fallback(self):
        """Nearly equal rates force catastrophic cancellation in the naive
        Horner sum; evaluation must recover full precision."""
        f = expoly((1.0, 1e-3, 2))
        g = expoly((1.0, 0.9e-3, 2))
        h = convolve(f, g)
        tau = 100.0
        with mpmath.workdps(50):
            want = mpmath.quad(
                lambda t: mpmath.mpf(t) ** 2
                * mpmath.e ** (-mpmath.mpf("1e-3") * t)
                * mpmath.mpf(tau - t) ** 2
                * mpmath.e ** (-mpmath.mpf("0.9e-3") * (tau - t)),
                [0, tau],
            )
            want = float(want)
        assert h.evaluate(tau) == pytest.approx(want, rel=1e-12)


class TestConvolveClosedForm:
    def quad_reference(self, f, g, tau):
        val, err = quad(
            lambda t: f.evaluate(t) * g.evaluate(tau - t), 0.0, tau, limit=200
        )
        return val, err

    @pytest.mark.parametrize(
        "f,g,tau",
        [
            (expoly((1.0, 1e-3, 0)), expoly((1.0, 2e-3, 0)), 500.0),
            (expoly((2.0, 5e-4, 1)), expoly((0.5, 1e-3, 2)), 1200.0),
            (expoly((1.0, 0.0, 0)), expoly((1.0, 1e-3, 1)), 300.0),
            (expoly((1.5, 3e-4, 2)), expoly((1.0, 3e-4, 2)), 2500.0),
        ],
    )
    def test_matches_quadrature(self, f, g, tau):
        h = convolve(f, g)
        want, err = self.quad_reference(f, g, tau)
        assert h.evaluate(tau) == pytest.approx(want, rel=1e-9, abs=10 * err)

    def test_confluent_rates_merge(self):
        f = ExpPoly.exponential(1e-3)
        h = convolve(f, f)
        # e^{-at} * e^{-at} convolves to tau e^{-a tau}
        assert h.terms == (Term(1.0, 1, 1e-3),)

    def test_near_confluent_uses_merged_branch(self):
        a = 1e-3
        b = a * (1.0 + 1e-12)
        h = convolve(ExpPoly.exponential(a), ExpPoly.exponential(b))
        assert len(h.terms) == 1
        assert h.terms[0].power == 1
        want, err = self.quad_reference(
            ExpPoly.exponential(a), ExpPoly.exponential(b), 800.0
        )
        assert h.evaluate(800.0) == pytest.approx(want, rel=1e-6, abs=10 * err)

    def test_distinct_rates_partial_fractions(self):
        a, b = 1e-3, 2e-3
        h = convolve(ExpPoly.exponential(a), ExpPoly.exponential(b))
        d = b - a
        expect = ExpPoly([Term(1.0 / d, 0, a), Term(-1.0 / d, 0, b)])
        assert h == expect

    def test_power_cap_enforced(self):
        f = expoly((1.0, 1e-3, 32))
        with pytest.raises(ValidationError):
            convolve(f, expoly((1.0, 1e-3, 32)))

    def test_taylor_exact(self):
        f = expoly((1.0, 1.0, 2))
        h = convolve(f, expoly((1.0, 1.0, 2)))
        lead = h.taylor(6)[5]
        assert lead == Fraction(1, 30)

    def test_serialization_round_trip(self):
        f = expoly((0.123456789012345, 4.3553e-5, 2), (7.0, 0.0, 1))
        g = ExpPoly.from_json_obj(f.to_json_obj())
        assert g == f
        assert g._exact == f._exact


class TestNumericConvolve:
    def test_zero_tau(self):
        f = ExpPoly.exponential(1e-3)
        assert numeric_convolve(f, f, 0.0) == 0.0

    def test_agrees_with_closed_form(self):
        f = expoly((1.0, 4.3553e-5, 1))
        g = expoly((1.0, 2.7482e-5, 2))
        h = convolve(f, g)
        for tau in (100.0, 5000.0, 91208.0):
            want = h.evaluate(tau)
            got = numeric_convolve(f, g, tau, tol=1e-12)
            assert got == pytest.approx(want, rel=1e-9)

    def test_panel_budget_exhaustion(self):
        from relicomp import NumericalError

        f = expoly((1.0, 1e-3, 2))
        with pytest.raises(NumericalError):
            numeric_convolve(f, f, 1e5, tol=1e-30, max_panels=8, max_rounds=2)


finite_rates = st.floats(min_value=0.0, max_value=1e-3, allow_nan=False)
small_powers = st.integers(min_value=0, max_value=2)
coefs = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False).filter(
    lambda c: c == 0.0 or abs(c) > 1e-12
)


def poly_strategy(max_terms=3):
    term = st.tuples(coefs, small_powers, finite_rates)
    return st.lists(term, min_size=1, max_size=max_terms).map(
        lambda ts: ExpPoly([Term(*t) for t in ts])
    )


class TestProperties:
    @given(poly_strategy(), poly_strategy())
    @settings(max_examples=60, deadline=None)
    def test_commutativity_is_exact(self, f, g):
        assert convolve(f, g) == convolve(g, f)

    @given(poly_strategy(2), poly_strategy(2), poly_strategy(2))
    @settings(max_examples=30, deadline=None)
    def test_associativity_by_evaluation(self, f, g, h):
        tau = np.array([10.0, 1000.0, 50000.0])
        left = convolve(convolve(f, g), h).evaluate(tau)
        right = convolve(f, convolve(g, h)).evaluate(tau)
        scale = np.maximum(np.abs(left), np.abs(right))
        ok = np.abs(left - right) <= 1e-9 * np.maximum(scale, 1e-300)
        assert ok.all()

    @given(poly_strategy(), st.floats(min_value=0.0, max_value=2e5))
    @settings(max_examples=60, deadline=None)
    def test_evaluate_finite(self, f, tau):
        out = f.evaluate(tau)
        assert np.isfinite(out)

    @given(poly_strategy())
    @settings(max_examples=40, deadline=None)
    def test_convolution_of_nonnegative_is_nonnegative(self, f):
        pos = ExpPoly([Term(abs(t.coef), t.power, t.rate) for t in f.terms])
        if not pos.terms:
            return
        h = convolve(pos, pos)
        tau = np.array([1.0, 100.0, 10000.0])
        assert (h.evaluate(tau) >= 0.0).all()
