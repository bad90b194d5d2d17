import math
import warnings

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

import relicomp as rc
from relicomp import (
    GoelOkumoto,
    NearHomogeneousError,
    NearHomogeneousWarning,
    UnfittableDataError,
    ValidationError,
)

# Smallest fittable case with a frozen solution, found by solving the rate
# equation with 40-digit arithmetic.
TINY_TIMES = [0.5, 0.8]
TINY_T = 2.0
TINY_B = 1.1373900279332148
TINY_V0 = 2.2292058796375502


class TestFit:
    def test_two_point_case_frozen(self):
        m = GoelOkumoto().fit(TINY_TIMES, TINY_T)
        assert m.b_ == pytest.approx(TINY_B, rel=1e-12)
        assert m.v0_ == pytest.approx(TINY_V0, rel=1e-12)

    def test_score_residual_small(self):
        m = GoelOkumoto().fit(TINY_TIMES, TINY_T)
        assert abs(m.score_residual_) < 1e-9 * m.n_failures_

    def test_v0_times_captured_fraction_is_n(self):
        """v0 * (1 - exp(-b*T)) equals n by construction; float round-trip
        through expm1 costs at most a few ulps."""
        m = GoelOkumoto().fit(TINY_TIMES, TINY_T)
        n_hat = m.v0_ * -math.expm1(-m.b_ * m.end_of_test_)
        assert n_hat == pytest.approx(2.0, rel=1e-14)

    def test_no_growth_raises(self):
        # mean failure time at exactly T/2: no positive root
        with pytest.raises(NearHomogeneousError, match="no reliability growth"):
            GoelOkumoto().fit([1.0, 2.0], 2.0)

    def test_unidentifiable_trend_raises(self):
        t = np.linspace(3e7, 2.7e8, 10) - 15.0
        with pytest.raises(NearHomogeneousError, match="not identifiable"):
            GoelOkumoto().fit(t, 3e8)

    def test_fragile_fit_warns(self):
        t = np.linspace(1000.0, 99000.0, 50) - 10.0
        with pytest.warns(NearHomogeneousWarning):
            m = GoelOkumoto().fit(t, 1e5)
        assert 1e-6 <= m.b_ * m.end_of_test_ < 1e-2

    def test_no_failures(self):
        with pytest.raises(UnfittableDataError, match="failure-free"):
            GoelOkumoto().fit([], 100.0)

    def test_single_failure(self):
        with pytest.raises(UnfittableDataError, match="at least 2"):
            GoelOkumoto().fit([5.0], 100.0)

    def test_end_of_test_defaults_to_last_failure(self):
        times = [0.1, 0.15, 0.2, 1.0]
        m1 = GoelOkumoto().fit(times, 1.0)
        m2 = GoelOkumoto().fit(times)
        assert (m1.b_, m1.v0_) == (m2.b_, m2.v0_)

    @pytest.mark.parametrize(
        "times",
        [
            [0.8, 0.5],
            [0.5, 0.5],
            [-1.0, 0.5],
            [0.5, float("nan")],
            [0.5, 3.0],  # beyond end_of_test
        ],
    )
    def test_bad_times_rejected(self, times):
        with pytest.raises(ValidationError):
            GoelOkumoto().fit(times, 2.0)

    def test_diagnostics_carry_entry_index(self):
        with pytest.raises(ValidationError, match="entry 3"):
            GoelOkumoto().fit([1.0, 2.0, 3.0, 2.5], 10.0)

    def test_time_rescaling_invariance(self):
        times = [120.0, 480.0, 900.0, 1700.0, 2600.0]
        m = GoelOkumoto().fit(times, 4000.0)
        c = 3600.0
        ms = GoelOkumoto().fit([t / c for t in times], 4000.0 / c)
        assert ms.b_ == pytest.approx(m.b_ * c, rel=1e-9)
        assert ms.v0_ == pytest.approx(m.v0_, rel=1e-9)

    def test_recovers_simulated_parameters(self):
        ds = rc.generate(rc.SimSpec(142.0, 3.48e-5, 91208.0, seed=7))
        m = GoelOkumoto().fit(ds.times, ds.end_of_test)
        assert m.v0_ == pytest.approx(142.0, rel=0.25)
        assert m.b_ == pytest.approx(3.48e-5, rel=0.25)

    def test_component_id_carried(self):
        m = GoelOkumoto().fit(TINY_TIMES, TINY_T, component_id="web")
        assert m.component_id_ == "web"
        assert m.to_dict()["component_id"] == "web"


class TestModelFunctions:
    def test_mean_value_closed_form(self, ref_models):
        m1, _ = ref_models
        tau = np.array([0.0, 1000.0, 91208.0])
        want = 69.0 * -np.expm1(-4.3553e-5 * tau)
        np.testing.assert_allclose(m1.mean_value(tau), want, rtol=1e-15)
        assert m1.mean_value(0.0) == 0.0

    def test_intensity_is_derivative(self, ref_models):
        m1, _ = ref_models
        tau, h = 5000.0, 1e-3
        num = (m1.mean_value(tau + h) - m1.mean_value(tau - h)) / (2 * h)
        assert m1.intensity(tau) == pytest.approx(num, rel=1e-7)

    def test_reliability_expoly(self, ref_models):
        m1, _ = ref_models
        r = m1.reliability()
        assert r.evaluate(0.0) == 1.0
        assert r.evaluate(1e4) == pytest.approx(math.exp(-4.3553e-5 * 1e4), rel=1e-15)

    def test_rejects_negative_tau(self, ref_models):
        m1, _ = ref_models
        with pytest.raises(ValidationError):
            m1.mean_value(-1.0)

    def test_unfitted_raises(self):
        m = GoelOkumoto()
        with pytest.raises(NotFittedError):
            m.mean_value(1.0)


class TestSerialization:
    def test_round_trip_exact(self):
        m = GoelOkumoto().fit(TINY_TIMES, TINY_T, component_id="a")
        m2 = GoelOkumoto.from_dict(m.to_dict())
        assert m2.v0_ == m.v0_
        assert m2.b_ == m.b_
        assert m2.end_of_test_ == m.end_of_test_
        assert m2.component_id_ == "a"

    @pytest.mark.parametrize(
        "obj",
        [
            {"v0": 1.0, "b": 1.0},
            {"v0": 1.0, "b": 1.0, "end_of_test": 1.0, "extra": 2},
            {"v0": "x", "b": 1.0, "end_of_test": 1.0},
            {"v0": -1.0, "b": 1.0, "end_of_test": 1.0},
            [1, 2, 3],
        ],
    )
    def test_from_dict_rejects(self, obj):
        with pytest.raises(ValidationError):
            GoelOkumoto.from_dict(obj)

    def test_from_params_validates(self):
        with pytest.raises(ValidationError):
            GoelOkumoto.from_params(0.0, 1.0, 1.0)


class TestEstimatorContract:
    def test_get_set_params(self):
        m = GoelOkumoto(tol=1e-12)
        assert m.get_params() == {"tol": 1e-12}
        m.set_params(tol=1e-10)
        assert m.tol == 1e-10

    def test_clone_unfits(self):
        m = GoelOkumoto().fit(TINY_TIMES, TINY_T)
        c = clone(m)
        assert c.tol == m.tol
        with pytest.raises(NotFittedError):
            c.mean_value(1.0)

    def test_bad_tol_rejected(self):
        with pytest.raises(ValidationError):
            GoelOkumoto(tol=0.0).fit(TINY_TIMES, TINY_T)

    def test_loose_tol_still_converges_reasonably(self):
        m = GoelOkumoto(tol=1e-6).fit(TINY_TIMES, TINY_T)
        assert m.b_ == pytest.approx(TINY_B, rel=1e-5)
