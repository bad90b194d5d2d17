"""Maximum-likelihood fitting of the exponential-decay NHPP failure model.

The model: failures arrive as a nonhomogeneous Poisson process with mean
value function mu(tau) = v0 * (1 - exp(-b*tau)), so v0 is the expected
total number of failures and b the per-fault exposure rate. Given failure
times t_1 < ... < t_n observed on [0, T], the profile likelihood reduces
to a one-dimensional root problem in b:

    score(b) = n/b - sum(t_i) - n*T / (exp(b*T) - 1) = 0

after which v0 = n / (1 - exp(-b*T)). score is strictly decreasing with
limit n*T/2 - sum(t_i) as b -> 0+, so a positive root exists exactly when
the mean failure time is below T/2; otherwise the data shows no
reliability growth and the fit is rejected as near-homogeneous.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .errors import (
    FitError,
    NearHomogeneousError,
    NearHomogeneousWarning,
    UnfittableDataError,
    ValidationError,
)
from .expconv import ExpPoly
from .validation import check_failure_times, check_positive_scalar

__all__ = ["GoelOkumoto"]

# Below this value of b*T the exponential trend is indistinguishable from a
# homogeneous process at double precision and v0 explodes; reject the fit.
_BT_ERROR = 1e-6
# Below this value the fit is returned but flagged as fragile.
_BT_WARN = 1e-2

_MAX_BRACKET_DOUBLINGS = 200
_MAX_BISECTIONS = 300


def _score(b: float, n: int, sum_times: float, T: float) -> float:
    x = b * T
    if x > 700.0:
        tail = 0.0  # n*T/expm1(x) underflows past double range
    else:
        tail = n * T / math.expm1(x)
    return n / b - sum_times - tail


def _solve_rate(n: int, sum_times: float, T: float, rtol: float) -> float:
    b_lo = 1e-15
    if _score(b_lo, n, sum_times, T) <= 0.0:
        raise NearHomogeneousError(
            "no reliability growth: mean failure time "
            f"{sum_times / n:.6g} is not below end_of_test/2 = {T / 2:.6g}, "
            "so the rate equation has no positive solution")
    b_hi = 1.0 / T
    doublings = 0
    while _score(b_hi, n, sum_times, T) > 0.0:
        b_hi *= 2.0
        doublings += 1
        if doublings > _MAX_BRACKET_DOUBLINGS:
            raise FitError("failed to bracket the rate equation root")
    for _ in range(_MAX_BISECTIONS):
        mid = 0.5 * (b_lo + b_hi)
        if mid <= b_lo or mid >= b_hi:
            break  # interval is at float resolution
        if _score(mid, n, sum_times, T) > 0.0:
            b_lo = mid
        else:
            b_hi = mid
        if b_hi - b_lo <= rtol * mid:
            break
    return 0.5 * (b_lo + b_hi)


class GoelOkumoto(BaseEstimator):
    """NHPP reliability-growth model with exponentially decaying intensity.

    Parameters
    ----------
    tol : float
        Relative width at which the rate-equation bisection stops. The
        default refines essentially to machine precision.

    Attributes (after fit)
    ----------------------
    v0_ : expected total number of failures
    b_ : exposure rate (1 / time units of the data)
    end_of_test_ : observation window length used for the fit
    n_failures_ : number of failure times
    component_id_ : optional identifier carried through from the data
    score_residual_ : rate equation residual at b_, in units of failures
    """

    def __init__(self, tol: float = 1e-15):
        self.tol = tol

    def fit(self, times, end_of_test: float | None = None,
            component_id: str | None = None) -> "GoelOkumoto":
        """Fit to strictly increasing failure times observed on [0, end_of_test].

        end_of_test defaults to the last failure time. Raises
        UnfittableDataError for fewer than 2 failures and
        NearHomogeneousError when the data shows no reliability growth.
        """
        tol = check_positive_scalar(self.tol, "tol")
        if end_of_test is not None:
            end_of_test = check_positive_scalar(end_of_test, "end_of_test")
        t = check_failure_times(times, end_of_test=end_of_test, name="times")
        if t.size == 0:
            raise UnfittableDataError(
                "failure-free component: unfittable (no failures observed in "
                "the test window)")
        if t.size == 1:
            raise UnfittableDataError(
                "times: need at least 2 failure times to fit, got 1")
        T = float(t[-1]) if end_of_test is None else end_of_test
        n = int(t.size)
        sum_times = float(np.sum(t))
        b = _solve_rate(n, sum_times, T, tol)
        if b * T < _BT_ERROR:
            raise NearHomogeneousError(
                f"fitted b*end_of_test = {b * T:.3g} is below {_BT_ERROR:g}; "
                "the exponential trend is not identifiable from this data")
        if b * T < _BT_WARN:
            warnings.warn(
                f"fitted b*end_of_test = {b * T:.3g} is small; v0 and b are "
                "poorly identified", NearHomogeneousWarning, stacklevel=2)
        self.v0_ = n / -math.expm1(-b * T)
        self.b_ = b
        self.end_of_test_ = T
        self.n_failures_ = n
        self.component_id_ = component_id
        self.score_residual_ = _score(b, n, sum_times, T)
        return self

    @classmethod
    def from_params(cls, v0: float, b: float, end_of_test: float,
                    component_id: str | None = None) -> "GoelOkumoto":
        """Build a fitted instance directly from known parameters."""
        inst = cls()
        inst.v0_ = check_positive_scalar(v0, "v0")
        inst.b_ = check_positive_scalar(b, "b")
        inst.end_of_test_ = check_positive_scalar(end_of_test, "end_of_test")
        inst.n_failures_ = None
        inst.component_id_ = component_id
        inst.score_residual_ = None
        return inst

    def _check_fitted(self):
        check_is_fitted(self, ["v0_", "b_", "end_of_test_"])

    def mean_value(self, tau):
        """Expected cumulative failures mu(tau) = v0 * (1 - exp(-b*tau))."""
        self._check_fitted()
        arr = np.asarray(tau, dtype=float)
        if arr.size and (not np.all(np.isfinite(arr)) or np.any(arr < 0.0)):
            raise ValidationError("tau: values must be finite and >= 0")
        out = -self.v0_ * np.expm1(-self.b_ * arr)
        return float(out) if arr.ndim == 0 else out

    def intensity(self, tau):
        """Failure intensity lambda(tau) = v0 * b * exp(-b*tau)."""
        self._check_fitted()
        arr = np.asarray(tau, dtype=float)
        if arr.size and (not np.all(np.isfinite(arr)) or np.any(arr < 0.0)):
            raise ValidationError("tau: values must be finite and >= 0")
        out = self.v0_ * self.b_ * np.exp(-self.b_ * arr)
        return float(out) if arr.ndim == 0 else out

    def reliability(self) -> ExpPoly:
        """Per-fault survival exp(-b*tau) as an ExpPoly, the composition input."""
        self._check_fitted()
        return ExpPoly.exponential(self.b_)

    def to_dict(self) -> dict:
        """Parameter dict: component_id, v0, b, end_of_test (exactly these keys)."""
        self._check_fitted()
        return {
            "component_id": self.component_id_,
            "v0": self.v0_,
            "b": self.b_,
            "end_of_test": self.end_of_test_,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "GoelOkumoto":
        if not isinstance(obj, dict):
            raise ValidationError("model JSON: expected an object")
        required = {"v0", "b", "end_of_test"}
        unknown = set(obj) - required - {"component_id"}
        if unknown:
            raise ValidationError(f"model JSON: unknown keys {sorted(unknown)}")
        missing = required - set(obj)
        if missing:
            raise ValidationError(f"model JSON: missing keys {sorted(missing)}")
        component_id = obj.get("component_id")
        if component_id is not None and not isinstance(component_id, str):
            raise ValidationError("model JSON: component_id must be a string or null")
        return cls.from_params(obj["v0"], obj["b"], obj["end_of_test"],
                               component_id=component_id)
