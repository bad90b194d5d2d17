"""Moving-average composition of per-component reliability functions.

A path through a system exercises k components whose individual reliability
functions are f_1 ... f_k. The composed path reliability used here is the
normalized k-fold convolution

    MA(tau) = (f_1 * f_2 * ... * f_k)(tau) / (1 * 1 * ... * 1)(tau),

a moving average of the component reliabilities over the simplex of ways
to split the horizon tau across the k components. The denominator is the
k-fold self-convolution of the constant 1, i.e. tau**(k-1) / (k-1)!.

Both numerator and denominator vanish to order k-1 at tau = 0, so the
ratio is evaluated there through its exact Taylor expansion; composing
unit-reliability components yields MA(0) == 1.0 exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import floor
from typing import Sequence

import mpmath
import numpy as np

from .errors import ValidationError
from .expconv import (
    _EXACT_DPS,
    _as_tau_array,
    _mp_terms_value,
    ExpPoly,
    convolve,
    unit_power,
)
from .validation import as_float_array, check_positive_scalar

__all__ = ["MAFunction", "ma_continuous", "ma_discrete", "ma_sampled"]

# Number of correction terms in the small-tau Taylor branch. The branch is
# used only for max_rate * tau <= 1e-6, where the truncation error is
# ~(max_rate * tau)**7 relative, far below double precision.
_SERIES_TERMS = 6


@dataclass(frozen=True)
class MAFunction:
    """Evaluable moving-average reliability for a path of k components.

    value(tau) switches between an exact Taylor expansion near tau = 0
    (where numerator and denominator both vanish to order k-1) and the
    direct ratio elsewhere. Instances are built by ma_continuous.
    """

    numerator: ExpPoly
    denominator: ExpPoly
    k: int
    value_at_zero: float
    series: tuple[float, ...]
    tau_switch: float

    def value(self, tau):
        arr, flat, scalar = _as_tau_array(tau)
        out = np.empty(flat.shape)
        small = flat <= self.tau_switch
        if small.any():
            ts = flat[small]
            acc = np.zeros(ts.shape)
            for r in self.series[::-1]:
                acc = (acc + r) * ts
            out[small] = self.value_at_zero * (1.0 + acc)
        big = ~small
        if big.any():
            tb = flat[big]
            with np.errstate(divide="ignore", invalid="ignore"):
                vals = self.numerator.evaluate(tb) / self.denominator.evaluate(tb)
            bad = ~np.isfinite(vals)
            if bad.any():
                # simultaneous underflow of numerator and denominator
                for i in np.flatnonzero(bad):
                    vals[i] = self._value_exact(float(tb[i]))
            out[big] = vals
        if scalar:
            return float(out[0])
        return out.reshape(arr.shape)

    def _value_exact(self, tau: float) -> float:
        with mpmath.workdps(_EXACT_DPS):
            t = mpmath.mpf(tau)
            num = _mp_terms_value(self.numerator._exact, t)
            den = _mp_terms_value(self.denominator._exact, t)
            return float(num / den)


def ma_continuous(components: Sequence[ExpPoly]) -> MAFunction:
    """Compose component reliability functions into a path MAFunction.

    Each component must satisfy f(0) == 1 within 1e-12 (a reliability
    starts at certainty). A single component passes through unchanged:
    the k = 1 moving average is the component itself.
    """
    comps = list(components)
    if not comps:
        raise ValidationError("components: need at least one reliability function")
    f0s: list[Fraction] = []
    for i, f in enumerate(comps):
        if not isinstance(f, ExpPoly):
            raise ValidationError(f"components[{i}]: expected ExpPoly, got {type(f).__name__}")
        f0 = f.taylor(1)[0]
        if abs(float(f0) - 1.0) > 1e-12:
            raise ValidationError(
                f"components[{i}]: reliability at tau=0 is {float(f0)!r}, "
                "must equal 1 within 1e-12")
        f0s.append(f0)
    k = len(comps)
    numerator = reduce(convolve, comps)
    denominator = unit_power(k)

    limit = Fraction(1)
    for f0 in f0s:
        limit *= f0
    value_at_zero = float(limit)

    max_rate = numerator.max_rate
    if max_rate > 0.0:
        n_terms = _SERIES_TERMS
        tau_switch = 1e-6 / max_rate
    else:
        # pure polynomial: the expansion terminates and is exact everywhere
        pmax = max((t.power for t in numerator.terms), default=k - 1)
        n_terms = max(_SERIES_TERMS, pmax - (k - 1))
        tau_switch = np.inf
    s = numerator.taylor(k + n_terms)
    s_lead = s[k - 1]
    series = tuple(float(s[k - 1 + j] / s_lead) for j in range(1, n_terms + 1))
    return MAFunction(numerator, denominator, k, value_at_zero, series, tau_switch)


def ma_discrete(vectors: Sequence) -> np.ndarray:
    """Moving average of reliability vectors sampled on a common step.

    Discrete counterpart of ma_continuous: the elementwise convolution of
    the vectors divided by the convolution of all-ones vectors of the same
    lengths (exact integer counts). Output length is
    sum(len(v_i)) - (count - 1).
    """
    vecs = [as_float_array(v, f"vectors[{i}]") for i, v in enumerate(vectors)]
    if not vecs:
        raise ValidationError("vectors: need at least one reliability vector")
    for i, v in enumerate(vecs):
        if v.size == 0:
            raise ValidationError(f"vectors[{i}]: must not be empty")
    num = reduce(np.convolve, vecs)
    den = reduce(np.convolve, [np.ones(v.size, dtype=np.int64) for v in vecs])
    return num / den


def ma_sampled(functions: Sequence[ExpPoly], supports: Sequence[float],
               step: float) -> tuple[np.ndarray, np.ndarray]:
    """Moving average of reliability functions with bounded supports.

    Samples each function on its own window [0, supports[i]] at the common
    step, then composes with ma_discrete. This keeps each component's
    contribution limited to the horizon it was actually observed over,
    unlike ma_continuous which extends every component to all tau.

    Returns (tau_grid, values); the grid spans sum of the sampled windows.
    """
    funcs = list(functions)
    if not funcs:
        raise ValidationError("functions: need at least one reliability function")
    if len(funcs) != len(supports):
        raise ValidationError(
            f"supports: expected {len(funcs)} entries, got {len(supports)}")
    step = check_positive_scalar(step, "step")
    sup = [check_positive_scalar(s, f"supports[{i}]") for i, s in enumerate(supports)]
    if step > min(sup):
        raise ValidationError(
            f"step: {step} exceeds the smallest support {min(sup)}; every "
            "component needs at least two samples")
    vecs = []
    for i, (f, s) in enumerate(zip(funcs, sup)):
        if not isinstance(f, ExpPoly):
            raise ValidationError(f"functions[{i}]: expected ExpPoly, got {type(f).__name__}")
        n = int(floor(s / step + 1e-9)) + 1
        vecs.append(f.evaluate(np.arange(n) * step))
    values = ma_discrete(vecs)
    tau_grid = np.arange(values.size) * step
    return tau_grid, values
