"""Exponential-polynomial algebra closed under finite-interval convolution.

An ExpPoly is a finite sum of terms ``coef * tau**power * exp(-rate*tau)``
on tau >= 0. The family is closed under the convolution

    (f * g)(tau) = integral_0^tau f(t) g(tau - t) dt,

which is the building block for composing per-component reliability
functions into a moving-average reliability function.

Coefficients are kept in two parallel forms: the public canonical terms use
double precision, while an exact rational shadow is carried internally.
Convolution coefficients are rational functions of the input rates, so the
shadow stays exact; evaluation uses a fast double-precision path and falls
back to the exact shadow (summed in high precision) whenever cancellation
between terms would destroy relative accuracy. Without the fallback, the
partial-fraction form loses all precision when the gap between two rates
times the evaluation point is small.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import groupby
from typing import Iterable, NamedTuple

import mpmath
import numpy as np

from .errors import NumericalError, ValidationError
from .validation import check_nonnegative_scalar, check_positive_scalar

__all__ = ["Term", "ExpPoly", "convolve", "unit_power", "numeric_convolve"]

# Largest tau power a term may carry; keeps factorials and partial-fraction
# expansions in a numerically meaningful range.
MAX_POWER = 64

# Two rates whose gap is below this relative threshold convolve through the
# equal-rate branch; the distinct-rate branch would produce coefficients of
# magnitude ~1/gap**k that cancel catastrophically.
CONFLUENCE_RTOL = 1e-9
CONFLUENCE_FLOOR = 1e-30

# Evaluation falls back to the exact shadow when the sum of term magnitudes
# exceeds the result by this factor (i.e. more than ~5 digits cancel).
_CANCEL_GUARD = 1e5

_EXACT_DPS = 60


class Term(NamedTuple):
    coef: float
    power: int
    rate: float


def _coerce_power(power, where: str) -> int:
    if isinstance(power, bool):
        raise ValidationError(f"{where}: power must be an integer, got bool")
    if isinstance(power, (int, np.integer)):
        p = int(power)
    elif isinstance(power, float) and power.is_integer():
        p = int(power)
    else:
        raise ValidationError(f"{where}: power must be an integer, got {power!r}")
    if p < 0:
        raise ValidationError(f"{where}: power must be >= 0, got {p}")
    if p > MAX_POWER:
        raise ValidationError(f"{where}: power {p} exceeds supported maximum {MAX_POWER}")
    return p


def _coerce_rate(rate, where: str) -> float:
    try:
        r = float(rate)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{where}: rate is not a number ({rate!r})") from exc
    if not math.isfinite(r):
        raise ValidationError(f"{where}: rate must be finite, got {r}")
    if r < 0.0:
        raise ValidationError(f"{where}: rate must be >= 0, got {r}")
    return r + 0.0  # normalize -0.0


def _coerce_coef(coef, where: str) -> Fraction:
    if isinstance(coef, Fraction):
        return coef
    if isinstance(coef, (int, np.integer)) and not isinstance(coef, bool):
        return Fraction(int(coef))
    try:
        c = float(coef)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{where}: coef is not a number ({coef!r})") from exc
    if not math.isfinite(c):
        raise ValidationError(f"{where}: coef must be finite, got {c}")
    return Fraction(c)


def _fraction_to_float(frac: Fraction) -> float:
    try:
        return float(frac)
    except OverflowError as exc:
        raise ValidationError(
            "term coefficient magnitude overflows double precision; the rate "
            "gap is too small for the requested powers") from exc


def _as_tau_array(tau, name: str = "tau"):
    arr = np.asarray(tau, dtype=float)
    scalar = arr.ndim == 0
    flat = np.atleast_1d(arr).ravel()
    if flat.size and not np.all(np.isfinite(flat)):
        raise ValidationError(f"{name}: values must be finite")
    if flat.size and np.any(flat < 0.0):
        raise ValidationError(f"{name}: values must be >= 0")
    return arr, flat, scalar


def _mp_terms_value(exact_terms, t):
    """Sum exact (Fraction, power, rate) terms at mpf t under the active precision."""
    total = mpmath.mpf(0)
    for frac, power, rate in exact_terms:
        c = mpmath.mpf(frac.numerator) / mpmath.mpf(frac.denominator)
        total += c * t ** power * mpmath.e ** (-mpmath.mpf(rate) * t)
    return total


def _horner(coefs: np.ndarray, x: np.ndarray) -> np.ndarray:
    acc = np.full(x.shape, coefs[-1])
    for c in coefs[-2::-1]:
        acc = acc * x
        acc += c
    return acc


class ExpPoly:
    """Canonical sum of ``coef * tau**power * exp(-rate*tau)`` terms.

    Immutable value type. Terms are stored sorted by (rate, power) with
    duplicate (rate, power) pairs merged and zero coefficients dropped;
    equality and hashing use this canonical double-precision form.
    """

    __slots__ = ("terms", "_exact", "_groups")

    def __init__(self, terms: Iterable = ()):
        acc: dict[tuple[float, int], Fraction] = {}
        for idx, item in enumerate(terms):
            try:
                coef, power, rate = item
            except (TypeError, ValueError) as exc:
                raise ValidationError(
                    f"term {idx}: expected a (coef, power, rate) triple, got {item!r}"
                ) from exc
            where = f"term {idx}"
            p = _coerce_power(power, where)
            r = _coerce_rate(rate, where)
            c = _coerce_coef(coef, where)
            key = (r, p)
            acc[key] = acc.get(key, Fraction(0)) + c
        exact = tuple(
            (frac, p, r)
            for (r, p), frac in sorted(acc.items())
            if frac != 0
        )
        public = []
        for frac, p, r in exact:
            f = _fraction_to_float(frac)
            if f != 0.0:
                public.append(Term(f, p, r))
        object.__setattr__(self, "terms", tuple(public))
        object.__setattr__(self, "_exact", exact)

        groups = []
        for rate, items in groupby(self.terms, key=lambda t: t.rate):
            items = list(items)
            pmax = items[-1].power  # terms sorted by power within a rate
            coefs = np.zeros(pmax + 1)
            for t in items:
                coefs[t.power] = t.coef
            groups.append((rate, coefs, np.abs(coefs)))
        object.__setattr__(self, "_groups", tuple(groups))

    def __setattr__(self, name, value):
        raise AttributeError("ExpPoly is immutable")

    def __eq__(self, other):
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __repr__(self):
        inner = ", ".join(f"({t.coef!r}, {t.power}, {t.rate!r})" for t in self.terms)
        return f"ExpPoly([{inner}])"

    @classmethod
    def exponential(cls, rate: float) -> "ExpPoly":
        """The unit exponential decay exp(-rate*tau)."""
        return cls([(1.0, 0, rate)])

    @classmethod
    def constant(cls, value: float) -> "ExpPoly":
        return cls([(value, 0, 0.0)])

    @property
    def max_rate(self) -> float:
        return max((t.rate for t in self.terms), default=0.0)

    def evaluate(self, tau):
        """Evaluate at tau (scalar or array of nonnegative values).

        Large rate*tau underflows to 0 rather than erroring. When the
        double-precision term sum loses more than ~5 digits to cancellation
        the value is recomputed from the exact coefficient shadow.
        """
        arr, flat, scalar = _as_tau_array(tau)
        out = np.zeros(flat.shape)
        absacc = np.zeros(flat.shape)
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            for rate, coefs, abscoefs in self._groups:
                z = np.exp(-rate * flat)
                nz = z != 0.0
                out += np.where(nz, _horner(coefs, flat) * z, 0.0)
                absacc += np.where(nz, _horner(abscoefs, flat) * z, 0.0)
            bad = (~np.isfinite(out)) | (absacc > np.abs(out) * _CANCEL_GUARD)
        if bad.any():
            for i in np.flatnonzero(bad):
                out[i] = self._evaluate_exact(float(flat[i]))
        if scalar:
            return float(out[0])
        return out.reshape(arr.shape)

    def _evaluate_exact(self, tau: float) -> float:
        if not self._exact:
            return 0.0
        with mpmath.workdps(_EXACT_DPS):
            return float(_mp_terms_value(self._exact, mpmath.mpf(tau)))

    def taylor(self, count: int) -> list[Fraction]:
        """Exact Taylor coefficients of the function around tau = 0.

        Returns [s_0, ..., s_{count-1}] with f(tau) = sum s_p tau**p. Exact
        rational arithmetic, so leading coefficients that cancel
        analytically come out as exact zeros.
        """
        if not isinstance(count, int) or count < 1:
            raise ValidationError(f"count: must be a positive integer, got {count!r}")
        out = []
        for p in range(count):
            s = Fraction(0)
            for frac, k, rate in self._exact:
                if k <= p:
                    j = p - k
                    s += frac * (-Fraction(rate)) ** j / math.factorial(j)
            out.append(s)
        return out

    def to_json_obj(self) -> list[dict]:
        """Debug serialization: list of {coef, power, rate} dicts."""
        return [{"coef": t.coef, "power": t.power, "rate": t.rate} for t in self.terms]

    @classmethod
    def from_json_obj(cls, obj) -> "ExpPoly":
        if not isinstance(obj, list):
            raise ValidationError("ExpPoly JSON: expected a list of term objects")
        terms = []
        for idx, entry in enumerate(obj):
            if not isinstance(entry, dict) or set(entry) != {"coef", "power", "rate"}:
                raise ValidationError(
                    f"ExpPoly JSON: term {idx} must be an object with exactly "
                    "the keys coef, power, rate")
            terms.append((entry["coef"], entry["power"], entry["rate"]))
        return cls(terms)


def _confluent(a: float, b: float) -> bool:
    return abs(a - b) <= CONFLUENCE_RTOL * max(a, b, CONFLUENCE_FLOOR)


def convolve(f: ExpPoly, g: ExpPoly) -> ExpPoly:
    """Closed-form convolution ``integral_0^tau f(t) g(tau-t) dt``.

    Termwise. Equal (or nearly confluent) rates a use

        tau**m e^{-a tau} * tau**n e^{-a tau}
            = m! n! / (m+n+1)! * tau**(m+n+1) e^{-a tau},

    nearly-confluent pairs being merged at the midpoint rate. Distinct
    rates expand by partial fractions of the transform-domain product
    m! n! / ((s+a)**(m+1) (s+b)**(n+1)) into terms tau**j e^{-a tau} and
    tau**j e^{-b tau} with j <= max(m, n). Coefficients are computed in
    exact rational arithmetic.
    """
    if not isinstance(f, ExpPoly) or not isinstance(g, ExpPoly):
        raise ValidationError("convolve: both operands must be ExpPoly instances")
    out: list[tuple[Fraction, int, float]] = []
    for cf, m, ra in f._exact:
        for cg, n, rb in g._exact:
            if m + n + 1 > MAX_POWER:
                raise ValidationError(
                    f"convolve: combined term power {m + n + 1} exceeds "
                    f"supported maximum {MAX_POWER}")
            scale = cf * cg
            if _confluent(ra, rb):
                rate = 0.5 * (ra + rb)
                coef = scale * Fraction(
                    math.factorial(m) * math.factorial(n),
                    math.factorial(m + n + 1))
                out.append((coef, m + n + 1, rate))
            else:
                d = Fraction(rb) - Fraction(ra)
                base = scale * (math.factorial(m) * math.factorial(n))
                for i in range(m + 1):
                    coef = (base * (-1) ** i * math.comb(n + i, n)
                            / (math.factorial(m - i) * d ** (n + 1 + i)))
                    out.append((coef, m - i, ra))
                for i in range(n + 1):
                    coef = (base * (-1) ** i * math.comb(m + i, m)
                            / (math.factorial(n - i) * (-d) ** (m + 1 + i)))
                    out.append((coef, n - i, rb))
    return ExpPoly(out)


def unit_power(k: int) -> ExpPoly:
    """k-fold self-convolution of the constant 1: tau**(k-1) / (k-1)!."""
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise ValidationError(f"k: must be a positive integer, got {k!r}")
    if k - 1 > MAX_POWER:
        raise ValidationError(f"k: power {k - 1} exceeds supported maximum {MAX_POWER}")
    return ExpPoly([(Fraction(1, math.factorial(k - 1)), k - 1, 0.0)])


def numeric_convolve(f: ExpPoly, g: ExpPoly, tau, tol: float = 1e-10,
                     max_panels: int = 8192, max_rounds: int = 64) -> float:
    """Adaptive-quadrature convolution value, independent of the closed form.

    Integrates f(t) g(tau - t) over [0, tau] with adaptive Simpson panels
    (Richardson-extrapolated), refining until the estimated absolute error
    is at most tol * (1 + |result|). Raises NumericalError if the panel or
    round budget is exhausted first.
    """
    if not isinstance(f, ExpPoly) or not isinstance(g, ExpPoly):
        raise ValidationError("numeric_convolve: operands must be ExpPoly instances")
    tau = check_nonnegative_scalar(tau, "tau")
    tol = check_positive_scalar(tol, "tol")
    if tau == 0.0:
        return 0.0

    def integrand(t: np.ndarray) -> np.ndarray:
        t = np.clip(t, 0.0, tau)
        return f.evaluate(t) * g.evaluate(np.maximum(tau - t, 0.0))

    offsets = np.array([0.0, 0.25, 0.5, 0.75, 1.0])

    def panels(lo: np.ndarray, hi: np.ndarray):
        w = hi - lo
        x = lo[:, None] + w[:, None] * offsets[None, :]
        y = integrand(x.ravel()).reshape(x.shape)
        s1 = w / 6.0 * (y[:, 0] + 4.0 * y[:, 2] + y[:, 4])
        s2 = w / 12.0 * (y[:, 0] + 4.0 * y[:, 1] + 2.0 * y[:, 2]
                         + 4.0 * y[:, 3] + y[:, 4])
        err = np.abs(s2 - s1) / 15.0
        val = s2 + (s2 - s1) / 15.0
        return val, err

    # start fine enough that smooth integrands converge in one or two
    # rounds; adaptive splitting still handles the rest
    initial = min(128, max_panels)
    edges = np.linspace(0.0, tau, initial + 1)
    lo, hi = edges[:-1], edges[1:]
    val, err = panels(lo, hi)
    for _ in range(max_rounds):
        total = float(np.sum(val))
        budget = tol * (1.0 + abs(total))
        local_ok = err <= budget * (hi - lo) / tau
        if float(np.sum(err)) <= budget and bool(np.all(local_ok)):
            order = np.argsort(lo, kind="stable")
            return float(np.sum(val[order]))
        split = ~local_ok
        if not split.any():
            split = err >= 0.5 * float(np.max(err))
        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        if new_lo.size + np.count_nonzero(~split) > max_panels:
            raise NumericalError(
                f"numeric_convolve: panel budget {max_panels} exhausted at "
                f"tau={tau} (estimated error {float(np.sum(err)):.3e})")
        new_val, new_err = panels(new_lo, new_hi)
        lo = np.concatenate([lo[~split], new_lo])
        hi = np.concatenate([hi[~split], new_hi])
        val = np.concatenate([val[~split], new_val])
        err = np.concatenate([err[~split], new_err])
    raise NumericalError(
        f"numeric_convolve: failed to converge within {max_rounds} rounds at "
        f"tau={tau} (estimated error {float(np.sum(err)):.3e})")
