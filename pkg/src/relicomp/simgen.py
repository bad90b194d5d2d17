"""Synthetic failure-time generation from known NHPP parameters.

Sampling uses the order-statistics property of the NHPP with mean value
function mu(tau) = v0 * (1 - exp(-b*tau)): the number of failures on
[0, T] is Poisson with mean mu(T), and given the count the times are
i.i.d. with CDF mu(tau)/mu(T), invertible in closed form:

    t = -log1p(-u * c) / b,    c = 1 - exp(-b*T),  u ~ U[0, 1).

Streams come from numpy's PCG64 generator seeded directly with the given
integer, so a (parameters, seed) pair reproduces the same dataset across
runs and platforms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .datasets import FailureDataset, _check_component_id
from .errors import ValidationError
from .validation import check_positive_scalar

__all__ = ["SimSpec", "generate"]


@dataclass(frozen=True)
class SimSpec:
    """Ground-truth parameters and seed for one synthetic dataset."""

    v0: float
    b: float
    end_of_test: float
    seed: int
    component_id: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "v0", check_positive_scalar(self.v0, "v0"))
        object.__setattr__(self, "b", check_positive_scalar(self.b, "b"))
        object.__setattr__(
            self, "end_of_test", check_positive_scalar(self.end_of_test, "end_of_test"))
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)):
            raise ValidationError(f"seed: must be an integer, got {self.seed!r}")
        if self.seed < 0:
            raise ValidationError(f"seed: must be >= 0, got {self.seed}")
        object.__setattr__(self, "seed", int(self.seed))
        if self.component_id is not None:
            _check_component_id(self.component_id)

    @classmethod
    def from_json_obj(cls, obj) -> "SimSpec":
        if not isinstance(obj, dict):
            raise ValidationError("simulation spec: expected an object")
        required = {"v0", "b", "end_of_test", "seed"}
        unknown = set(obj) - required - {"component_id"}
        if unknown:
            raise ValidationError(f"simulation spec: unknown keys {sorted(unknown)}")
        missing = required - set(obj)
        if missing:
            raise ValidationError(f"simulation spec: missing keys {sorted(missing)}")
        return cls(obj["v0"], obj["b"], obj["end_of_test"], obj["seed"],
                   obj.get("component_id"))

    @classmethod
    def from_json(cls, text: str) -> "SimSpec":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"simulation spec: invalid JSON ({exc})") from exc
        return cls.from_json_obj(obj)


def _draw_times(rng: np.random.Generator, count: int, c: float, b: float) -> np.ndarray:
    u = rng.random(count)
    return -np.log1p(-u * c) / b


def generate(spec: SimSpec) -> FailureDataset:
    """Draw one dataset. May be failure-free (empty times) by chance."""
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    c = -math.expm1(-spec.b * spec.end_of_test)
    count = int(rng.poisson(spec.v0 * c))
    times = np.sort(_draw_times(rng, count, c, spec.b))
    while times.size:
        # ties and zeros are measure-zero but must not reach the dataset
        dup = np.flatnonzero(np.diff(times) == 0.0)
        bad = dup.size + (1 if times[0] <= 0.0 else 0)
        if bad == 0:
            break
        keep = np.delete(times, dup)
        keep = keep[keep > 0.0]
        redrawn = _draw_times(rng, times.size - keep.size, c, spec.b)
        times = np.sort(np.concatenate([keep, redrawn]))
    return FailureDataset(tuple(float(t) for t in times), spec.end_of_test,
                          spec.component_id)
