"""System-level reliability from per-component models and path structure.

A system is a set of execution paths, each a sequence of components with a
usage probability. Per path, the expected-failures curve is

    mu_path(tau) = v0_path * (1 - MA(tau)),    v0_path = sum of component v0,

with MA the moving-average composition of the component reliability
functions. Reliability predictions are conditional on the observed history:
given no failures since time tau_prev, the chance of surviving a further
tau_next is exp(-(mu(tau_prev + tau_next) - mu(tau_prev))).

System reliability mixes the per-path conditionals by usage probability.
Each path conditions on its own last failure time; paths whose last
failure predates the system's carry the elapsed gap inside the horizon.

replace_component rebuilds only the paths that use the swapped component
and reuses the existing PathModel objects everywhere else, so large
systems can be re-evaluated incrementally.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Mapping, Sequence

import numpy as np

from .errors import DuplicateComponentWarning, ValidationError
from .expconv import _as_tau_array
from .gofit import GoelOkumoto
from .ma import MAFunction, ma_continuous, ma_sampled
from .validation import (
    check_nonnegative_scalar,
    check_positive_scalar,
    check_probability,
)

if TYPE_CHECKING:
    from .datasets import SystemConfig

__all__ = [
    "PathSpec",
    "PathModel",
    "SampledPathModel",
    "SystemModel",
    "build_path_model",
    "build_sampled_path_model",
    "build_system",
    "sampled_system",
    "replace_component",
    "conditional_reliability",
    "additive_mu",
]

_PROBABILITY_SUM_TOL = 1e-12


@dataclass(frozen=True)
class PathSpec:
    """Declarative description of one execution path."""

    components: tuple[str, ...]
    probability: float
    last_failure_time: float

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValidationError("path components: must not be empty")
        for i, cid in enumerate(comps):
            if not isinstance(cid, str) or not cid:
                raise ValidationError(
                    f"path components[{i}]: must be a non-empty string, got {cid!r}")
        object.__setattr__(self, "components", comps)
        object.__setattr__(
            self, "probability", check_probability(self.probability, "probability"))
        object.__setattr__(
            self, "last_failure_time",
            check_nonnegative_scalar(self.last_failure_time, "last_failure_time"))

    @property
    def unique_components(self) -> tuple[str, ...]:
        """Component ids in first-appearance order with repeats dropped."""
        return tuple(dict.fromkeys(self.components))


@dataclass(frozen=True)
class PathModel:
    """Fitted reliability model for one path."""

    v0: float
    ma: MAFunction

    def mu(self, tau):
        """Expected cumulative path failures v0 * (1 - MA(tau))."""
        arr, flat, scalar = _as_tau_array(tau)
        out = self.v0 * (1.0 - np.asarray(self.ma.value(flat)))
        if scalar:
            return float(out[0])
        return out.reshape(arr.shape)


@dataclass(frozen=True, eq=False)
class SampledPathModel:
    """Path model composed from bounded-support sampled reliabilities.

    The moving average is tabulated on a uniform grid and interpolated
    linearly; beyond the grid it is held at its last value.
    """

    v0: float
    tau_grid: np.ndarray
    ma_values: np.ndarray

    def mu(self, tau):
        arr, flat, scalar = _as_tau_array(tau)
        ma = np.interp(flat, self.tau_grid, self.ma_values)
        out = self.v0 * (1.0 - ma)
        if scalar:
            return float(out[0])
        return out.reshape(arr.shape)


def build_path_model(models: Sequence[GoelOkumoto]) -> PathModel:
    """Compose fitted component models into a PathModel.

    Callers pass each distinct component once; resolving a PathSpec drops
    repeats before reaching here.
    """
    models = list(models)
    if not models:
        raise ValidationError("models: need at least one fitted component model")
    for i, m in enumerate(models):
        if not isinstance(m, GoelOkumoto):
            raise ValidationError(f"models[{i}]: expected GoelOkumoto, got {type(m).__name__}")
        m._check_fitted()
    v0 = float(sum(m.v0_ for m in models))
    ma = ma_continuous([m.reliability() for m in models])
    return PathModel(v0, ma)


def build_sampled_path_model(models: Sequence[GoelOkumoto], step: float) -> SampledPathModel:
    """Compose fitted models on their own observation windows.

    Each component's reliability is sampled only on [0, end_of_test] of the
    data it was fitted from, so components tested over short windows do not
    contribute extrapolated tail behaviour to the composition.
    """
    models = list(models)
    if not models:
        raise ValidationError("models: need at least one fitted component model")
    for i, m in enumerate(models):
        if not isinstance(m, GoelOkumoto):
            raise ValidationError(f"models[{i}]: expected GoelOkumoto, got {type(m).__name__}")
        m._check_fitted()
    funcs = [m.reliability() for m in models]
    supports = [m.end_of_test_ for m in models]
    grid, values = ma_sampled(funcs, supports, step)
    v0 = float(sum(m.v0_ for m in models))
    return SampledPathModel(v0, grid, values)


def conditional_reliability(mu: Callable, tau_prev, tau_next):
    """P(no failure in (tau_prev, tau_prev + tau_next] | none since tau_prev)

    for a process with mean value function mu: exp(-(mu(tau_prev + tau_next)
    - mu(tau_prev))), clamped into [0, 1] against rounding.
    """
    tau_prev = check_nonnegative_scalar(tau_prev, "tau_prev")
    arr, flat, scalar = _as_tau_array(tau_next, "tau_next")
    base = float(mu(tau_prev))
    ahead = np.asarray(mu(tau_prev + flat), dtype=float)
    out = np.minimum(np.exp(-(ahead - base)), 1.0)
    if scalar:
        return float(out[0])
    return out.reshape(arr.shape)


def additive_mu(models: Sequence[GoelOkumoto]) -> Callable:
    """Sum of the component mean value functions (no interaction model)."""
    models = list(models)
    if not models:
        raise ValidationError("models: need at least one fitted component model")
    for m in models:
        m._check_fitted()

    def mu(tau):
        arr = np.asarray(tau, dtype=float)
        total = sum(np.asarray(m.mean_value(tau), dtype=float) for m in models)
        return float(total) if arr.ndim == 0 else total

    return mu


@dataclass(frozen=True, eq=False)
class SystemModel:
    """Fitted multi-path system: component models, path models, history."""

    components: Mapping[str, GoelOkumoto]
    paths: tuple[tuple[PathSpec, PathModel], ...]
    system_last_failure: float

    def __post_init__(self):
        if not self.paths:
            raise ValidationError("paths: must not be empty")
        object.__setattr__(
            self, "system_last_failure",
            check_nonnegative_scalar(self.system_last_failure, "system_last_failure"))
        total = 0.0
        for i, (spec, _model) in enumerate(self.paths):
            total += spec.probability
            if spec.last_failure_time > self.system_last_failure:
                raise ValidationError(
                    f"paths[{i}]: last_failure_time {spec.last_failure_time} exceeds "
                    f"system_last_failure {self.system_last_failure}")
            for cid in spec.components:
                if cid not in self.components:
                    raise ValidationError(
                        f"paths[{i}]: unknown component id {cid!r}")
        if abs(total - 1.0) > _PROBABILITY_SUM_TOL:
            raise ValidationError(
                f"path probabilities sum to {total!r}, must equal 1 within "
                f"{_PROBABILITY_SUM_TOL:g}")

    def path_reliability(self, index: int, tau_next):
        """Conditional reliability of one path over the system horizon.

        The path conditions on its own last failure; if that predates the
        system's last failure the elapsed gap is added to the horizon.
        """
        if not 0 <= index < len(self.paths):
            raise ValidationError(f"index: no path {index}, have {len(self.paths)}")
        spec, model = self.paths[index]
        gap = self.system_last_failure - spec.last_failure_time
        arr, flat, scalar = _as_tau_array(tau_next, "tau_next")
        out = conditional_reliability(model.mu, spec.last_failure_time, flat + gap)
        out = np.asarray(out, dtype=float)
        if scalar:
            return float(out[0])
        return out.reshape(arr.shape)

    def reliability(self, tau_next):
        """Usage-probability mix of the per-path conditional reliabilities."""
        arr, flat, scalar = _as_tau_array(tau_next, "tau_next")
        out = np.zeros(flat.shape)
        for i, (spec, _model) in enumerate(self.paths):
            out += spec.probability * np.asarray(
                self.path_reliability(i, flat), dtype=float)
        if scalar:
            return float(out[0])
        return out.reshape(arr.shape)


def _resolve_path(spec: PathSpec,
                  models: Mapping[str, GoelOkumoto]) -> list[GoelOkumoto]:
    unique = spec.unique_components
    if len(unique) < len(spec.components):
        dupes = sorted({c for c in spec.components if spec.components.count(c) > 1})
        warnings.warn(
            f"path {list(spec.components)}: repeated components {dupes} are "
            "counted once", DuplicateComponentWarning, stacklevel=3)
    missing = [c for c in unique if c not in models]
    if missing:
        raise ValidationError(f"path references unknown component ids {missing}")
    return [models[c] for c in unique]


def build_system(config: "SystemConfig") -> SystemModel:
    """Fit (where needed) and compose a SystemConfig into a SystemModel.

    Config components may be fitted GoelOkumoto models or failure datasets;
    datasets are fitted here with their config key as component_id.
    """
    models: dict[str, GoelOkumoto] = {}
    for cid, entry in config.components.items():
        if isinstance(entry, GoelOkumoto):
            entry._check_fitted()
            models[cid] = entry
        else:
            models[cid] = GoelOkumoto().fit(
                entry.times, entry.end_of_test, component_id=cid)
    paths = []
    for spec in config.paths:
        paths.append((spec, build_path_model(_resolve_path(spec, models))))
    return SystemModel(models, tuple(paths), config.system_last_failure)


def sampled_system(system: SystemModel, step: float) -> SystemModel:
    """Rebuild every path of a system with bounded-support sampled models."""
    step = check_positive_scalar(step, "step")
    paths = []
    for spec, _model in system.paths:
        models = _resolve_path(spec, system.components)
        paths.append((spec, build_sampled_path_model(models, step)))
    return SystemModel(system.components, tuple(paths), system.system_last_failure)


def replace_component(system: SystemModel, component_id: str,
                      new_model: GoelOkumoto) -> tuple[SystemModel, int, int]:
    """Swap one component model and re-evaluate only the affected paths.

    Returns (new_system, n_recomputed, n_reused). Paths that do not use
    component_id keep their existing PathModel objects.
    """
    if component_id not in system.components:
        raise ValidationError(f"component_id: unknown component {component_id!r}")
    if not isinstance(new_model, GoelOkumoto):
        raise ValidationError(
            f"new_model: expected GoelOkumoto, got {type(new_model).__name__}")
    new_model._check_fitted()
    components = dict(system.components)
    components[component_id] = new_model
    paths = []
    recomputed = 0
    reused = 0
    for spec, model in system.paths:
        if component_id in spec.components:
            if not isinstance(model, PathModel):
                raise ValidationError(
                    "replace_component: sampled path models cannot be rebuilt "
                    "incrementally; rebuild the sampled system instead")
            paths.append((spec, build_path_model(_resolve_path(spec, components))))
            recomputed += 1
        else:
            paths.append((spec, model))
            reused += 1
    return SystemModel(components, tuple(paths), system.system_last_failure), recomputed, reused
