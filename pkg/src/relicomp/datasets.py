"""Failure-time datasets, system configuration, and their file formats.

Dataset files are plain text: header comment lines first, then one failure
time per line in repr (shortest round-trip) form.

    # end_of_test=91208.0
    # component_id=c1
    479.0
    745.0

System configuration is JSON with four top-level keys:

    {
      "components": {"c1": {"v0": ..., "b": ..., "end_of_test": ...},
                     "c2": "relative/path/to/dataset.csv"},
      "paths": [{"components": ["c1", "c2"], "probability": 1.0,
                 "last_failure_time": 88682.0}],
      "system_last_failure": 88682.0,
      "baseline": {"v0": ..., "b": ..., "end_of_test": ...}
    }

Component entries are either inline fitted parameters or a dataset path
(resolved relative to the config file) to be fitted at build time.
"baseline" is optional: a single NHPP fitted to the pooled system data,
used for curve comparisons. Serialization is canonical (sorted keys,
two-space indent, repr floats, trailing newline) so equal models produce
byte-identical files.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Union

from .errors import ValidationError
from .gofit import GoelOkumoto
from .sysmodel import PathModel, PathSpec, SystemModel
from .validation import check_positive_scalar

__all__ = [
    "FailureDataset",
    "SystemConfig",
    "load_dataset",
    "dump_dataset",
    "load_system_config",
    "dump_system_config",
    "system_model_to_config",
    "load_model",
    "dump_model",
    "path_model_to_obj",
    "canonical_json",
]

_HEADER_KEYS = ("end_of_test", "component_id")


def canonical_json(obj) -> str:
    """Deterministic JSON text: sorted keys, 2-space indent, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _check_component_id(value, where: str = "component_id") -> str:
    if not isinstance(value, str) or not value:
        raise ValidationError(f"{where}: must be a non-empty string, got {value!r}")
    if value != value.strip():
        raise ValidationError(f"{where}: surrounding whitespace in {value!r}")
    if "\n" in value or "\r" in value:
        raise ValidationError(f"{where}: must not contain line breaks")
    return value


@dataclass(frozen=True)
class FailureDataset:
    """Failure times of one component observed on [0, end_of_test]."""

    times: tuple[float, ...]
    end_of_test: float
    component_id: str | None = None

    def __post_init__(self):
        end = check_positive_scalar(self.end_of_test, "end_of_test")
        object.__setattr__(self, "end_of_test", end)
        try:
            times = tuple(float(t) for t in self.times)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"times: not a sequence of numbers ({exc})") from exc
        prev = 0.0
        for i, t in enumerate(times):
            if not math.isfinite(t) or t <= prev:
                raise ValidationError(
                    f"times: entry {i} ({t}) must be finite and greater than "
                    f"{'0' if i == 0 else f'entry {i - 1} ({prev})'}")
            prev = t
        if times and times[-1] > end:
            raise ValidationError(
                f"times: last entry {times[-1]} exceeds end_of_test {end}")
        object.__setattr__(self, "times", times)
        if self.component_id is not None:
            _check_component_id(self.component_id)

    @property
    def n_failures(self) -> int:
        return len(self.times)

    @property
    def last_failure(self) -> float | None:
        return self.times[-1] if self.times else None


def _read_text(source) -> str:
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            try:
                return data.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ValidationError(f"dataset: not valid UTF-8 ({exc})") from exc
        return data
    return Path(source).read_text(encoding="utf-8")


def load_dataset(source: Union[str, Path, io.IOBase]) -> FailureDataset:
    """Parse a dataset file; diagnostics carry 1-based line numbers."""
    text = _read_text(source)
    end_of_test: float | None = None
    component_id: str | None = None
    times: list[float] = []
    saw_data = False
    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        if line.startswith("#"):
            if saw_data:
                raise ValidationError(
                    f"line {line_no}: header after data; headers must come first")
            body = line[1:].strip()
            key, sep, value = body.partition("=")
            if not sep or key not in _HEADER_KEYS:
                raise ValidationError(
                    f"line {line_no}: unknown header {line!r}; expected "
                    f"'# end_of_test=<value>' or '# component_id=<name>'")
            if key == "end_of_test":
                if end_of_test is not None:
                    raise ValidationError(f"line {line_no}: duplicate end_of_test header")
                try:
                    end_of_test = float(value)
                except ValueError as exc:
                    raise ValidationError(
                        f"line {line_no}: end_of_test is not a number ({value!r})") from exc
                if not math.isfinite(end_of_test) or end_of_test <= 0.0:
                    raise ValidationError(
                        f"line {line_no}: end_of_test must be > 0, got {end_of_test}")
            else:
                if component_id is not None:
                    raise ValidationError(f"line {line_no}: duplicate component_id header")
                component_id = _check_component_id(value, f"line {line_no}: component_id")
            continue
        if end_of_test is None:
            raise ValidationError(
                "line 1: missing '# end_of_test=<value>' header before data")
        saw_data = True
        try:
            t = float(line)
        except ValueError as exc:
            raise ValidationError(
                f"line {line_no}: not a number ({line!r})") from exc
        if not math.isfinite(t) or t <= 0.0:
            raise ValidationError(f"line {line_no}: failure time must be > 0, got {t}")
        if times and t <= times[-1]:
            raise ValidationError(
                f"line {line_no}: failure time {t} does not increase past {times[-1]}")
        if t > end_of_test:
            raise ValidationError(
                f"line {line_no}: failure time {t} exceeds end_of_test {end_of_test}")
        times.append(t)
    if end_of_test is None:
        raise ValidationError("line 1: missing '# end_of_test=<value>' header")
    return FailureDataset(tuple(times), end_of_test, component_id)


def dump_dataset(dataset: FailureDataset) -> str:
    """Canonical dataset text; load(dump(d)) == d and bytes round-trip."""
    lines = [f"# end_of_test={dataset.end_of_test!r}"]
    if dataset.component_id is not None:
        lines.append(f"# component_id={dataset.component_id}")
    lines.extend(repr(t) for t in dataset.times)
    return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class SystemConfig:
    """Declarative system description prior to composition.

    components maps ids to fitted GoelOkumoto models or FailureDatasets
    (fitted at build time). baseline, if present, is a single NHPP fitted
    to the pooled system failure data.
    """

    components: Mapping[str, Union[GoelOkumoto, FailureDataset]]
    paths: tuple[PathSpec, ...]
    system_last_failure: float
    baseline: GoelOkumoto | None = None

    def __post_init__(self):
        if not isinstance(self.components, Mapping) or not self.components:
            raise ValidationError("components: must be a non-empty mapping")
        for cid, entry in self.components.items():
            _check_component_id(cid, f"components key {cid!r}")
            if isinstance(entry, GoelOkumoto):
                entry._check_fitted()
            elif not isinstance(entry, FailureDataset):
                raise ValidationError(
                    f"components[{cid}]: expected a fitted model or a dataset, "
                    f"got {type(entry).__name__}")
        paths = tuple(self.paths)
        if not paths:
            raise ValidationError("paths: must not be empty")
        object.__setattr__(self, "paths", paths)
        last = check_positive_scalar(self.system_last_failure, "system_last_failure")
        object.__setattr__(self, "system_last_failure", last)
        total = 0.0
        for i, spec in enumerate(paths):
            if not isinstance(spec, PathSpec):
                raise ValidationError(f"paths[{i}]: expected PathSpec")
            total += spec.probability
            if spec.last_failure_time > last:
                raise ValidationError(
                    f"paths[{i}]: last_failure_time {spec.last_failure_time} "
                    f"exceeds system_last_failure {last}")
            for cid in spec.components:
                if cid not in self.components:
                    raise ValidationError(f"paths[{i}]: unknown component id {cid!r}")
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(
                f"path probabilities sum to {total!r}, must equal 1 within 1e-12")
        if self.baseline is not None:
            if not isinstance(self.baseline, GoelOkumoto):
                raise ValidationError("baseline: expected a fitted model")
            self.baseline._check_fitted()


def _require_number(obj, field: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise ValidationError(f"{field}: expected a number, got {obj!r}")
    return float(obj)


def _model_from_obj(obj, field: str, component_id: str | None = None) -> GoelOkumoto:
    if not isinstance(obj, dict):
        raise ValidationError(f"{field}: expected a parameter object")
    try:
        model = GoelOkumoto.from_dict(obj)
    except ValidationError as exc:
        raise ValidationError(f"{field}: {exc}") from None
    if model.component_id_ is None and component_id is not None:
        model.component_id_ = component_id
    return model


def load_model(source: Union[str, Path, io.IOBase]) -> GoelOkumoto:
    """Load a fitted model from a {v0, b, end_of_test[, component_id]} JSON file."""
    text = _read_text(source)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"model JSON: {exc}") from exc
    return _model_from_obj(obj, "model JSON")


def dump_model(model: GoelOkumoto) -> str:
    """Canonical model JSON with exactly the fit-result keys."""
    return canonical_json(model.to_dict())


def load_system_config(source: Union[str, Path, io.IOBase],
                       base_dir: Union[str, Path, None] = None) -> SystemConfig:
    """Parse and validate a system configuration file.

    Dataset paths are resolved relative to the config file (or base_dir for
    file-like sources).
    """
    if base_dir is None and not hasattr(source, "read"):
        base_dir = Path(source).parent
    text = _read_text(source)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config: invalid JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise ValidationError("config: top level must be an object")
    allowed = {"components", "paths", "system_last_failure", "baseline"}
    unknown = set(obj) - allowed
    if unknown:
        raise ValidationError(f"config: unknown keys {sorted(unknown)}")
    for key in ("components", "paths", "system_last_failure"):
        if key not in obj:
            raise ValidationError(f"config: missing key {key!r}")

    raw_components = obj["components"]
    if not isinstance(raw_components, dict) or not raw_components:
        raise ValidationError("components: must be a non-empty object")
    components: dict[str, Union[GoelOkumoto, FailureDataset]] = {}
    for cid, entry in raw_components.items():
        field = f"components[{cid}]"
        if isinstance(entry, str):
            path = Path(entry)
            if not path.is_absolute() and base_dir is not None:
                path = Path(base_dir) / path
            try:
                dataset = load_dataset(path)
            except (ValidationError, OSError) as exc:
                raise ValidationError(f"{field}: {exc}") from None
            components[cid] = dataset
        else:
            components[cid] = _model_from_obj(entry, field, component_id=cid)

    raw_paths = obj["paths"]
    if not isinstance(raw_paths, list) or not raw_paths:
        raise ValidationError("paths: must be a non-empty array")
    specs = []
    for i, entry in enumerate(raw_paths):
        field = f"paths[{i}]"
        if not isinstance(entry, dict):
            raise ValidationError(f"{field}: expected an object")
        required = {"components", "probability", "last_failure_time"}
        if set(entry) != required:
            raise ValidationError(
                f"{field}: must have exactly the keys {sorted(required)}, "
                f"got {sorted(entry)}")
        comps = entry["components"]
        if (not isinstance(comps, list) or not comps
                or not all(isinstance(c, str) for c in comps)):
            raise ValidationError(f"{field}.components: must be a non-empty "
                                  "array of component ids")
        try:
            specs.append(PathSpec(
                tuple(comps),
                _require_number(entry["probability"], f"{field}.probability"),
                _require_number(entry["last_failure_time"],
                                f"{field}.last_failure_time")))
        except ValidationError as exc:
            raise ValidationError(f"{field}: {exc}") from None

    system_last_failure = _require_number(obj["system_last_failure"],
                                          "system_last_failure")
    baseline = None
    if obj.get("baseline") is not None:
        baseline = _model_from_obj(obj["baseline"], "baseline")
    return SystemConfig(components, tuple(specs), system_last_failure, baseline)


def _model_to_inline_obj(model: GoelOkumoto) -> dict:
    return {"v0": model.v0_, "b": model.b_, "end_of_test": model.end_of_test_}


def dump_system_config(config: SystemConfig) -> str:
    """Canonical config JSON. All components must be fitted models."""
    components = {}
    for cid in sorted(config.components):
        entry = config.components[cid]
        if not isinstance(entry, GoelOkumoto):
            raise ValidationError(
                f"components[{cid}]: cannot serialize an unfitted dataset "
                "component; fit it first")
        components[cid] = _model_to_inline_obj(entry)
    obj = {
        "components": components,
        "paths": [
            {
                "components": list(spec.components),
                "probability": spec.probability,
                "last_failure_time": spec.last_failure_time,
            }
            for spec in config.paths
        ],
        "system_last_failure": config.system_last_failure,
    }
    if config.baseline is not None:
        obj["baseline"] = _model_to_inline_obj(config.baseline)
    return canonical_json(obj)


def system_model_to_config(system: SystemModel,
                           baseline: GoelOkumoto | None = None) -> SystemConfig:
    """Project a composed SystemModel back to its serializable configuration."""
    return SystemConfig(
        dict(system.components),
        tuple(spec for spec, _model in system.paths),
        system.system_last_failure,
        baseline,
    )


def path_model_to_obj(model: PathModel) -> dict:
    """Debug serialization of a composed path model (deterministic)."""
    if not isinstance(model, PathModel):
        raise ValidationError(f"model: expected PathModel, got {type(model).__name__}")
    return {
        "v0": model.v0,
        "k": model.ma.k,
        "numerator": model.ma.numerator.to_json_obj(),
        "denominator": model.ma.denominator.to_json_obj(),
    }
