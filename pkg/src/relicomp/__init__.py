"""Reliability-growth modeling for component-based systems.

Fits exponential-decay NHPP models to per-component failure data, composes
them into path and system reliability through a convolution moving
average, and supports incremental re-evaluation when a component is
replaced.
"""

from .datasets import (
    FailureDataset,
    SystemConfig,
    canonical_json,
    dump_dataset,
    dump_model,
    dump_system_config,
    load_dataset,
    load_model,
    load_system_config,
    path_model_to_obj,
    system_model_to_config,
)
from .errors import (
    DuplicateComponentWarning,
    FitError,
    NearHomogeneousError,
    NearHomogeneousWarning,
    NumericalError,
    RelicompError,
    UnfittableDataError,
    ValidationError,
)
from .expconv import ExpPoly, Term, convolve, numeric_convolve, unit_power
from .gofit import GoelOkumoto
from .ma import MAFunction, ma_continuous, ma_discrete, ma_sampled
from .simgen import SimSpec, generate
from .sysmodel import (
    PathModel,
    PathSpec,
    SampledPathModel,
    SystemModel,
    additive_mu,
    build_path_model,
    build_sampled_path_model,
    build_system,
    conditional_reliability,
    replace_component,
    sampled_system,
)

__version__ = "0.1.0"

__all__ = [
    "DuplicateComponentWarning",
    "ExpPoly",
    "FailureDataset",
    "FitError",
    "GoelOkumoto",
    "MAFunction",
    "NearHomogeneousError",
    "NearHomogeneousWarning",
    "NumericalError",
    "PathModel",
    "PathSpec",
    "RelicompError",
    "SampledPathModel",
    "SimSpec",
    "SystemConfig",
    "SystemModel",
    "Term",
    "UnfittableDataError",
    "ValidationError",
    "additive_mu",
    "build_path_model",
    "build_sampled_path_model",
    "build_system",
    "canonical_json",
    "conditional_reliability",
    "convolve",
    "dump_dataset",
    "dump_model",
    "dump_system_config",
    "generate",
    "load_dataset",
    "load_model",
    "load_system_config",
    "ma_continuous",
    "ma_discrete",
    "ma_sampled",
    "numeric_convolve",
    "path_model_to_obj",
    "replace_component",
    "sampled_system",
    "system_model_to_config",
    "unit_power",
    "__version__",
]
