"""Command-line interface.

Subcommands:

    fit       fit component models from dataset files, emit parameter JSON
    simulate  draw a synthetic dataset from known parameters
    predict   tabulate system and per-path conditional reliability curves
    compare   contrast the composed system against a single pooled NHPP
    evolve    swap one component model and re-emit the system config

Output is byte-deterministic for fixed inputs. The RELICOMP_PRECISION
environment variable (significant digits, 1-17) controls table formatting;
by default values are written in shortest round-trip form. Exit codes:
0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import functools
import json
import os
from dataclasses import dataclass
from pathlib import Path

import click
import numpy as np

from .datasets import (
    canonical_json,
    dump_dataset,
    dump_system_config,
    load_dataset,
    load_model,
    load_system_config,
    system_model_to_config,
)
from .errors import FitError, NumericalError, ValidationError
from .gofit import GoelOkumoto
from .simgen import SimSpec, generate
from .sysmodel import (
    SystemModel,
    additive_mu,
    build_system,
    conditional_reliability,
    replace_component,
    sampled_system,
)
from .validation import check_nonnegative_scalar, check_positive_scalar

__all__ = ["main", "CurveTable"]


def _float_formatter():
    raw = os.environ.get("RELICOMP_PRECISION")
    if raw is None:
        return repr
    try:
        digits = int(raw)
    except ValueError:
        raise ValidationError(f"RELICOMP_PRECISION: not an integer ({raw!r})")
    if not 1 <= digits <= 17:
        raise ValidationError(
            f"RELICOMP_PRECISION: must be between 1 and 17, got {digits}")
    return lambda x: f"{x:.{digits}g}"


@dataclass(frozen=True)
class CurveTable:
    """Named columns of equal length, writable as CSV or JSON."""

    names: tuple[str, ...]
    columns: tuple[np.ndarray, ...]

    def to_csv(self, fmt) -> str:
        lines = [",".join(self.names)]
        for row in zip(*self.columns):
            lines.append(",".join(fmt(float(v)) for v in row))
        return "\n".join(lines) + "\n"

    def to_json_obj(self) -> dict:
        return {name: [float(v) for v in col]
                for name, col in zip(self.names, self.columns)}


def _emit(text: str, out: str | None):
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _run(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ValidationError as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(2)
        except (FitError, NumericalError) as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(3)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(2)

    return wrapper


@click.group()
@click.version_option(package_name="relicomp", prog_name="relicomp")
def main():
    """Reliability-growth model fitting and system composition."""


@main.command("fit")
@click.argument("datasets", nargs=-1, required=True)
@click.option("--out", type=click.Path(), default=None,
              help="write the result here instead of stdout")
@_run
def cmd_fit(datasets, out):
    """Fit a failure model to each DATASET file.

    One dataset produces a single JSON object with the keys component_id,
    v0, b and end_of_test; several produce one JSON object per line.
    """
    results = []
    for path in datasets:
        ds = load_dataset(path)
        model = GoelOkumoto().fit(ds.times, ds.end_of_test,
                                  component_id=ds.component_id)
        results.append(model.to_dict())
    if len(results) == 1:
        text = canonical_json(results[0])
    else:
        text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in results)
    _emit(text, out)


@main.command("simulate")
@click.option("--v0", type=float, default=None, help="expected total failures")
@click.option("--b", type=float, default=None, help="exposure rate")
@click.option("--end-of-test", type=float, default=None, help="observation window")
@click.option("--seed", type=int, default=None, help="RNG seed (PCG64)")
@click.option("--component-id", default=None)
@click.option("--spec", "spec_path", type=click.Path(), default=None,
              help="JSON file with v0, b, end_of_test, seed[, component_id]")
@click.option("--out", type=click.Path(), default=None)
@_run
def cmd_simulate(v0, b, end_of_test, seed, component_id, spec_path, out):
    """Draw a synthetic failure dataset from known parameters."""
    scalars = (v0, b, end_of_test, seed)
    if spec_path is not None:
        if any(v is not None for v in scalars) or component_id is not None:
            raise ValidationError(
                "--spec is exclusive with --v0/--b/--end-of-test/--seed/--component-id")
        spec = SimSpec.from_json(Path(spec_path).read_text(encoding="utf-8"))
    else:
        if any(v is None for v in scalars):
            raise ValidationError(
                "simulate needs --v0, --b, --end-of-test and --seed (or --spec)")
        spec = SimSpec(v0, b, end_of_test, seed, component_id)
    _emit(dump_dataset(generate(spec)), out)


def _grid(tau_max: float, points: int) -> np.ndarray:
    if points < 1:
        raise ValidationError(f"--grid: must be >= 1, got {points}")
    if tau_max == 0.0:
        return np.array([0.0])
    return np.linspace(0.0, tau_max, points)


@main.command("predict")
@click.argument("config", type=click.Path())
@click.option("--grid", default=512, show_default=True,
              help="number of horizon points")
@click.option("--tau-max", type=float, default=None,
              help="largest horizon [default: longest component test window]")
@click.option("--format", "fmt_name", type=click.Choice(["csv", "json"]),
              default="csv", show_default=True)
@click.option("--out", type=click.Path(), default=None)
@_run
def cmd_predict(config, grid, tau_max, fmt_name, out):
    """Tabulate conditional system reliability from CONFIG."""
    system = build_system(load_system_config(config))
    if tau_max is None:
        tau_max = max(m.end_of_test_ for m in system.components.values())
    else:
        tau_max = check_nonnegative_scalar(tau_max, "--tau-max")
    taus = _grid(tau_max, grid)
    names = ["tau_prime", "system"]
    cols = [taus, np.asarray(system.reliability(taus), dtype=float)]
    for i in range(len(system.paths)):
        names.append(f"path_{i + 1}")
        cols.append(np.asarray(system.path_reliability(i, taus), dtype=float))
    table = CurveTable(tuple(names), tuple(cols))
    if fmt_name == "json":
        text = canonical_json(table.to_json_obj())
    else:
        text = table.to_csv(_float_formatter())
    _emit(text, out)


def _additive_path_mus(system: SystemModel):
    mus = []
    for spec, _model in system.paths:
        models = [system.components[c] for c in spec.unique_components]
        mus.append(additive_mu(models))
    return mus


def _mixed_mu(system: SystemModel, path_mus, taus: np.ndarray) -> np.ndarray:
    out = np.zeros(taus.shape)
    for (spec, _model), mu in zip(system.paths, path_mus):
        out += spec.probability * np.asarray(mu(taus), dtype=float)
    return out


def _mixed_conditional(system: SystemModel, path_mus, tau_next: np.ndarray) -> np.ndarray:
    out = np.zeros(tau_next.shape)
    for (spec, _model), mu in zip(system.paths, path_mus):
        gap = system.system_last_failure - spec.last_failure_time
        out += spec.probability * np.asarray(
            conditional_reliability(mu, spec.last_failure_time, tau_next + gap),
            dtype=float)
    return out


def _max_gap(fmt, label: str, x: np.ndarray, a: np.ndarray, b: np.ndarray,
             axis: str) -> str:
    gap = np.abs(a - b)
    i = int(np.argmax(gap))
    return f"max |{label}| = {fmt(float(gap[i]))} at {axis} = {fmt(float(x[i]))}"


@main.command("compare")
@click.argument("config", type=click.Path())
@click.option("--baseline-v0", type=float, default=None,
              help="pooled-model v0 (with --baseline-b)")
@click.option("--baseline-b", type=float, default=None,
              help="pooled-model b (with --baseline-v0)")
@click.option("--baseline-end-of-test", type=float, default=None,
              help="pooled-model window [default: longest component window]")
@click.option("--grid", default=512, show_default=True)
@click.option("--tau-max", type=float, default=None,
              help="expected-failures table upper bound [default: longest test window]")
@click.option("--horizon", type=float, default=30000.0, show_default=True,
              help="reliability table upper bound")
@click.option("--sampled-step", type=float, default=None,
              help="also compose on bounded supports sampled at this step")
@click.option("--out-mu", type=click.Path(), default=None,
              help="write the expected-failures table (CSV) here")
@click.option("--out-reliability", type=click.Path(), default=None,
              help="write the reliability table (CSV) here")
@_run
def cmd_compare(config, baseline_v0, baseline_b, baseline_end_of_test, grid,
                tau_max, horizon, sampled_step, out_mu, out_reliability):
    """Compare the composed system in CONFIG against a single pooled NHPP.

    The baseline comes from --baseline-v0/--baseline-b or from the config's
    "baseline" entry. Prints the largest deviations between the composed,
    pooled, and per-component-additive curves; optionally writes both
    tables as CSV.
    """
    cfg = load_system_config(config)
    system = build_system(cfg)
    longest = max(m.end_of_test_ for m in system.components.values())
    if baseline_v0 is not None or baseline_b is not None:
        if baseline_v0 is None or baseline_b is None:
            raise ValidationError("--baseline-v0 and --baseline-b go together")
        baseline = GoelOkumoto.from_params(
            baseline_v0, baseline_b,
            longest if baseline_end_of_test is None else baseline_end_of_test)
    elif cfg.baseline is not None:
        baseline = cfg.baseline
    else:
        raise ValidationError(
            "no baseline: pass --baseline-v0/--baseline-b or add a "
            '"baseline" entry to the config')
    tau_max = longest if tau_max is None else check_nonnegative_scalar(tau_max, "--tau-max")
    horizon = check_nonnegative_scalar(horizon, "--horizon")
    fmt = _float_formatter()
    path_mus = [model.mu for _spec, model in system.paths]
    add_mus = _additive_path_mus(system)
    sampled = None
    if sampled_step is not None:
        sampled = sampled_system(system, check_positive_scalar(
            sampled_step, "--sampled-step"))

    taus = _grid(tau_max, grid)
    mu_names = ["tau", "mu_ma", "mu_nhpp", "mu_additive"]
    mu_cols = [
        taus,
        _mixed_mu(system, path_mus, taus),
        np.asarray(baseline.mean_value(taus), dtype=float),
        _mixed_mu(system, add_mus, taus),
    ]
    if sampled is not None:
        mu_names.append("mu_sampled")
        mu_cols.append(_mixed_mu(sampled, [m.mu for _s, m in sampled.paths], taus))
    mu_table = CurveTable(tuple(mu_names), tuple(mu_cols))

    tps = _grid(horizon, grid)
    r_names = ["tau_prime", "r_ma", "r_nhpp", "r_additive"]
    r_cols = [
        tps,
        np.asarray(system.reliability(tps), dtype=float),
        np.asarray(conditional_reliability(
            baseline.mean_value, system.system_last_failure, tps), dtype=float),
        _mixed_conditional(system, add_mus, tps),
    ]
    if sampled is not None:
        r_names.append("r_sampled")
        r_cols.append(np.asarray(sampled.reliability(tps), dtype=float))
    r_table = CurveTable(tuple(r_names), tuple(r_cols))

    if out_mu is not None:
        Path(out_mu).write_text(mu_table.to_csv(fmt), encoding="utf-8")
    if out_reliability is not None:
        Path(out_reliability).write_text(r_table.to_csv(fmt), encoding="utf-8")

    click.echo(_max_gap(fmt, "mu_ma - mu_nhpp", taus, mu_cols[1], mu_cols[2], "tau"))
    click.echo(_max_gap(fmt, "mu_additive - mu_nhpp", taus, mu_cols[3], mu_cols[2], "tau"))
    click.echo(_max_gap(fmt, "r_ma - r_nhpp", tps, r_cols[1], r_cols[2], "tau_prime"))
    click.echo(_max_gap(fmt, "r_additive - r_nhpp", tps, r_cols[3], r_cols[2], "tau_prime"))
    if sampled is not None:
        click.echo(_max_gap(fmt, "mu_sampled - mu_ma", taus, mu_cols[4], mu_cols[1], "tau"))
        click.echo(_max_gap(fmt, "r_sampled - r_ma", tps, r_cols[4], r_cols[1], "tau_prime"))


@main.command("evolve")
@click.argument("system_json", type=click.Path())
@click.argument("component_id")
@click.argument("new_model_json", type=click.Path())
@click.option("--out", type=click.Path(), default=None,
              help="write the updated config here instead of stdout")
@_run
def cmd_evolve(system_json, component_id, new_model_json, out):
    """Swap COMPONENT_ID's model for NEW_MODEL_JSON within SYSTEM_JSON.

    Only paths using the component are recomputed; the rest are reused.
    Emits the updated system configuration.
    """
    cfg = load_system_config(system_json)
    system = build_system(cfg)
    new_model = load_model(new_model_json)
    if new_model.component_id_ is None:
        new_model.component_id_ = component_id
    new_system, recomputed, reused = replace_component(system, component_id, new_model)
    text = dump_system_config(system_model_to_config(new_system, baseline=cfg.baseline))
    report = f"{recomputed} recomputed, {reused} reused"
    if out is None:
        click.echo(text, nl=False)
        click.echo(report, err=True)
    else:
        Path(out).write_text(text, encoding="utf-8")
        click.echo(report)


if __name__ == "__main__":
    main()
