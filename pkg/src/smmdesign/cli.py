"""Command-line front end: ``smmdesign {design,estimate,mc,snr,baseline}``.

Every command reads a JSON configuration (see README for the schema) and
writes CSV tables plus a JSON sidecar or manifest holding the resolved
configuration. Exit codes: 0 success, 2 usage or configuration error,
3 numerical or solver failure.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import harness
from .design import SolverOptions
from .estimator import estimate_fir
from .exceptions import DesignFailed, SingularDesign
from .metrics import fit_w, optimality_criteria

log = logging.getLogger("smmdesign")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
WORKERS_ENV = "SMMDESIGN_WORKERS"


class ConfigError(ValueError):
    pass


_INT_KEYS = {"runs", "seed", "N", "L0", "Lf", "baseline_length", "workers"}
_FLOAT_KEYS = {"sigma2", "sigma2_assumed", "E0", "u_low", "u_high", "gain", "baseline_sigma2"}
_STR_KEYS = {"constraint", "strategy", "baseline"}
_BOOL_KEYS = {"redraw_standard_input"}
_LIST_KEYS = {"numerator", "denominator"}
_EXTRA_KEYS = {"sigma2_list", "baseline_sources"}
_NULLABLE = {"sigma2_assumed", "u_low", "u_high", "baseline_length", "numerator", "denominator"}
DEFAULT_SIGMA2_LIST = (0.1, 0.01, 0.001)
DEFAULT_BASELINE_SOURCES = ("true", "prior_smm")


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and np.isfinite(v)


def _check(key, value, ok, what):
    if not ok:
        raise ConfigError(f"config key {key!r}: expected {what}, got {value!r}")


def parse_config(data: dict):
    """Validate a decoded JSON config; returns (McConfig, sigma2_list, baseline_sources)."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    known = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS | _BOOL_KEYS | _LIST_KEYS | _EXTRA_KEYS | {"solver"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    kwargs = {}
    for key, value in data.items():
        if key in _EXTRA_KEYS or key == "solver":
            continue
        if value is None and key in _NULLABLE:
            kwargs[key] = None
        elif key in _INT_KEYS:
            _check(key, value, _is_int(value), "an integer")
            kwargs[key] = value
        elif key in _FLOAT_KEYS:
            _check(key, value, _is_number(value), "a number")
            kwargs[key] = float(value)
        elif key in _STR_KEYS:
            _check(key, value, isinstance(value, str), "a string")
            kwargs[key] = value
        elif key in _BOOL_KEYS:
            _check(key, value, isinstance(value, bool), "true or false")
            kwargs[key] = value
        elif key in _LIST_KEYS:
            _check(key, value, isinstance(value, list) and value and all(_is_number(v) for v in value),
                   "a non-empty list of numbers")
            kwargs[key] = tuple(float(v) for v in value)

    solver = data.get("solver", {})
    _check("solver", solver, isinstance(solver, dict), "an object")
    fields = {f.name: f for f in dataclasses.fields(SolverOptions)}
    bad = sorted(set(solver) - set(fields))
    if bad:
        raise ConfigError(f"unknown solver keys: {', '.join(bad)}")
    for key, value in solver.items():
        default = fields[key].default
        if isinstance(default, str):
            _check(f"solver.{key}", value, isinstance(value, str), "a string")
        elif isinstance(default, int):
            _check(f"solver.{key}", value, _is_int(value), "an integer")
        else:
            _check(f"solver.{key}", value, _is_number(value), "a number")
    try:
        kwargs["solver"] = SolverOptions(**solver)
        config = harness.McConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    sigma2_list = data.get("sigma2_list", list(DEFAULT_SIGMA2_LIST))
    _check("sigma2_list", sigma2_list, isinstance(sigma2_list, list) and sigma2_list
           and all(_is_number(v) and v > 0 for v in sigma2_list), "a non-empty list of positive numbers")
    sources = data.get("baseline_sources", list(DEFAULT_BASELINE_SOURCES))
    _check("baseline_sources", sources, isinstance(sources, list) and sources
           and all(isinstance(v, str) for v in sources), "a non-empty list of strings")
    return config, [float(v) for v in sigma2_list], list(sources)


def load_config(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    config, sigma2_list, sources = parse_config(data)
    for source in sorted({config.baseline, *sources} - {"true", "prior_smm"}):
        h = read_series(source)
        if h.size > config.N - config.Lf + 1:
            raise ConfigError(f"{source}: {h.size} baseline coefficients exceed N - Lf + 1")
    cap = os.environ.get(WORKERS_ENV)
    if cap:
        try:
            config = config.replace(workers=max(1, min(config.workers, int(cap))))
        except ValueError as exc:
            raise ConfigError(f"{WORKERS_ENV} must be an integer") from exc
    return config, sigma2_list, sources


def resolved(config, **extra) -> dict:
    d = dataclasses.asdict(config)
    for key in ("numerator", "denominator"):
        if d[key] is not None:
            d[key] = list(d[key])
    d.update(extra)
    return d


def fmt(x) -> str:
    """Float with 17 significant digits (round-trips a double)."""
    return f"{float(x):.17g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, obj):
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def write_series(path, values):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "value"])
        for i, v in enumerate(values):
            w.writerow([i, fmt(v)])


def read_series(path) -> np.ndarray:
    try:
        return harness.read_fir_csv(path)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"malformed series CSV {path}: {exc}") from exc


def _sidecar(path) -> Path:
    return Path(path).with_suffix(".json")


def _design_report(design) -> dict:
    return {
        "objective": design.objective,
        "start_objectives": design.start_objectives,
        "start_iterations": design.start_iterations,
        "start_status": design.start_status,
        "best_start": design.best_start,
        "iterations": design.iterations,
        "active_constraints": design.active,
        "baseline": design.baseline,
    }


def cmd_design(args):
    config, _, _ = load_config(args.config)
    if args.constraint:
        config = config.replace(constraint=args.constraint)
    baseline = harness.baseline_model(config)
    design = harness.design_input(config, baseline)
    write_series(args.out, design.u)
    report = _design_report(design)
    report.update(config=resolved(config), baseline_source=baseline.source, baseline_fit=baseline.fit)
    write_json(_sidecar(args.out), report)
    return EXIT_OK


def cmd_estimate(args):
    config, _, _ = load_config(args.config)
    u, y = read_series(args.input), read_series(args.output)
    if u.size != y.size:
        raise ConfigError(f"input and output lengths differ ({u.size} != {y.size})")
    if u.size < config.L0 + config.Lf:
        raise ConfigError(f"data length {u.size} shorter than L0 + Lf = {config.L0 + config.Lf}")
    sigma2 = config.assumed_sigma2
    est = estimate_fir(u, y, config.L0, config.Lf, sigma2)
    write_series(args.out, est.h)
    crit = optimality_criteria(config.L0 + config.Lf, sigma2, est.g_norm_sq)
    report = {
        "g_norm_sq": est.g_norm_sq,
        "criteria": dataclasses.asdict(crit),
        "config": resolved(config),
        "data_length": int(u.size),
    }
    if args.truth:
        h_true = read_series(args.truth)
        if h_true.size < config.Lf:
            raise ConfigError(f"truth FIR needs at least Lf = {config.Lf} coefficients")
        report["fit_w"] = fit_w(h_true[: config.Lf], est.h)
    write_json(_sidecar(args.out), report)
    return EXIT_OK


_PER_RUN = ["run_id", "seed", "strategy", "fit_w", "g_norm_sq"]


def _write_tables(out, blocks, keys):
    """``blocks`` is a list of (key values, McSummary); ``keys`` names the leading columns."""
    with open(out / "per_run.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(keys + _PER_RUN)
        for key, summary in blocks:
            for r in summary.records:
                w.writerow(key + [r.run, r.seed, summary.strategy, fmt(r.fit_w), fmt(r.g_norm_sq)])
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(keys + ["strategy", "metric", "stat", "value"])
        for key, summary in blocks:
            for metric, stats in summary.stats.items():
                for stat, value in stats.items():
                    w.writerow(key + [summary.strategy, metric, stat, fmt(value)])
            w.writerow(key + [summary.strategy, "runs", "excluded", len(summary.excluded)])


def _comparison_manifest(comp) -> dict:
    return {
        "baseline_source": comp.baseline.source,
        "baseline_fit": comp.baseline.fit,
        "baseline_fir": comp.baseline.h,
        "design": _design_report(comp.design),
        "designed_input": comp.design.u,
        "excluded_runs": {k: s.excluded for k, s in comp.summaries.items()},
    }


def _prepare_out(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_mc(args):
    config, _, _ = load_config(args.config)
    if args.constraint:
        config = config.replace(constraint=args.constraint)
    out = _prepare_out(args.out)
    comp = harness.compare(config)
    _write_tables(out, [([], s) for s in comp.summaries.values()], [])
    write_json(out / "manifest.json", {"command": "mc", "config": resolved(config),
                                       "result": _comparison_manifest(comp)})
    return EXIT_OK


def cmd_snr(args):
    config, sigma2_list, _ = load_config(args.config)
    if args.constraint:
        config = config.replace(constraint=args.constraint)
    out = _prepare_out(args.out)
    sweep = harness.snr_sweep(config, sigma2_list)
    blocks = [([fmt(s2)], s) for s2, comp in sweep.items() for s in comp.summaries.values()]
    _write_tables(out, blocks, ["sigma2"])
    write_json(out / "manifest.json", {
        "command": "snr",
        "config": resolved(config, sigma2_list=sigma2_list),
        "result": {fmt(s2): _comparison_manifest(c) for s2, c in sweep.items()},
    })
    return EXIT_OK


def cmd_baseline(args):
    config, _, sources = load_config(args.config)
    if args.constraint:
        config = config.replace(constraint=args.constraint)
    out = _prepare_out(args.out)
    results = harness.baseline_robustness(config, sources)
    blocks = [([str(i), c.baseline.source], c.summaries["exp_design"]) for i, c in enumerate(results)]
    _write_tables(out, blocks, ["source_id", "baseline"])
    write_json(out / "manifest.json", {
        "command": "baseline",
        "config": resolved(config, baseline_sources=sources),
        "result": [_comparison_manifest(c) for c in results],
    })
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="smmdesign", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design", help="optimize an excitation input")
    d.add_argument("config")
    d.add_argument("--constraint", choices=["energy", "magnitude"])
    d.add_argument("--out", required=True, help="CSV path; a .json sidecar is written next to it")
    d.set_defaults(func=cmd_design)

    e = sub.add_parser("estimate", help="SMM impulse response estimate from data")
    e.add_argument("config")
    e.add_argument("--input", required=True, help="input data CSV (index,value)")
    e.add_argument("--output", required=True, help="output data CSV (index,value)")
    e.add_argument("--truth", help="true FIR CSV; enables the fit report")
    e.add_argument("--out", required=True, help="FIR CSV path; a .json sidecar is written next to it")
    e.set_defaults(func=cmd_estimate)

    for name, func, text in [("mc", cmd_mc, "Monte Carlo comparison with a standard input"),
                             ("snr", cmd_snr, "comparison over a list of noise variances"),
                             ("baseline", cmd_baseline, "sensitivity to the baseline model")]:
        s = sub.add_parser(name, help=text)
        s.add_argument("config")
        s.add_argument("--constraint", choices=["energy", "magnitude"])
        s.add_argument("--out", required=True, help="output directory")
        s.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"smmdesign: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularDesign, DesignFailed, np.linalg.LinAlgError) as exc:
        print(f"smmdesign: numerical failure: {exc}", file=sys.stderr)
        out = getattr(args, "out", None)
        if args.command in ("mc", "snr", "baseline") and out:
            diag = {"error": type(exc).__name__, "message": str(exc),
                    "diagnostics": getattr(exc, "diagnostics", None)}
            _prepare_out(out)
            write_json(Path(out) / "diagnostics.json", diag)
        return EXIT_NUMERIC
    except (OSError, ValueError) as exc:
        # invalid data or baseline file discovered after parsing
        print(f"smmdesign: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
