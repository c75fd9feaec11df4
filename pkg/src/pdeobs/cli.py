"""Command-line front end for the heat, wave and Burgers experiments.

Writes a CSV with one row per resolution, a JSON manifest holding the fully
resolved configuration, package versions, timings, warnings and errors, and
a short summary on stdout. Exit status: 0 success, 1 invalid configuration,
2 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import platform
import sys
import time
from functools import partial
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .burgers import BurgersModel, burgers_problem
from .consistency import convergence_diagnostics, sweep
from .errors import InvalidInputError, ObservabilityError
from .heat import HeatModel, sigma_min_series
from .wave import WaveModel, observability_ratio_sweep

log = logging.getLogger("pdeobs")

EXPERIMENTS = ("heat-gramian", "wave-ratio", "burgers-index")

DEFAULTS = {
    "heat-gramian": {"L": 2 * np.pi, "T": 10.0, "x0": 0.5, "n_list": None, "n_max": 8},
    "wave-ratio": {"L": 1.0, "T": 3.0, "n_list": [10, 20, 40, 80], "initial_mode": "highest"},
    "burgers-index": {
        "L": 2 * np.pi,
        "T": 5.0,
        "kappa": 0.14,
        "nt_sensors": 20,
        "sensor_x": None,
        "kf": 2,
        "n_list": list(range(20, 77, 4)),
        "method": "empirical",
        "rho": 0.1,
        "dt": None,
        "dt_scale": 1.0,
    },
}
COMMON = {"seed": 0, "threads": None, "out_csv": None, "out_manifest": None, "timings": False}


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _int_list(text):
    if isinstance(text, list):
        return [int(v) for v in text]
    try:
        return [int(v) for v in str(text).replace(" ", "").split(",") if v]
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of integers, got {text!r}")


def _float_list(text):
    if text is None or isinstance(text, list):
        return text
    try:
        return [float(v) for v in str(text).replace(" ", "").split(",") if v]
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}")


def _optional_float(text):
    if text is None or str(text).lower() in ("", "none", "null"):
        return None
    return float(text)


def _bool(text):
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _initial_mode(text):
    if text is None or str(text).lower() == "highest":
        return "highest"
    return int(text)


CONVERTERS = {
    "L": float, "T": float, "x0": float, "kappa": float, "rho": float,
    "dt": _optional_float, "dt_scale": float, "nt_sensors": int, "kf": int,
    "n_max": int, "n_list": _int_list, "sensor_x": _float_list, "method": str,
    "initial_mode": _initial_mode, "seed": int, "threads": int,
    "out_csv": str, "out_manifest": str, "timings": _bool,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pdeobs", description=__doc__.splitlines()[0])
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="key = value file, or a JSON run manifest")
    p.add_argument("--out-csv", dest="out_csv")
    p.add_argument("--out-manifest", dest="out_manifest")
    p.add_argument("--seed")
    p.add_argument("--threads")
    p.add_argument("--timings", action="store_const", const="true",
                   help="include wall-clock times in the CSV (breaks byte reproducibility)")
    p.add_argument("--n-list", "--n", dest="n_list", help="comma-separated resolutions")
    p.add_argument("--n-max", dest="n_max", help="heat: run n = 1..n_max")
    p.add_argument("--rho")
    p.add_argument("--kf")
    p.add_argument("--kappa")
    p.add_argument("--sensor-x", dest="sensor_x")
    p.add_argument("--method", choices=("gramian", "empirical", "direct"))
    p.add_argument("--initial-mode", dest="initial_mode")
    p.add_argument("--dt")
    p.add_argument("--dt-scale", dest="dt_scale")
    p.add_argument("--nt-sensors", dest="nt_sensors")
    p.add_argument("--L")
    p.add_argument("--T")
    p.add_argument("--x0")
    return p


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines (``#`` comments), or the ``config`` object of a JSON manifest."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        return dict(data.get("config", data))
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def resolve_config(argv=None) -> dict:
    args = vars(build_parser().parse_args(argv))
    experiment = args.pop("experiment")
    config_path = args.pop("config")
    allowed = {**COMMON, **DEFAULTS[experiment]}
    merged = dict(allowed)

    layers = []
    if config_path:
        try:
            layers.append(read_config_file(config_path))
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}")
    layers.append({k: v for k, v in args.items() if v is not None})
    for layer in layers:
        layer = dict(layer)
        if layer.pop("experiment", experiment) != experiment:
            raise ConfigError("config file is for a different experiment")
        for key, value in layer.items():
            if key not in allowed:
                raise ConfigError(f"unknown option {key!r} for {experiment}")
            try:
                merged[key] = CONVERTERS[key](value) if value is not None else None
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {exc}")

    if merged["threads"] is None:
        merged["threads"] = os.cpu_count() or 1
    if merged["threads"] < 1:
        raise ConfigError("threads must be at least 1")
    if experiment == "heat-gramian" and merged["n_list"] is None:
        merged["n_list"] = list(range(1, merged["n_max"] + 1))
    if experiment == "burgers-index" and merged["method"] not in ("gramian", "empirical", "direct"):
        raise ConfigError(f"unknown method {merged['method']!r}")
    ns = merged["n_list"]
    if not ns or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ConfigError("n_list must be a non-empty ascending list")
    return {"experiment": experiment, **merged}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def run_heat(cfg):
    template = HeatModel(L=cfg["L"], T=cfg["T"], x0=cfg["x0"], n=1)
    series = sigma_min_series(template, cfg["n_list"])
    header = ["n", "sigma_min", "index"]
    rows = [[r.n, r.sigma_min, r.index] for r in series.records]
    notes = [
        "sigma_min is the smallest eigenvalue of the analytic gramian with the"
        " unscaled L2(0,T) output norm; sigma_min(1) = sin(pi x0/L)^2 (1 - exp(-2 pi^2 T/L^2)) L^2/(2 pi^2)"
    ]
    summary = [f"n = {r.n:3d}  sigma_min = {r.sigma_min:.6e}" for r in series.records]
    return series, header, rows, notes, summary, {}


def run_wave(cfg):
    mode = cfg["initial_mode"]
    template = WaveModel(L=cfg["L"], T=cfg["T"], n=max(cfg["n_list"]), initial_mode=1)
    series = observability_ratio_sweep(template, cfg["n_list"],
                                       None if mode == "highest" else mode)
    header = ["n", "initial_mode", "energy", "boundary_energy", "ratio"]
    rows = [[r.n, r.extra["initial_mode"], r.extra["energy"], r.extra["boundary_energy"],
             r.extra["ratio"]] for r in series.records]
    summary = [f"n = {r.n:4d}  E_h(0)/boundary = {r.extra['ratio']:.6g}" for r in series.records]
    return series, header, rows, [], summary, {}


def run_burgers(cfg):
    params = {k: cfg[k] for k in ("L", "T", "kappa", "nt_sensors", "kf", "dt", "dt_scale")}
    if cfg["sensor_x"] is not None:
        params["sensor_x"] = tuple(cfg["sensor_x"])
    for n in cfg["n_list"]:
        BurgersModel(n=n, **params)  # reject invalid resolutions before any work
    factory = partial(burgers_problem, **params)
    series = sweep(factory, cfg["n_list"], cfg["method"], cfg["rho"], cfg["seed"],
                   workers=cfg["threads"], metadata={"model": "burgers", **params})
    header = ["n", "sigma_min", "epsilon", "index"]
    rows = [[r.n, r.sigma_min, r.epsilon, r.index] for r in series.records]
    extra = {}
    notes = [f"n = {r.n}: {r.error}" for r in series.records if not r.ok]
    summary = [
        f"n = {r.n:3d}  rho/eps = {r.index:.6f}" if r.ok else f"n = {r.n:3d}  FAILED {r.error}"
        for r in series.records
    ]
    try:
        report = convergence_diagnostics(series)
    except InvalidInputError:
        report = None
    if report is not None:
        extra["convergence"] = {
            "plateau": report.plateau,
            "last_change": report.last_change,
            "converged": report.converged,
            "changes": [{"n": n, "value": v, "rel_change": c} for n, v, c in report.changes],
        }
        summary += report.lines()[-1:]
    return series, header, rows, notes, summary, extra


RUNNERS = {"heat-gramian": run_heat, "wave-ratio": run_wave, "burgers-index": run_burgers}


def _versions():
    return {
        "pdeobs": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def run(cfg: dict) -> int:
    """Execute a resolved configuration; returns the exit status."""
    manifest = {
        "experiment": cfg["experiment"],
        "status": "ok",
        "exit_code": 0,
        "config": cfg,
        "versions": _versions(),
        "timings": {},
        "warnings": [],
        "errors": [],
    }
    start = time.perf_counter()
    code = 0
    try:
        series, header, rows, notes, summary, extra = RUNNERS[cfg["experiment"]](cfg)
    except (ObservabilityError, ValueError) as exc:
        code = 2 if isinstance(exc, ObservabilityError) and not isinstance(exc, InvalidInputError) else 1
        manifest.update(status="failed", exit_code=code)
        manifest["errors"].append(f"{type(exc).__name__}: {exc}")
        print(f"error: {exc}", file=sys.stderr)
    else:
        if cfg["timings"]:
            header = header + ["wall_time_s"]
            rows = [row + [r.wall_time_s] for row, r in zip(rows, series.records)]
        if cfg["out_csv"]:
            _write_csv(cfg["out_csv"], header, rows)
        manifest["warnings"] += notes
        manifest["timings"]["per_n"] = {str(r.n): r.wall_time_s for r in series.records}
        manifest["metadata"] = series.metadata
        manifest.update(extra)
        print(f"{cfg['experiment']}:")
        for line in summary:
            print("  " + line)
    manifest["timings"]["total_s"] = time.perf_counter() - start
    if cfg["out_manifest"]:
        with open(cfg["out_manifest"], "w", newline="\n") as fh:
            json.dump(manifest, fh, indent=2, default=_json_default)
            fh.write("\n")
    return code


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(argv)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
