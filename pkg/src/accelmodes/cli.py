"""Command-line front end: each subcommand writes ``<out>.csv`` and a JSON
sidecar ``<out>.json`` holding the schema version, the resolved
configuration and a summary.  Without ``--out`` the CSV goes to stdout.

Configuration files hold one ``key = value`` per line; ``#`` starts a
comment, keys are the long flag names (``pmax``, ``omega``, ``grid``, ...),
and flags given on the command line win over the file.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .core_map import MapParams, OrbitLabel
from .farey import Omega, check_theorems, convergents, farey_algorithm
from .gauss_sums import check_identities, coprime_pairs
from .islands import AreaConfig, UnstableCenterError, area_numerical, area_perturbative, f_of_lambda, fit_area_constant
from .orbit_finder import FinderConfig, default_threads, find_stable_orbit, measured_halfwidths, scan_tongue
from .perturbation import params_on_ray, tongue_margin
from .spectroscopy import B_PRESETS, ep_linear, mode_table

SCHEMA_VERSION = 1

COLUMNS = {
    "scan": ["omega", "ktilde", "stable", "trace", "area"],
    "orbit": ["n", "J", "theta"],
    "island": ["lambda", "omega", "ktilde", "area", "area_estimate", "f", "trapped", "total"],
    "gauss": ["p", "m", "shift", "derivative", "modulus", "worst"],
    "farey": ["n", "side", "m", "p", "d_omega", "delta_omega", "is_convergent"],
    "modes": ["p", "m", "side", "eps_lo", "eps_hi", "epsilon", "a", "jumping_index",
              "passes_appro", "passes_2cond", "left_lo", "left_hi", "right_lo", "right_hi"],
}

DEFAULTS = {
    "scan": {"label": "1,0", "omega": "-0.05:0.05", "ktilde": "0:0.3", "grid": "200x200", "area": False},
    "orbit": {"label": "1,0", "omega": 0.01, "ktilde": 0.2},
    "island": {"label": "1,1", "ktilde": 0.3666, "lambda": None, "sweep_lambda": False,
               "grid": 100, "iterations": 2000, "c": 0.66},
    "gauss": {"pmax": 50},
    "farey": {"omega": "golden", "pmax": 144, "check_samples": 0, "depth": 40},
    "modes": {"omega": "golden", "alpha": "inf", "b": "6", "pmax": 144, "kick": 0.8 * math.pi},
}
COMMON = {"tol": None, "threads": None, "seed": 0, "out": None}

SWEEP_LAMBDAS = [round(0.05 * i, 2) for i in range(1, 19)]


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config handling


def read_config(path: str) -> dict:
    """Parse the ``key = value`` grammar; keys use underscores or dashes."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {v!r}")


def resolve(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(COMMON)
    cfg.update(DEFAULTS[command])
    if args.config:
        for key, value in read_config(args.config).items():
            if key not in cfg:
                raise ConfigError(f"unknown key {key!r} for {command}")
            cfg[key] = value
    for key in cfg:
        v = getattr(args, key, None)
        if v is not None and v is not False:
            cfg[key] = v
    for key in ("area", "sweep_lambda"):
        if key in cfg:
            cfg[key] = _bool(cfg[key])
    if cfg["threads"] is None:
        cfg["threads"] = default_threads()
    cfg["threads"] = int(cfg["threads"])
    cfg["seed"] = int(cfg["seed"])
    if cfg["threads"] < 1:
        raise ConfigError("threads must be at least 1")
    return cfg


def parse_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(s) for s in str(text).split(":"))
    except ValueError as exc:
        raise ConfigError(f"bad range {text!r}, expected lo:hi") from exc
    if not lo < hi:
        raise ConfigError(f"empty range {text!r}")
    return lo, hi


def parse_grid(text: str) -> tuple[int, int]:
    try:
        a, b = (int(s) for s in str(text).lower().split("x"))
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}, expected NxM") from exc
    if a < 1 or b < 1:
        raise ConfigError(f"empty grid {text!r}: need at least 1 point per axis")
    return a, b


def parse_label(text: str) -> OrbitLabel:
    try:
        return OrbitLabel.parse(str(text))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad label {text!r}: {exc}") from exc


def parse_b(text) -> float:
    s = str(text).strip().lower()
    if s in B_PRESETS:
        return B_PRESETS[s]
    b = float(s)
    if not b > 0:
        raise ConfigError("b must be positive")
    return b


# ---------------------------------------------------------------------------
# output


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def emit(command: str, cfg: dict, rows: list[list], summary: dict, failures: list[str]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS[command])
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    meta = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "version": __version__,
        "config": {k: v for k, v in cfg.items() if k not in ("out", "threads")},
        "columns": COLUMNS[command],
        "rows": len(rows),
        "summary": summary,
        "failures": failures,
    }
    text = json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n"
    if cfg["out"] is None:
        sys.stdout.write(buf.getvalue())
        for f in failures:
            print(f"failure: {f}", file=sys.stderr)
        return
    out = Path(cfg["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    out.with_suffix(".csv").write_text(buf.getvalue())
    out.with_suffix(".json").write_text(text)


# ---------------------------------------------------------------------------
# commands


def _finder(cfg: dict) -> FinderConfig:
    return FinderConfig() if cfg["tol"] is None else FinderConfig(tol=float(cfg["tol"]))


def _scan_area(args):
    om, k, label, tol = args
    params = MapParams(om, k)
    stable, _ = find_stable_orbit(params, label, FinderConfig(tol=tol))
    if stable is None:
        return None
    try:
        return area_numerical(params, label, stable.points[0], AreaConfig(grid=40, iterations=500)).area
    except (UnstableCenterError, ValueError):
        return None


def cmd_scan(cfg: dict):
    label = parse_label(cfg["label"])
    om_range = parse_range(cfg["omega"])
    k_range = parse_range(cfg["ktilde"])
    res = parse_grid(cfg["grid"])
    finder = _finder(cfg)
    scan = scan_tongue(label, om_range, k_range, res, finder, threads=cfg["threads"])
    areas = None
    if cfg["area"]:
        cells = [(float(om), float(k), label, finder.tol)
                 for i, k in enumerate(scan.ktildes) for j, om in enumerate(scan.omegas) if scan.stable[i, j]]
        areas = _map(_scan_area, cells, cfg["threads"])
        lookup = {(c[0], c[1]): a for c, a in zip(cells, areas)}
    rows = []
    for om, k, stable, trace, _ in scan.rows():
        area = lookup.get((om, k)) if areas is not None else None
        rows.append([om, k, stable, trace, area])
    widths = measured_halfwidths(scan)
    summary = {
        "stable_cells": int(scan.stable.sum()),
        "cells": int(scan.stable.size),
        "halfwidth_vs_margin": [
            {"ktilde": float(k), "measured": None if math.isnan(w) else float(w), "margin": tongue_margin(label, k)}
            for k, w in zip(scan.ktildes, widths)
        ],
    }
    return rows, summary, []


def cmd_orbit(cfg: dict):
    label = parse_label(cfg["label"])
    params = MapParams(float(cfg["omega"]), float(cfg["ktilde"]))
    stable, anyorb = find_stable_orbit(params, label, _finder(cfg))
    orbit = stable or anyorb
    if orbit is None:
        return [], {"found": False}, [f"no {label} orbit found at Omega={params.omega}, ktilde={params.ktilde}"]
    rows = [[n, pt.J, pt.theta] for n, pt in enumerate(orbit.points)]
    summary = {"found": True, "stable": orbit.stable, "trace": orbit.trace,
               "residual": orbit.residual, "iterations": orbit.iterations}
    return rows, summary, []


def _island_point(args):
    label, ktilde, lam, grid, iterations, tol = args
    params = params_on_ray(label, lam, ktilde)
    stable, _ = find_stable_orbit(params, label, FinderConfig(tol=tol))
    if stable is None:
        return params.omega, None
    r = area_numerical(params, label, stable.points[0], AreaConfig(grid=grid, iterations=iterations))
    return params.omega, r


def _map(fn, tasks, threads):
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def cmd_island(cfg: dict):
    label = parse_label(cfg["label"])
    ktilde = float(cfg["ktilde"])
    if cfg["sweep_lambda"]:
        lams = SWEEP_LAMBDAS
    elif cfg["lambda"] is not None:
        lams = [float(s) for s in str(cfg["lambda"]).split(",")]
    else:
        raise ConfigError("island needs --lambda or --sweep-lambda")
    if any(not 0 <= x < 1 for x in lams):
        raise ConfigError("lambda values must lie in [0, 1)")
    tol = _finder(cfg).tol
    tasks = [(label, ktilde, lam, int(cfg["grid"]), int(cfg["iterations"]), tol) for lam in lams]
    results = _map(_island_point, tasks, cfg["threads"])
    rows, failures, meas, unit = [], [], [], []
    for lam, (om, r) in zip(lams, results):
        est = area_perturbative(label, ktilde, lam, float(cfg["c"]))
        if r is None:
            failures.append(f"no stable orbit at lambda={lam}")
            rows.append([lam, om, ktilde, None, est, f_of_lambda(lam), None, None])
            continue
        rows.append([lam, om, ktilde, r.area, est, f_of_lambda(lam), r.trapped, r.total])
        meas.append(r.area)
        unit.append(area_perturbative(label, ktilde, lam, 1.0))
    summary = {"fitted_c": fit_area_constant(np.array(meas), np.array(unit)) if meas else None}
    return rows, summary, failures


def cmd_gauss(cfg: dict):
    pmax = int(cfg["pmax"])
    if pmax < 1:
        raise ConfigError("pmax must be at least 1")
    tol = 1e-11 if cfg["tol"] is None else float(cfg["tol"])
    rows, worst = [], 0.0
    violations = []
    for p, m in coprime_pairs(pmax):
        rep = check_identities(p, m)
        rows.append([p, m, rep.shift, rep.derivative, rep.modulus, rep.worst])
        worst = max(worst, rep.worst)
        if rep.worst >= tol:
            violations.append(f"({p},{m}) residual {rep.worst:.3e}")
    return rows, {"worst": worst, "tol": tol, "pairs": len(rows), "violations": violations}, []


def cmd_farey(cfg: dict):
    omega = _omega(cfg["omega"])
    pmax = int(cfg["pmax"])
    if pmax < 1:
        raise ConfigError("pmax must be at least 1")
    convs = convergents(omega, pmax)
    convset = set(convs)
    rows = []
    for n, F in enumerate(farey_algorithm(omega, max_denominator=pmax)):
        ends = [("exact", F.left)] if F.is_singleton else [("left", F.left), ("right", F.right)]
        for side, r in ends:
            rows.append([n, side, r.numerator, r.denominator, float(omega.d(r)), float(omega.delta(r)), r in convset])
    summary = {"omega": omega.name, "convergents": [f"{c.numerator}/{c.denominator}" for c in convs]}
    failures = []
    samples = int(cfg["check_samples"])
    if samples > 0:
        rng = random.Random(cfg["seed"])
        depth = int(cfg["depth"])
        bad, t6 = 0, 0
        for _ in range(samples):
            w = Omega.rational(Fraction(rng.randrange(1, 10**30), 10**30))
            rep = check_theorems(w, depth)
            bad += not rep.exact_ok
            t6 += rep.t6_decreasing
            failures.extend(f"{w.name}: {f}" for f in rep.failures)
        summary["theorem_check"] = {"samples": samples, "depth": depth, "exact_failures": bad,
                                    "t6_decreasing_fraction": t6 / samples}
    return rows, summary, failures


def _omega(text) -> Omega:
    try:
        return Omega.parse(str(text))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_modes(cfg: dict):
    omega = _omega(cfg["omega"])
    alpha = float(cfg["alpha"])
    pmax = int(cfg["pmax"])
    if pmax < 1:
        raise ConfigError("pmax must be at least 1")
    b = parse_b(cfg["b"])
    ep = ep_linear(omega, alpha, float(cfg["kick"]))
    rows = []
    for mp in mode_table(ep, pmax, b):
        w = mp.window
        lo, hi = w.epsilon_window if w is not None else (None, None)
        left, right = mp.arms
        rows.append([mp.label.p, mp.label.m, mp.side, lo, hi,
                     None if math.isnan(mp.epsilon) else mp.epsilon,
                     None if math.isnan(mp.acceleration) else mp.acceleration,
                     mp.jumping_index, mp.passes_appro, mp.passes_2cond,
                     *(left.epsilon_window if left.exists else (None, None)),
                     *(right.epsilon_window if right.exists else (None, None))])
    observed = [f"{r[1]}/{r[0]}" for r in rows if r[8] and r[9]]
    rejected = [f"{r[1]}/{r[0]}" for r in rows if not (r[8] and r[9])]
    return rows, {"omega": omega.name, "b": b, "observable": observed, "rejected": rejected}, []


COMMANDS = {
    "scan": cmd_scan,
    "orbit": cmd_orbit,
    "island": cmd_island,
    "gauss": cmd_gauss,
    "farey": cmd_farey,
    "modes": cmd_modes,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="accelmodes", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value file; flags override it")
        p.add_argument("--out", help="output prefix for .csv and .json")
        p.add_argument("--threads", type=int, help="worker processes (default: all cores)")
        p.add_argument("--seed", type=int, help="RNG seed where sampling is used")
        p.add_argument("--tol", type=float, help="Newton tolerance, or identity tolerance for gauss")
        return p

    p = common(sub.add_parser("scan", help="stability of a (p,m) orbit on an (Omega, ktilde) grid"))
    p.add_argument("--label", help="p,m")
    p.add_argument("--omega", help="Omega range lo:hi")
    p.add_argument("--ktilde", help="ktilde range lo:hi")
    p.add_argument("--grid", help="NxM points (Omega x ktilde)")
    p.add_argument("--area", action="store_true", help="measure island areas in stable cells")

    p = common(sub.add_parser("orbit", help="find one (p,m) periodic orbit"))
    p.add_argument("--label")
    p.add_argument("--omega", type=float)
    p.add_argument("--ktilde", type=float)

    p = common(sub.add_parser("island", help="island area against the separatrix estimate"))
    p.add_argument("--label")
    p.add_argument("--ktilde", type=float)
    p.add_argument("--lambda", dest="lambda", help="comma-separated tilt values")
    p.add_argument("--sweep-lambda", dest="sweep_lambda", action="store_true",
                   help="lambda = 0.05, 0.10, ..., 0.90")
    p.add_argument("--grid", type=int, help="initial conditions per axis")
    p.add_argument("--iterations", type=int)
    p.add_argument("--c", type=float, help="constant of the estimate")

    p = common(sub.add_parser("gauss", help="Gauss-sum identity residuals"))
    p.add_argument("--pmax", type=int)

    p = common(sub.add_parser("farey", help="Farey intervals and convergents of omega"))
    p.add_argument("--omega", help="golden, pi-3, r/s or a decimal")
    p.add_argument("--pmax", type=int)
    p.add_argument("--check-samples", dest="check_samples", type=int,
                   help="also run the theorem checks on this many random omegas")
    p.add_argument("--depth", type=int)

    p = common(sub.add_parser("modes", help="accelerator modes along a linear experimental path"))
    p.add_argument("--omega")
    p.add_argument("--alpha", help="path slope, or inf for the vertical path")
    p.add_argument("--b", help="critical constant: number, 6 or 2pi")
    p.add_argument("--pmax", type=int)
    p.add_argument("--kick", type=float, help="physical kick strength k")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args.command, args)
        rows, summary, failures = COMMANDS[args.command](cfg)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"accelmodes {args.command}: error: {exc}", file=sys.stderr)
        return 2
    emit(args.command, cfg, rows, summary, failures)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
