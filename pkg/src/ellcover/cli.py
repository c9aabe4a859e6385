"""Command-line entry points: ``dist``, ``validate``, ``check``, ``roundtrip``, ``ball``.

Stochastic commands write one JSON report (stdout, or ``--out``).  The report
has the layout::

    {
      "schema_version": 1,
      "command": "validate",
      "config": {...},           # full effective configuration
      "pass": true,
      "constants": {...},        # headline estimates
      "witnesses": [...],        # violating samples, empty on pass
      "reports": [...],          # one entry per certification that ran
      "runtime": {"workers": 1, "out": null},
      "timing": {"wall_seconds": ...}
    }

Everything except ``runtime`` and ``timing`` is the numeric payload: it depends
only on ``config``.  Exit codes: 0 pass, 1 violation, 2 rejected configuration.
"""
import argparse
import csv
import json
import math
import sys
import time

import numpy as np

from . import metrics as _metrics
from .certify import ahlfors_certify, triangle_constant
from .characterization import (
    build_xi_cover,
    inner_property_check,
    quasi_convexity_certify,
    ray_radii,
    roundtrip_equivalence,
    xi_engulf,
)
from .covers import COVER_NAMES, make_cover
from .errors import ConfigError, ContractError, NumericError, UnboundedBallError
from .metrics import CASE_NAMES, METRIC_NAMES, make_metric
from .report import SCHEMA_VERSION, dumps
from .streams import SeededRng, quasi_uniform_directions, run_chunks
from .validators import (
    SamplingBox,
    engulf_constant,
    sample_intersecting_pairs,
    theta0_case_check,
    union_engulf,
    validate_shape_geometric,
    validate_shape_norm,
    validate_volume,
)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
PROPERTIES = ("ahlfors", "quasi-convex", "inner", "triangle")

# Defaults per command.  Keys double as config-file keys and flag names
# (underscores become dashes on the command line).
_COMMON = {"seed": 0, "box": 4.0}
DEFAULTS = {
    "dist": {"metric": None, "k": 1, "dim": 2, "x": None, "y": None},
    "validate": {
        **_COMMON,
        "cover": None,
        "k": 1,
        "dim": 2,
        "exponents": None,
        "samples": 10_000,
        "t_range": [-8.0, 24.0],
        "s_range": [0.0, 12.0],
    },
    "check": {
        **_COMMON,
        "property": None,
        "metric": None,
        "k": 1,
        "dim": 2,
        "a": None,
        "b": None,
        "samples": None,
        "centers": 8,
        "mc_points": 20_000,
        "lam_max": 1024.0,
    },
    "roundtrip": {
        **_COMMON,
        "metric": None,
        "k": 1,
        "dim": 2,
        "pairs": 500,
        "seeds": 3,
        "pool": 100_000,
        "quasi_samples": 200,
        "centers": 8,
        "mc_points": 20_000,
        "triangle_samples": 10_000,
        "xi_samples": 2000,
        "engulf_samples": 500,
        "rtol": 1e-6,
    },
    "ball": {"metric": None, "k": 1, "dim": 2, "x": None, "r": None, "points": 256},
}
# Settings that change how a run executes but never its numbers.
RUNTIME_KEYS = ("workers", "out", "config")
# Sample-count default per property of ``check``.
CHECK_SAMPLES = {"ahlfors": None, "quasi-convex": 200, "inner": 10_000, "triangle": 10_000}
REQUIRED = {
    "dist": ("metric", "x", "y"),
    "validate": ("cover",),
    "check": ("property", "metric"),
    "roundtrip": ("metric",),
    "ball": ("metric", "x", "r"),
}
CHOICES = {"metric": METRIC_NAMES, "cover": COVER_NAMES, "property": PROPERTIES}


def _flag(key):
    return "--" + key.replace("_", "-")


def build_parser():
    parser = argparse.ArgumentParser(prog="ellcover", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "dist": "evaluate a quasi-distance",
        "validate": "validate the volume and shape conditions of a cover",
        "check": "certify one property of a metric",
        "roundtrip": "metric -> cover of inscribed ellipsoids -> metric",
        "ball": "export a ball boundary as a CSV point cloud",
    }
    for cmd, defaults in DEFAULTS.items():
        p = sub.add_parser(cmd, help=helps[cmd], argument_default=argparse.SUPPRESS)
        for key, default in defaults.items():
            kw = {"help": f"default: {default}"}
            if key in CHOICES:
                kw["choices"] = CHOICES[key]
            if key in ("x", "y", "exponents"):
                kw.update(nargs="+", type=float)
            elif key in ("t_range", "s_range"):
                kw.update(nargs=2, type=float)
            elif key in ("seed", "k", "dim", "samples", "centers", "mc_points", "pairs", "seeds",
                         "pool", "quasi_samples", "triangle_samples", "xi_samples",
                         "engulf_samples", "points"):
                kw["type"] = int
            elif key not in CHOICES:
                kw["type"] = float
            p.add_argument(_flag(key), dest=key, **kw)
        if cmd != "dist":
            p.add_argument("--workers", type=int, help="worker threads (results do not depend on it)")
            p.add_argument("--out", help="output path (stdout when omitted)")
        p.add_argument("--config", help="JSON file keyed like the flags; flags win")
    return parser


def resolve_config(command, flags: dict) -> dict:
    """Merge defaults < config file < flags and validate the result.

    Raises ConfigError for unknown keys, a missing seed type or missing required values.
    """
    known = DEFAULTS[command]
    cfg = dict(known)
    path = flags.get("config")
    if path:
        try:
            with open(path) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        loaded = {k.replace("-", "_"): v for k, v in loaded.items()}
        unknown = sorted(set(loaded) - set(known) - {"workers", "out"})
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {unknown}")
        cfg.update(loaded)
        for key in ("workers", "out"):
            if key in loaded:
                flags.setdefault(key, loaded[key])
    cfg.update({k: v for k, v in flags.items() if k in known})
    for key, allowed in CHOICES.items():
        if key in cfg and cfg[key] is not None and cfg[key] not in allowed:
            raise ConfigError(f"{key} must be one of {list(allowed)}, got {cfg[key]!r}")
    missing = [k for k in REQUIRED[command] if cfg.get(k) is None]
    if missing:
        raise ConfigError(f"missing required settings: {', '.join(_flag(k) for k in missing)}")
    if "seed" in cfg and (isinstance(cfg["seed"], bool) or not isinstance(cfg["seed"], int) or cfg["seed"] < 0):
        raise ConfigError("seed must be a non-negative integer")
    if command == "check":
        if cfg["property"] == "inner" and (cfg["a"] is None or cfg["b"] is None):
            raise ConfigError("--property inner needs --a and --b")
        if cfg["samples"] is None:
            cfg["samples"] = CHECK_SAMPLES[cfg["property"]]
    for key in ("samples", "pairs", "seeds", "points", "centers", "mc_points"):
        if cfg.get(key) is not None and int(cfg[key]) < 1:
            raise ConfigError(f"{key} must be positive")
    if int(flags.get("workers") or 1) < 1:
        raise ConfigError("workers must be positive")
    return cfg


def _sampling_box(cfg):
    kw = {"box": float(cfg["box"])}
    if "t_range" in cfg:
        kw["t_range"] = tuple(cfg["t_range"])
        kw["s_range"] = tuple(cfg["s_range"])
    try:
        return SamplingBox(**kw)
    except ContractError as exc:
        raise ConfigError(str(exc)) from exc


def _metric(cfg):
    try:
        return make_metric(cfg["metric"], cfg["k"], cfg["dim"])
    except ContractError as exc:
        raise ConfigError(str(exc)) from exc


def _points(cfg, key, n):
    p = np.asarray(cfg[key], dtype=float)
    if p.shape != (n,):
        raise ConfigError(f"--{key} needs {n} coordinates, got {p.size}")
    return p


def _summary(command, cfg, reports, constants, extra_pass=True):
    witnesses = [dict(w, report=r.name) for r in reports for w in r.to_dict()["witnesses"]]
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": cfg,
        "pass": bool(extra_pass and all(r.passed for r in reports)),
        "constants": constants,
        "witnesses": witnesses,
        "reports": [r.to_dict() for r in reports],
    }


# -- commands -----------------------------------------------------------------

def cmd_dist(cfg):
    metric = _metric(cfg)
    x = _points(cfg, "x", metric.dim)
    y = _points(cfg, "y", metric.dim)
    if cfg["metric"] == "theta0":
        val, case, _ = _metrics.rho_theta0(x[None], y[None], details=True)
        c = int(case[0])
        print(f"{float(val[0])!r} case={c} ({CASE_NAMES[c]})")
    else:
        print(repr(metric(x, y)))
    return EXIT_PASS


def cmd_validate(cfg, workers):
    box = _sampling_box(cfg)
    try:
        cover = make_cover(cfg["cover"], cfg["k"], cfg["dim"], cfg["exponents"])
    except ContractError as exc:
        raise ConfigError(str(exc)) from exc
    rng = SeededRng(cfg["seed"])
    N = int(cfg["samples"])
    vol = validate_volume(cover, rng.child(0), N, box, workers)
    pairs = run_chunks(lambda g, k: sample_intersecting_pairs(cover, g, k, box), rng.child(1), N, workers)
    norm = validate_shape_norm(cover, rng.child(1), N, box, workers, pairs=pairs)
    p = cover.params
    a4 = p.a4 if p.has_shape else norm.constants["a4"]
    a6 = p.a6 if p.has_shape else norm.constants["a6"]
    geo = validate_shape_geometric(cover, rng.child(1), N, a4, a6, box=box, workers=workers, pairs=pairs)
    eng = engulf_constant(cover, rng.child(2), N, box=box, workers=workers)
    a5 = p.a5 if p.has_shape else norm.constants["a5"]
    uni = union_engulf(cover, rng.child(1), N, c=eng.constants["c"], a4=a4, a5=a5,
                       box=box, workers=workers, pairs=pairs)
    reports = [vol, norm, geo, eng, uni]
    if cfg["cover"] == "theta0":
        reports.append(theta0_case_check(cover, rng.child(3), N, workers))
    constants = {
        **vol.constants,
        **{k: norm.constants[k] for k in ("a3", "a4", "a5", "a6")},
        "a3_prime": geo.constants["a3_prime"],
        "a5_prime": geo.constants["a5_prime"],
        "c": eng.constants["c"],
        **uni.constants,
    }
    return _summary("validate", cfg, reports, constants)


def _require_box(metric, prop):
    if metric.box(np.zeros((1, metric.dim)), np.ones(1)) is None:
        raise ConfigError(f"{prop} needs a metric with an analytic bounding box; {metric.name} has none")


def cmd_check(cfg, workers):
    box = _sampling_box(cfg)
    metric = _metric(cfg)
    rng = SeededRng(cfg["seed"])
    prop = cfg["property"]
    if prop == "ahlfors":
        _require_box(metric, prop)
        rep = ahlfors_certify(metric, rng, centers=cfg["centers"], mc_points=cfg["mc_points"],
                              box=box, workers=workers)
    elif prop == "quasi-convex":
        rep = quasi_convexity_certify(metric, rng, cfg["samples"], box=box, workers=workers)
    elif prop == "inner":
        if not (cfg["a"] > 0 and cfg["b"] > 0):
            raise ConfigError("--a and --b must be positive")
        rep = inner_property_check(metric, cfg["a"], cfg["b"], rng, cfg["samples"],
                                   lam_max=cfg["lam_max"], box=box, workers=workers)
    else:
        rep = triangle_constant(metric, rng, cfg["samples"], box=box, workers=workers)
    return _summary("check", cfg, [rep], dict(rep.constants))


def cmd_roundtrip(cfg, workers):
    box = _sampling_box(cfg)
    metric = _metric(cfg)
    _require_box(metric, "roundtrip")
    rng = SeededRng(cfg["seed"])
    n = metric.dim
    quasi = quasi_convexity_certify(metric, rng.child(0), cfg["quasi_samples"], box=box, workers=workers)
    ahl = ahlfors_certify(metric, rng.child(1), centers=cfg["centers"], mc_points=cfg["mc_points"],
                          box=box, workers=workers)
    if not (quasi.passed and ahl.passed):
        constants = {"Q": quasi.constants["Q"], "c1": ahl.constants["c1"]}
        out = _summary("roundtrip", cfg, [quasi, ahl], constants)
        out["stage"] = "certification"
        return out
    tri = triangle_constant(metric, rng.child(2), cfg["triangle_samples"], box=box, workers=workers)
    xi = build_xi_cover(metric, quasi, ahl)
    Q, c1, kappa = xi.Q, xi.c1, tri.constants["kappa"]

    xi_box = SamplingBox(box=box.box, t_range=(-6.0, 18.0))
    xs = int(cfg["xi_samples"])
    xi_pairs = run_chunks(lambda g, k: sample_intersecting_pairs(xi, g, k, xi_box), rng.child(3), xs, workers)
    norm = validate_shape_norm(xi, rng.child(3), xs, xi_box, workers, pairs=xi_pairs)
    geo = validate_shape_geometric(xi, rng.child(3), xs, norm.constants["a4"], norm.constants["a6"],
                                   box=xi_box, workers=workers, pairs=xi_pairs)
    eng = xi_engulf(xi, rng.child(4), cfg["engulf_samples"], box=xi_box, workers=workers)
    rt = roundtrip_equivalence(metric, xi, rng.child(5), cfg["pairs"], cfg["seeds"], kappa,
                               pool=cfg["pool"], rtol=cfg["rtol"], box=box, workers=workers)
    c = eng.constants["c"]
    # rho_Xi <= a2 2^{cQ} rho: take r just above rho(x, y), so y is in B(x, r).
    # With r = rho(x, y) / 2 one would get a2 2^{cQ-1}, but then y is outside B(x, r).
    xi_over_rho = c1 * 2.0 ** (c * Q)
    xi_over_rho_halved = c1 * 2.0 ** (c * Q - 1.0)
    rho_over_xi = 4.0 * c1 * kappa * Q ** n
    lower_ok = rt.constants["ratio_max"] <= xi_over_rho
    constants = {
        "Q": Q,
        "c1": c1,
        "kappa": kappa,
        "c": c,
        "a1": xi.params.a1,
        "a2": xi.params.a2,
        **{k: norm.constants[k] for k in ("a3", "a4", "a5", "a6")},
        "ratio_min": rt.constants["ratio_min"],
        "ratio_max": rt.constants["ratio_max"],
        "bound_rho_xi_over_rho": xi_over_rho,
        "bound_rho_xi_over_rho_halved_radius": xi_over_rho_halved,
        "bound_rho_over_rho_xi": rho_over_xi,
        "ratio_interval_theory": [1.0 / rho_over_xi, xi_over_rho],
        "ratio_percentiles": rt.details["percentiles"],
    }
    out = _summary("roundtrip", cfg, [quasi, ahl, tri, norm, geo, eng, rt], constants, lower_ok)
    out["stage"] = "complete"
    out["halved_radius_bound_holds"] = bool(rt.constants["ratio_max"] <= xi_over_rho_halved)
    return out


def cmd_ball(cfg, out_path):
    metric = _metric(cfg)
    n = metric.dim
    x = _points(cfg, "x", n)
    r = float(cfg["r"])
    if not (r > 0 and math.isfinite(r)):
        raise ConfigError("--r must be positive and finite")
    U = quasi_uniform_directions(int(cfg["points"]), n)
    R = ray_radii(metric, np.tile(x, (len(U), 1)), np.full(len(U), r), U)
    B = x + R[:, None] * U
    fh = open(out_path, "w", newline="") if out_path else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow([f"u{i + 1}" for i in range(n)] + ["R"] + [f"b{i + 1}" for i in range(n)])
        for u, rad, b in zip(U, R, B):
            w.writerow([repr(float(v)) for v in u] + [repr(float(rad))] + [repr(float(v)) for v in b])
    finally:
        if out_path:
            fh.close()
    return EXIT_PASS


def _emit(report, out_path):
    text = dumps(report) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    flags = vars(ns)
    command = flags.pop("command")
    try:
        cfg = resolve_config(command, flags)
        if command == "dist":
            return cmd_dist(cfg)
        if command == "ball":
            return cmd_ball(cfg, flags.get("out"))
        workers = int(flags.get("workers") or 1)
        runner = {"validate": cmd_validate, "check": cmd_check, "roundtrip": cmd_roundtrip}[command]
        start = time.perf_counter()
        report = runner(cfg, workers)
        report["runtime"] = {"workers": workers, "out": flags.get("out")}
        report["timing"] = {"wall_seconds": time.perf_counter() - start}
    except (ConfigError, ContractError) as exc:
        print(f"ellcover {command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnboundedBallError as exc:
        print(f"ellcover {command}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except NumericError as exc:
        print(f"ellcover {command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(report, flags.get("out"))
    return EXIT_PASS if report["pass"] else EXIT_FAIL


def numeric_payload(report: dict) -> dict:
    """The part of a report that must be reproducible: drops runtime and timing."""
    return {k: v for k, v in report.items() if k not in ("runtime", "timing")}


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
