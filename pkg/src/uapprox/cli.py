"""Command line front end.

Usage::

    uapprox COMMAND --config run.json [--out DIR] [--seed N] [--set key.path=VALUE ...]

COMMAND is one of construct, greedy, rbf, jackson, sweep, check. The config
is a JSON object validated against :data:`CONFIG_SCHEMA`; ``--set`` edits it
before validation (the value is parsed as JSON, falling back to a string).

Output directory precedence: ``--out``, then ``output.dir`` in the config,
then the ``UAPPROX_OUT_DIR`` environment variable, then ``uapprox-out``.

Exit codes: 0 success, 2 configuration or input error, 3 numerical or
construction failure, 4 certificate violation. Errors are reported on stderr
as a single JSON object.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path
from typing import Callable

import jsonschema
import numpy as np

from . import analysis, construct, greedy, jackson, rbf
from .errors import CertificateViolation, InputError, UapproxError
from .netcore import ACTIVATION_KINDS, Activation, GriddedFunction, lp_error, sup_error

COMMANDS = ("construct", "greedy", "rbf", "jackson", "sweep", "check")
BUILTINS = ("sin", "abs-sin", "ramp", "bump", "clamp")
DEFAULT_OUT_DIR = "uapprox-out"
OUT_DIR_ENV = "UAPPROX_OUT_DIR"

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_CERTIFICATE = 0, 2, 3, 4

_num_list = {"type": "array", "items": {"type": "number"}}
_int_list = {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1}

TARGET_SCHEMA = {
    "oneOf": [
        {"type": "object", "additionalProperties": False, "required": ["type", "coeffs"],
         "properties": {"type": {"const": "polynomial"}, "coeffs": {**_num_list, "minItems": 1}}},
        {"type": "object", "additionalProperties": False, "required": ["type", "coeffs"],
         "properties": {"type": {"const": "bivariate"},
                        "coeffs": {"type": "array", "minItems": 1, "items": _num_list}}},
        {"type": "object", "additionalProperties": False, "required": ["type", "a"],
         "properties": {"type": {"const": "trig"}, "a": {**_num_list, "minItems": 1}, "b": _num_list}},
        {"type": "object", "additionalProperties": False, "required": ["type", "name"],
         "properties": {"type": {"const": "builtin"}, "name": {"enum": list(BUILTINS)}}},
        {"type": "object", "additionalProperties": False, "required": ["type", "x", "y"],
         "properties": {"type": {"const": "points"},
                        "x": {"type": "array", "minItems": 1,
                              "items": {"anyOf": [{"type": "number"}, _num_list]}},
                        "y": {**_num_list, "minItems": 1}}},
        {"type": "object", "additionalProperties": False, "required": ["type", "kind"],
         "properties": {"type": {"const": "activation"}, "kind": {"enum": list(ACTIVATION_KINDS)},
                        "params": _num_list}},
    ]
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "target": TARGET_SCHEMA,
        "activation": {
            "type": "object", "additionalProperties": False, "required": ["kind"],
            "properties": {"kind": {"enum": list(ACTIVATION_KINDS)},
                           "params": _num_list}},
        "domain": {
            "type": "object", "additionalProperties": False, "required": ["lo", "hi"],
            "properties": {"lo": {**_num_list, "minItems": 1}, "hi": {**_num_list, "minItems": 1}}},
        "resolution": {"type": "integer", "minimum": 2},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
        "params": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "construction": {"enum": ["squashing-step", "cosine", "monomial", "polynomial",
                                          "staircase", "pinkus", "vandermonde", "ridge"]},
                "algorithm": {"enum": ["maurey", "ks", "ddgs"]},
                "dictionary": {"enum": ["orthonormal", "logistic"]},
                "weights": {"enum": ["uniform", "random"]},
                "inequality": {"enum": ["clarkson", "holder", "minkowski"]},
                "kernel": {"type": "object", "additionalProperties": False, "required": ["kind"],
                           "properties": {"kind": {"enum": list(rbf.KERNEL_KINDS)}, "params": _num_list}},
                "eps": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "M": {"type": "number", "exclusiveMinimum": 0},
                "n": {"type": "integer", "minimum": 0},
                "b": {"type": "number"},
                "h": {"type": "number", "exclusiveMinimum": 0},
                "r": {"type": "integer", "minimum": 0},
                "s": {"type": "integer", "minimum": 0},
                "p": {"anyOf": [{"type": "number", "minimum": 1}, {"const": "sup"}]},
                "m": {"type": "integer", "minimum": 1},
                "steps": {"type": "integer", "minimum": 1},
                "runs": {"type": "integer", "minimum": 1},
                "instances": {"type": "integer", "minimum": 1},
                "sigma": {"type": "number", "exclusiveMinimum": 0},
                "n_list": _int_list,
                "betas": _num_list,
                "directions": {"type": "array", "items": _num_list},
                "data": {"type": "object", "additionalProperties": False,
                         "properties": {"f": _num_list, "g": _num_list, "weights": _num_list,
                                        "F": {"type": "array", "items": _num_list},
                                        "wx": _num_list, "wy": _num_list}},
            },
        },
        "output": {"type": "object", "additionalProperties": False,
                   "properties": {"dir": {"type": "string", "minLength": 1}}},
    },
}


# ---------------------------------------------------------------------------
# helpers


class ConfigError(InputError):
    pass


def _set_path(cfg: dict, dotted: str, raw: str):
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    keys = dotted.split(".")
    if not all(keys):
        raise ConfigError(f"bad --set key {dotted!r}")
    node = cfg
    for k in keys[:-1]:
        nxt = node.setdefault(k, {})
        if not isinstance(nxt, dict):
            raise ConfigError(f"--set {dotted}: {k!r} is not an object")
        node = nxt
    node[keys[-1]] = value


def load_config(path: str | None, overrides=(), command: str | None = None) -> dict:
    cfg: dict = {}
    if path is not None:
        try:
            with open(path) as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        _set_path(cfg, k.strip(), v)
    if command is not None:
        if cfg.get("command", command) != command:
            raise ConfigError(f"config is for {cfg['command']!r}, not {command!r}")
        cfg["command"] = command
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {where}: {exc.message}") from exc
    return cfg


def resolve_out_dir(cli_out: str | None, cfg: dict) -> Path:
    if cli_out:
        return Path(cli_out)
    if cfg.get("output", {}).get("dir"):
        return Path(cfg["output"]["dir"])
    return Path(os.environ.get(OUT_DIR_ENV) or DEFAULT_OUT_DIR)


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def write_json(path: Path, obj):
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _need(params: dict, key: str):
    if key not in params:
        raise ConfigError(f"params.{key} is required for this run")
    return params[key]


def builtin_function(name: str) -> Callable:
    if name == "sin":
        return np.sin
    if name == "abs-sin":
        return lambda x: np.abs(np.sin(x))
    if name == "ramp":
        return lambda x: np.maximum(np.asarray(x, dtype=float), 0.0)
    if name == "clamp":
        return lambda x: np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    if name == "bump":
        def bump(x):
            x = np.asarray(x, dtype=float)
            rho = np.abs(x) if x.ndim <= 1 else np.linalg.norm(x, axis=-1)
            return np.maximum(0.0, 1.0 - rho)
        return bump
    raise ConfigError(f"unknown builtin {name!r}")


def target_function(spec: dict | None) -> Callable:
    if not spec:
        raise ConfigError("a target is required for this command")
    kind = spec["type"]
    if kind == "builtin":
        return builtin_function(spec["name"])
    if kind == "polynomial":
        return np.polynomial.Polynomial(spec["coeffs"])
    if kind == "trig":
        a = spec["a"]
        b = spec.get("b", [0.0] * (len(a) - 1))
        return jackson.TrigPoly(a, b)
    if kind == "activation":
        return Activation(spec["kind"], tuple(spec.get("params", ())))
    if kind == "bivariate":
        C = np.asarray(spec["coeffs"], dtype=float)
        return lambda X: construct.eval_bivariate(C, X)
    raise ConfigError(f"target type {kind!r} is not a function")


def _activation(cfg: dict, default: str | None = None) -> Activation:
    spec = cfg.get("activation")
    if spec is None:
        if default is None:
            raise ConfigError("an activation is required for this run")
        return Activation(default)
    return Activation(spec["kind"], tuple(spec.get("params", ())))


def _domain(cfg: dict, default=((-1.0,), (1.0,))):
    d = cfg.get("domain")
    lo, hi = (d["lo"], d["hi"]) if d else default
    if len(lo) != len(hi):
        raise ConfigError("domain.lo and domain.hi differ in length")
    return tuple(float(v) for v in lo), tuple(float(v) for v in hi)


# ---------------------------------------------------------------------------
# commands


def run_construct(cfg: dict, out: Path, seed: int) -> dict:
    params = cfg.get("params", {})
    what = _need(params, "construction")
    summary: dict = {"construction": what}

    if what == "vandermonde":
        c = construct.vandermonde_ridge_coeffs(_need(params, "r"), _need(params, "s"), _need(params, "betas"))
        write_json(out / "coeffs.json", {"r": params["r"], "s": params["s"],
                                         "betas": params["betas"], "c": c})
        return summary
    if what == "ridge":
        spec = cfg.get("target") or {}
        if spec.get("type") != "bivariate":
            raise ConfigError("ridge decomposition needs a bivariate target")
        dec = construct.decompose_polynomial_ridge(spec["coeffs"], params.get("n"), params.get("directions"))
        rng = np.random.default_rng(seed)
        X = rng.uniform(-1.0, 1.0, size=(50, 2))
        resid = float(np.max(np.abs(dec(X) - construct.eval_bivariate(spec["coeffs"], X))))
        write_json(out / "ridge.json", {"degree": dec.degree, "directions": dec.directions,
                                        "polys": dec.polys, "residual": resid})
        summary["residual"] = resid
        return summary
    if what in ("staircase", "pinkus"):
        spec = cfg.get("target") or {}
        if spec.get("type") != "points":
            raise ConfigError(f"{what} interpolation needs a points target")
        X = np.asarray(spec["x"], dtype=float)
        y = np.asarray(spec["y"], dtype=float)
        if what == "staircase":
            net = construct.interpolate_exact_squashing(_activation(cfg, "heaviside"), X, y, seed=seed)
        else:
            net = construct.interpolate_pinkus(_activation(cfg, "logistic"), X, y, seed=seed)
        resid = float(np.max(np.abs(net(X) - y)))
        summary["residual"] = resid
        write_json(out / "net.json", net.to_dict())
        write_json(out / "summary.json", summary)
        return summary

    lo, hi = _domain(cfg)
    if len(lo) != 1:
        raise ConfigError(f"{what} constructions are one-dimensional")
    if what == "squashing-step":
        F = target_function(cfg.get("target"))
        net = construct.approximate_squashing_step(_activation(cfg, "heaviside"), F, _need(params, "eps"))
        ref = F
    elif what == "cosine":
        M = float(_need(params, "M"))
        net = construct.build_cosine_net(_activation(cfg, "logistic"), M, _need(params, "eps"))
        lo, hi = (-M,), (M,)
        ref = np.cos
    elif what == "monomial":
        n = int(_need(params, "n"))
        net = construct.build_monomial_net(_activation(cfg, "exponential"), n, params.get("b"),
                                           params.get("h"), (lo[0], hi[0]))
        ref = lambda x: np.asarray(x, dtype=float) ** n
    else:  # polynomial
        spec = cfg.get("target") or {}
        if spec.get("type") != "polynomial":
            raise ConfigError("polynomial construction needs a polynomial target")
        net = construct.build_polynomial_net(_activation(cfg, "exponential"), spec["coeffs"],
                                             params.get("b"), params.get("h"), (lo[0], hi[0]))
        ref = np.polynomial.Polynomial(spec["coeffs"])
    f = GriddedFunction.from_callable(ref, lo, hi, cfg.get("resolution"))
    summary.update({"terms": len(net), "sup_error": sup_error(f, net), "l2_error": lp_error(f, net, 2.0)})
    write_json(out / "net.json", net.to_dict())
    write_json(out / "summary.json", summary)
    return summary


def _greedy_dictionary(cfg: dict, rng: np.random.Generator) -> greedy.Dictionary:
    params = cfg.get("params", {})
    m = int(params.get("m", 16))
    lo, hi = _domain(cfg, ((0.0,), (1.0,)))
    if len(lo) != 1:
        raise ConfigError("greedy dictionaries live on 1-D grids")
    res = int(cfg.get("resolution", 1025))
    kind = params.get("dictionary", "orthonormal")
    if kind == "orthonormal":
        from .netcore import trapezoid_weights
        w = trapezoid_weights(res, lo[0], hi[0])
        return greedy.Dictionary(greedy.orthonormal_atoms(m, w, int(rng.integers(2 ** 32))), w)
    act = _activation(cfg, "logistic")
    W = rng.uniform(-20.0, 20.0, m)
    B = rng.uniform(-10.0, 10.0, m)
    units = [greedy.Unit((float(W[i]),), float(B[i]), act) for i in range(m)]
    return greedy.dictionary_from_net_units(units, lo[0], hi[0], res)


def _greedy_target(cfg: dict, D: greedy.Dictionary, rng: np.random.Generator) -> greedy.ConvexTarget:
    if cfg.get("params", {}).get("weights", "uniform") == "uniform":
        return greedy.ConvexTarget.assemble(D, np.full(D.size, 1.0 / D.size))
    return greedy.random_convex_target(D, rng)


def _run_greedy(cfg: dict, D, T):
    params = cfg.get("params", {})
    algo = params.get("algorithm", "maurey")
    steps = int(params.get("steps", D.size))
    if algo == "maurey":
        return greedy.maurey_greedy(T, D, steps)
    if algo == "ks":
        return greedy.ks_greedy(T, D, steps)
    p = params.get("p", 2.0)
    if p == "sup":
        raise ConfigError("the L^p greedy needs a finite p")
    return greedy.ddgs_greedy(T, D, float(p), steps)


def run_greedy(cfg: dict, out: Path, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    D = _greedy_dictionary(cfg, rng)
    T = _greedy_target(cfg, D, rng)
    comb, trace = _run_greedy(cfg, D, T)
    write_csv(out / "trace.csv", trace.header, trace.rows())
    summary = {"algorithm": trace.algorithm, "steps": len(trace.steps), "exact": trace.exact,
               "tau": trace.tau, "final_error": trace.steps[-1].error, "final_bound": trace.steps[-1].bound,
               "s_G": D.s_G()}
    if D.units is not None:
        net = comb.to_net(D)
        summary["g_variation_upper_bound"] = greedy.g_variation_upper_bound(net, D)
        write_json(out / "net.json", net.to_dict())
    write_json(out / "summary.json", summary)
    return summary


def run_sweep(cfg: dict, out: Path, seed: int) -> dict:
    """Independent greedy runs on fresh random targets, with a rate fit per run."""
    params = cfg.get("params", {})
    runs = int(params.get("runs", 1))
    seeds = np.random.SeedSequence(seed).spawn(runs)
    rows, fits = [], []
    for i, ss in enumerate(seeds):
        rng = np.random.default_rng(ss)
        D = _greedy_dictionary(cfg, rng)
        T = _greedy_target(cfg, D, rng)
        _, trace = _run_greedy(cfg, D, T)
        for row in trace.rows():
            rows.append([i] + row[:5])
        try:
            fit = analysis.fit_rate([s.step for s in trace.steps], trace.errors, drop_nonpositive=True)
            fits.append([i, fit.slope, fit.intercept, fit.r_squared])
        except InputError:
            fits.append([i, float("nan"), float("nan"), float("nan")])
    write_csv(out / "sweep.csv", ["run", "step", "atom", "alpha", "error", "bound"], rows)
    write_csv(out / "rates.csv", ["run", "slope", "intercept", "r_squared"], fits)
    summary = {"runs": runs, "rows": len(rows)}
    write_json(out / "summary.json", summary)
    return summary


def run_rbf(cfg: dict, out: Path, seed: int) -> dict:
    params = cfg.get("params", {})
    kspec = params.get("kernel", {"kind": "gaussian"})
    kernel = rbf.RbfKernel(kspec["kind"], tuple(kspec.get("params", ())))
    lo, hi = _domain(cfg)
    F = target_function(cfg.get("target") or {"type": "builtin", "name": "bump"})
    f_c = GriddedFunction.from_callable(F, lo, hi, cfg.get("resolution"))
    n_list = params.get("n_list", [8, 16, 32, 64])
    p = params.get("p", 1.0)
    if p == "sup":
        raise ConfigError("rbf sweeps use a finite p")
    sigma = params.get("sigma")
    table = rbf.rbf_error_sweep(kernel, f_c, sigma, n_list, float(p))
    write_csv(out / "errors.csv", ["n", "error"], table)
    net = rbf.build_rbf_net(kernel, f_c, n_list[-1], sigma)
    write_json(out / "net.json", net.to_dict())
    summary = {"kernel_integral": rbf.kernel_integral(kernel, f_c.dim), "p": p,
               "errors": [e for _, e in table]}
    write_json(out / "summary.json", summary)
    return summary


def run_jackson(cfg: dict, out: Path, seed: int) -> dict:
    params = cfg.get("params", {})
    f = target_function(cfg.get("target") or {"type": "builtin", "name": "sin"})
    r = int(params.get("r", 2))
    n_list = params.get("n_list", [8, 16, 32, 64, 128])
    p = params.get("p", "sup")
    rows = jackson.jackson_rate_experiment(f, r, n_list, p)
    write_csv(out / "table.csv", ["n", "error", "omega", "ratio", "tail"],
              [[row.n, row.error, row.omega, row.ratio, row.tail] for row in rows])
    summary = {"r": r, "p": p, "ratio_spread": jackson.ratio_spread(rows),
               "max_tail": max(row.tail for row in rows)}
    if len(rows) >= 3 and all(row.error > 0 for row in rows):
        summary["fit"] = analysis.fit_rate([row.n for row in rows], [row.error for row in rows]).to_dict()
    write_json(out / "trigpoly.json", jackson.apply_smoothing_operator(f, n_list[-1], r).to_dict())
    write_json(out / "summary.json", summary)
    return summary


def run_check(cfg: dict, out: Path, seed: int) -> dict:
    params = cfg.get("params", {})
    which = _need(params, "inequality")
    p = params.get("p")
    reports = []
    if "data" in params:
        data = params["data"]
        if p is None or p == "sup":
            raise ConfigError("explicit inequality data needs a finite params.p")
        if which == "clarkson":
            reports.append(analysis.check_clarkson(data["f"], data["g"], float(p), data.get("weights")))
        elif which == "holder":
            reports.append(analysis.check_holder(data["f"], data["g"], float(p), data.get("weights")))
        else:
            reports.append(analysis.check_minkowski_integral(data["F"], float(p), data.get("wx"), data.get("wy")))
    else:
        rng = np.random.default_rng(seed)
        for _ in range(int(params.get("instances", 1000))):
            reports.append(analysis.random_inequality_instance(which, rng))
    violations = [i for i, rep in enumerate(reports) if not rep.holds]
    summary = {"inequality": which, "instances": len(reports), "violations": len(violations),
               "reports": [rep.to_dict() for rep in reports[:1000]]}
    write_json(out / "report.json", summary)
    if violations:
        first = reports[violations[0]]
        raise CertificateViolation(
            f"{which}: {len(violations)} violation(s); first lhs={first.lhs!r} rhs={first.rhs!r}",
            step=violations[0], error=first.lhs, bound=first.rhs)
    return {k: v for k, v in summary.items() if k != "reports"}


RUNNERS = {
    "construct": run_construct,
    "greedy": run_greedy,
    "rbf": run_rbf,
    "jackson": run_jackson,
    "sweep": run_sweep,
    "check": run_check,
}


def run(cfg: dict, out: Path, seed: int) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    return RUNNERS[cfg["command"]](cfg, out, seed)


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, CertificateViolation):
        return EXIT_CERTIFICATE
    if isinstance(exc, InputError):
        return EXIT_CONFIG
    return EXIT_NUMERICAL


def _report(exc: BaseException, code: int):
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    for attr in ("step", "error", "bound", "estimate"):
        val = getattr(exc, attr, None)
        if val is not None:
            payload["detail_" + attr] = _jsonable(val)
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="uapprox", description="Constructive approximation experiments.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--seed", type=int, help="unsigned 64-bit seed (overrides the config)")
    ap.add_argument("--set", action="append", default=[], metavar="K=V",
                    help="override a config entry by dotted path; VALUE is parsed as JSON")
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config, args.set, args.command)
        seed = args.seed if args.seed is not None else cfg.get("seed", 0)
        if not 0 <= seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        summary = run(cfg, resolve_out_dir(args.out, cfg), seed)
    except UapproxError as exc:
        code = _exit_code(exc)
        _report(exc, code)
        return code
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        _report(exc, EXIT_NUMERICAL)
        return EXIT_NUMERICAL
    sys.stdout.write(json.dumps(_jsonable(summary), sort_keys=True) + "\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
