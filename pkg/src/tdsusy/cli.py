"""Command-line interface: ``tdsusy verify | potential | transform | propagate``.

Exit codes: 0 success, 1 failed check or runtime failure, 2 usage or
configuration error.  Numbers are written with 17 significant digits.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import jsonschema
import numpy as np

from .darboux import DarbouxChain, wronskian_sign_changes
from .errors import (BoxTooSmallError, DomainError, SingularEvaluationError, TdsusyError)
from .numerics import REAL_LINE, Interval, SpaceTimeGrid, ZeroField, free_potential, harmonic_potential
from .pde import PropagationRun, propagate
from .potentials import PotentialFamily
from .seeds import SeedSpec
from .verify import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(Exception):
    pass


def fmt(v) -> str:
    return format(float(v), ".17g")


# ---------------------------------------------------------------------------
# config handling

_SEED = {
    "type": "object",
    "properties": {
        "family": {"enum": list(SeedSpec.FAMILIES) + ["zero"]},
        "lambda": {"type": "number"},
        "n": {"type": "integer", "minimum": 0},
        "omega": {"type": "number", "exclusiveMinimum": 0},
    },
    "required": ["family"],
    "additionalProperties": False,
}
_RANGE = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}

CHAIN_SCHEMA = {
    "type": "object",
    "properties": {
        "seed_potential": {
            "type": "object",
            "properties": {"type": {"enum": ["free", "oscillator"]},
                           "omega": {"type": "number", "exclusiveMinimum": 0}},
            "required": ["type"],
            "additionalProperties": False,
        },
        "chain": {"type": "array", "items": _SEED},
        "state": _SEED,
        "domain": {"type": "array", "items": {"type": ["number", "null"]}, "minItems": 2,
                   "maxItems": 2},
        "grid": {"type": "object", "properties": {"x": _RANGE, "t": _RANGE},
                 "required": ["x", "t"], "additionalProperties": False},
        "t_ref": {"type": "number"},
        "box": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "h": {"type": "number"},
        "tau": {"type": "number"},
        "t0": {"type": "number"},
        "t_final": {"type": "number"},
        "snapshots": {"type": "array", "items": {"type": "number"}},
    },
    "required": ["seed_potential"],
    "additionalProperties": False,
}


def load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        jsonschema.validate(cfg, CHAIN_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config: {exc.message}") from exc
    return cfg


def _seed_potential(cfg):
    sp = cfg["seed_potential"]
    if sp["type"] == "free":
        return free_potential(), None
    w = float(sp.get("omega", 1.0))
    return harmonic_potential(w), w


def build_seed(spec, cfg):
    pot, omega = _seed_potential(cfg)
    if spec["family"] == "zero":
        return ZeroField()
    free = spec["family"] == "free-lambda"
    if free != (omega is None):
        raise ConfigError(f"seed family {spec['family']} does not match seed potential {pot.label}")
    d = dict(spec)
    if omega is not None:
        if "omega" in d and d["omega"] != omega:
            raise ConfigError(f"seed omega {d['omega']} differs from the potential's {omega}")
        d["omega"] = omega
    if spec["family"] in ("free-lambda", "oscillator-nonstationary") and "lambda" not in d:
        raise ConfigError(f"{spec['family']} needs lambda")
    if spec["family"] in ("oscillator-eigen", "oscillator-growing") and "n" not in d:
        raise ConfigError(f"{spec['family']} needs n")
    return SeedSpec.from_dict(d).build()


def build_chain(cfg):
    """``None`` for an empty chain (identity transformation)."""
    seeds = [build_seed(s, cfg) for s in cfg.get("chain", [])]
    if any(isinstance(s, ZeroField) for s in seeds):
        raise ConfigError("the zero state cannot be a chain seed")
    if not seeds:
        return None
    dom = cfg.get("domain")
    domain = REAL_LINE if dom is None else Interval(
        -math.inf if dom[0] is None else dom[0], math.inf if dom[1] is None else dom[1])
    return DarbouxChain(seeds, t_ref=cfg.get("t_ref", 0.0), domain=domain)


def parse_grid(text):
    """``x=a:b:n,t=a:b:n`` -> SpaceTimeGrid."""
    parts = {}
    try:
        for item in text.split(","):
            key, rng = item.split("=")
            a, b, n = rng.split(":")
            parts[key.strip()] = (float(a), float(b), int(n))
        return SpaceTimeGrid.uniform(parts["x"], parts["t"], min_nodes=1)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad grid {text!r} (expected x=a:b:n,t=a:b:n): {exc}") from exc


def write_table(path, header, rows):
    lines = [",".join(header)] + [",".join(fmt(v) for v in r) for r in rows]
    data = "\n".join(lines) + "\n"
    if path in (None, "-"):
        sys.stdout.write(data)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(data)


def write_json(path, obj):
    data = json.dumps(obj, indent=1) + "\n"
    if path in (None, "-"):
        sys.stdout.write(data)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(data)


def _floats(a):
    return [float(fmt(v)) for v in np.ravel(a)]


# ---------------------------------------------------------------------------
# verbs


def cmd_verify(args):
    try:
        checks = run_suite(args.suite, args.tol)
    except KeyError:
        raise ConfigError(f"unknown suite {args.suite!r}")
    ok = all(c.passed for c in checks)
    report = {"suite": args.suite, "passed": ok, "checks": [c.to_dict() for c in checks]}
    write_json(args.out, report)
    for c in checks:
        if not c.passed:
            print(f"{c.line()}  [identity: {c.identity}]", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def _family_params(args):
    keys = ("k", "n", "m", "l", "lam", "omega")
    return {k: getattr(args, k) for k in keys if getattr(args, k) is not None}


def cmd_potential(args):
    grid = parse_grid(args.grid)
    fam = PotentialFamily(args.family, _family_params(args))
    if not np.all(fam.domain.contains_open(grid.x_nodes)):
        raise DomainError(f"{args.family} lives on {fam.domain}; the grid leaves it")
    X, T = grid.mesh()
    U = np.broadcast_to(fam(X, T, literal=args.literal), grid.shape)
    if not np.all(np.isfinite(U)):
        raise SingularEvaluationError("non-finite potential values on the grid")
    if args.format == "csv":
        rows = ((x, t, U[i, j]) for i, t in enumerate(grid.t_nodes) for j, x in enumerate(grid.x_nodes))
        write_table(args.out, ("x", "t", "value"), rows)
    else:
        write_json(args.out, {"family": args.family, "params": _family_params(args),
                              "literal": args.literal, "x": _floats(grid.x_nodes),
                              "t": _floats(grid.t_nodes), "value": [_floats(r) for r in U]})
    return EXIT_OK


def cmd_transform(args):
    cfg = load_config(args.config)
    if not cfg.get("chain"):
        raise ConfigError("transform needs a non-empty chain")
    if "grid" not in cfg:
        raise ConfigError("transform needs a grid")
    chain = build_chain(cfg)
    g = cfg["grid"]
    grid = SpaceTimeGrid.uniform(g["x"], g["t"], chain.domain, min_nodes=2)
    flips = wronskian_sign_changes(chain, grid)
    if flips:
        per_t = {}
        for _, t in flips:
            per_t[t] = per_t.get(t, 0) + 1
        shown = ", ".join(f"(x={x:.6g}, t={t:.6g})" for x, t in flips[:10])
        print(f"error: Wronskian changes sign {max(per_t.values())} time(s) per time slice; "
              f"poles near {shown}", file=sys.stderr)
        return EXIT_FAIL
    X, T = grid.mesh()
    U = np.broadcast_to(chain.transformed_potential()(X, T), grid.shape)
    W = np.abs(chain.wronskian_jet(X, T, 0)[0])
    if "state" in cfg:
        psi = build_seed(cfg["state"], cfg)
        phi = np.zeros(grid.shape, complex) if isinstance(psi, ZeroField) \
            else chain.transform(psi).value(X, T)
    else:
        phi = np.full(grid.shape, np.nan + 1j * np.nan)
    if args.format == "csv":
        rows = ((x, t, U[i, j], W[i, j], phi[i, j].real, phi[i, j].imag)
                for i, t in enumerate(grid.t_nodes) for j, x in enumerate(grid.x_nodes))
        write_table(args.out, ("x", "t", "U", "absW", "re", "im"), rows)
    else:
        write_json(args.out, {"chain": chain.label, "x": _floats(grid.x_nodes),
                              "t": _floats(grid.t_nodes), "U": [_floats(r) for r in U],
                              "absW": [_floats(r) for r in W],
                              "re": [_floats(r) for r in phi.real],
                              "im": [_floats(r) for r in phi.imag]})
    return EXIT_OK


def cmd_propagate(args):
    cfg = load_config(args.config)
    for key in ("box", "h", "tau", "t_final"):
        if getattr(args, key, None) is not None:
            cfg[key] = getattr(args, key)
    missing = [k for k in ("box", "h", "tau", "t_final", "state") if k not in cfg]
    if missing:
        raise ConfigError(f"propagate needs {', '.join(missing)}")
    if cfg["tau"] <= 0 or cfg["h"] <= 0:
        raise ConfigError("tau and h must be positive")
    chain = build_chain(cfg)
    psi = build_seed(cfg["state"], cfg)
    if chain is None:
        pot = _seed_potential(cfg)[0]
        state = psi
    else:
        pot = chain.transformed_potential()
        state = psi if isinstance(psi, ZeroField) else chain.transform(psi)
    t0 = cfg.get("t0", 0.0)
    snaps = tuple(cfg.get("snapshots", [cfg["t_final"]]))
    run = PropagationRun(lambda x, t: np.real(pot(x, t)), tuple(cfg["box"]), cfg["h"], cfg["tau"],
                         cfg["t_final"], lambda x: state.value(x, t0), t0=t0, snapshots=snaps)
    res = propagate(run)
    x = res.x
    rows, errors = [], {}
    for ts, vals in sorted(res.snapshots.items()):
        exact = state.value(x, ts)
        errors[fmt(ts)] = float(np.sqrt((x[1] - x[0]) * np.sum(np.abs(vals - exact) ** 2)))
        rows += [(xv, ts, v.real, v.imag, e.real, e.imag) for xv, v, e in zip(x, vals, exact)]
    diag = {"steps": res.steps, "norm_drift": res.norm_drift, "boundary_max": res.boundary_max,
            "l2_error": errors, "norm_log": [[t, d] for t, d in res.norm_log]}
    if args.format == "csv":
        write_table(args.out, ("x", "t", "re", "im", "exact_re", "exact_im"), rows)
        print(json.dumps(diag), file=sys.stderr if args.out in (None, "-") else sys.stdout)
    else:
        write_json(args.out, {"diagnostics": diag, "x": _floats(x),
                              "snapshots": {k: {"re": _floats(v.real), "im": _floats(v.imag)}
                                            for k, v in ((fmt(t), v) for t, v in
                                                         sorted(res.snapshots.items()))}})
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="tdsusy", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", default="all", choices=["all"] + list(SUITES))
    v.add_argument("--tol", type=float, help="replace every upper-bound tolerance")
    v.add_argument("--out", help="JSON report path (default stdout)")
    v.set_defaults(func=cmd_verify)

    q = sub.add_parser("potential", help="evaluate a closed-form family on a grid")
    q.add_argument("--family", required=True, choices=PotentialFamily.FAMILIES)
    for key, typ in (("k", int), ("n", int), ("m", int), ("l", int), ("lam", float),
                     ("omega", float)):
        q.add_argument(f"--{key}", type=typ)
    q.add_argument("--grid", required=True)
    q.add_argument("--literal", action="store_true", help="evaluate the literal variant")
    q.add_argument("--out")
    q.add_argument("--format", choices=("csv", "json"), default="csv")
    q.set_defaults(func=cmd_potential)

    t = sub.add_parser("transform", help="export U_N, |W| and L psi for a chain config")
    t.add_argument("--config", required=True)
    t.add_argument("--out")
    t.add_argument("--format", choices=("csv", "json"), default="csv")
    t.set_defaults(func=cmd_transform)

    r = sub.add_parser("propagate", help="Crank-Nicolson run for a chain config")
    r.add_argument("--config", required=True)
    r.add_argument("--h", type=float)
    r.add_argument("--tau", type=float)
    r.add_argument("--t-final", dest="t_final", type=float)
    r.add_argument("--box", type=float, nargs=2)
    r.add_argument("--out")
    r.add_argument("--format", choices=("csv", "json"), default="csv")
    r.set_defaults(func=cmd_propagate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BoxTooSmallError as exc:
        print(f"error: box too small: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except SingularEvaluationError as exc:
        locs = getattr(exc, "locations", None) or []
        extra = "; ".join(f"(x={x:.6g}, t={t:.6g})" for x, t in list(locs)[:10])
        print(f"error: {exc}" + (f" at {extra}" if extra else ""), file=sys.stderr)
        return EXIT_FAIL
    except TdsusyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
