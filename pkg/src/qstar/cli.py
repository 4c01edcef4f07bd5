"""Batch front-end: ``qstar run|sweep CONFIG [--out DIR] [--seed N] [--jobs K]``.

A config is ``{"kind": ..., "payload": {...}, "seed": N, "output": prefix}``.
Reports are written as sorted-key JSON (plus a CSV table for lattice runs)
into the output directory: ``--out``, else ``$QSTAR_OUT``, else the
directory of the ``output`` prefix, else the working directory.

Exit codes: 0 pass, 2 fail, 3 partial, 1 usage or configuration error.
"""

import argparse
import csv
import io
import json
import math
import os
from pathlib import Path
import sys

import jsonschema
from jsonschema.exceptions import best_match
import numpy as np

from .commutant import check_commutant_equality, decompose_direct_sum, weak_commutant
from .derivations import estimate_bound_constant, inner_derivation, solve_spatial
from .errors import ConfigError, QStarError, SingularStateError
from .gns import gns_construct, gns_residuals
from .lattice import LatticeSystem, modification_demo
from .modifications import build_intertwiner, modifier_deviation, rank_modifier, solve_modifier
from .serialize import (
    algebra_from_spec,
    dump_gns,
    functional_from_spec,
    load_algebra,
    matrix_from_json,
    to_json_complex,
)
from .sweeps import SUITES, run_sweep

OUTPUT_ENV = "QSTAR_OUT"
EXIT_CODES = {"pass": 0, "fail": 2, "partial": 3}
EXIT_CONFIG = 1

_MATRIX = {"type": "array", "items": {"type": "array"}, "minItems": 1}
_ALGEBRA = {"oneOf": [{"type": "string"}, {"type": "object", "required": ["basis"]}]}
_STATE = {
    "type": "object",
    "oneOf": [{"required": ["density"]}, {"required": ["values"]}],
    "properties": {"density": _MATRIX, "values": {"type": "array"}},
}
_SITES = {"type": "array", "items": {"type": "integer", "minimum": 0}, "uniqueItems": True}

PAYLOAD_SCHEMAS = {
    "gns": {
        "type": "object",
        "required": ["algebra"],
        "properties": {"algebra": _ALGEBRA, "state": _STATE},
    },
    "modify": {
        "type": "object",
        "required": ["algebra", "state"],
        "anyOf": [{"required": ["b"]}, {"required": ["target"]}],
        "properties": {"algebra": _ALGEBRA, "state": _STATE, "b": _MATRIX, "target": _STATE},
    },
    "spatial": {
        "type": "object",
        "required": ["algebra", "state", "h"],
        "properties": {
            "algebra": _ALGEBRA,
            "state": _STATE,
            "h": _MATRIX,
            "restarts": {"type": "integer", "minimum": 0},
        },
    },
    "commutant": {
        "type": "object",
        "required": ["algebra", "state"],
        "properties": {
            "algebra": _ALGEBRA,
            "state": _STATE,
            "generators": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        },
    },
    "decompose": {
        "type": "object",
        "required": ["algebra", "state", "generators"],
        "properties": {
            "algebra": _ALGEBRA,
            "state": _STATE,
            "generators": {"type": "array", "items": _MATRIX, "minItems": 1},
        },
    },
    "lattice-demo": {
        "type": "object",
        "required": ["n_sites", "directions", "b_support", "b_components", "epsilon"],
        "properties": {
            "n_sites": {"type": "integer", "minimum": 1, "maximum": 6},
            "directions": {
                "type": "array",
                "items": {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3},
            },
            "b_support": _SITES,
            "b_components": {"type": "array", "items": _MATRIX},
            "lambda": _SITES,
            "epsilon": {"type": "number", "exclusiveMinimum": 0},
            "seed": {"type": "integer", "minimum": 0},
            "samples": {"type": "integer", "minimum": 1},
        },
    },
    "sweep": {
        "type": "object",
        "required": ["suite", "trials"],
        "properties": {
            "suite": {"enum": sorted(SUITES)},
            "trials": {"type": "integer", "minimum": 0},
            "algebras": {"type": "array", "items": {"type": "string"}},
            "params": {"type": "object"},
        },
    },
}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["kind", "payload", "seed"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": sorted(PAYLOAD_SCHEMAS)},
        "payload": {"type": "object"},
        "seed": {"type": "integer", "minimum": 0},
        "output": {"type": "string"},
    },
    "allOf": [
        {"if": {"properties": {"kind": {"const": k}}}, "then": {"properties": {"payload": s}}}
        for k, s in PAYLOAD_SCHEMAS.items()
    ],
}


def _pointer(path):
    return "/" + "/".join(str(p) for p in path) if path else ""


def load_config(path):
    """Parse and validate a config file.

    Raises:
        ConfigError: unreadable file, malformed JSON, or schema violation
            (the pointer names the offending field).
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", "") from exc
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}", "") from exc
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    error = best_match(validator.iter_errors(config))
    if error is not None:
        raise ConfigError(error.message, _pointer(error.absolute_path))
    return config


def _clean(value):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def _finite_metrics(metrics):
    out = {}
    for k, v in metrics.items():
        if isinstance(v, (bool, np.bool_)):
            out[k] = float(bool(v))
        elif isinstance(v, (int, float, np.integer, np.floating)) and math.isfinite(float(v)):
            out[k] = float(v)
    return out


def _setup(payload):
    algebra_spec = payload["algebra"]
    if isinstance(algebra_spec, dict):
        algebra, omega = load_algebra(algebra_spec)
    else:
        algebra, omega = algebra_from_spec(algebra_spec), None
    if "state" in payload:
        omega = functional_from_spec(algebra, payload["state"])
    if omega is None:
        raise ConfigError("a state is required", "/payload/state")
    return algebra, omega


def run_gns(payload, seed, jobs):
    A, omega = _setup(payload)
    g = gns_construct(A, omega)
    res = gns_residuals(g)
    ok = all(res[k] < 1e-9 for k in ("reconstruction", "inner_product", "module", "star"))
    ok = ok and res["cyclic_rank"] == res["hilbert_dim"]
    return "pass" if ok else "fail", res, {"gns": dump_gns(g)}, None


def run_modify(payload, seed, jobs):
    A, omega = _setup(payload)
    metrics, details = {}, {}
    status = "pass"
    if "b" in payload:
        b = A.from_matrix(matrix_from_json(payload["b"], "b"))
        tw = build_intertwiner(A, omega, b)
        metrics.update(forward_residual=tw.residual, subspace_dim=tw.subspace.dim,
                       unitarity_defect=tw.unitarity_defect)
    if "target" in payload:
        target = functional_from_spec(A, payload["target"])
        try:
            bb, method = solve_modifier(A, omega, target), "closed-form"
        except SingularStateError:
            bb, method = rank_modifier(A, omega, target), "rank-closed-form"
        details["converse_method"] = method if bb is not None else "none"
        if bb is None:
            status = "partial"
            details["note"] = "target support exceeds the reference support; no modifier in closed form"
        else:
            metrics["converse_residual"] = modifier_deviation(A, omega, bb, target)
            details["modifier"] = to_json_complex(bb.matrix)
            if metrics["converse_residual"] >= 1e-9:
                status = "fail"
    return status, metrics, details, None


def run_spatial(payload, seed, jobs):
    A, omega = _setup(payload)
    delta = inner_derivation(A, matrix_from_json(payload["h"], "h"))
    g = gns_construct(A, omega)
    H = solve_spatial(g, delta)
    bound = estimate_bound_constant(A, omega, delta, restarts=payload.get("restarts", 8), seed=seed,
                                    g=g, hamiltonian=H)
    report = {"spatial": H.spatial, "residual": H.residual, "c_lower": bound.c_lower,
              "c_upper": bound.c_upper, "kappa": bound.kappa}
    details = {**report, "hamiltonian": to_json_complex(H.matrix), "gauge": H.gauge}
    if H.conditioning_warning:
        details["conditioning_warning"] = H.conditioning_warning
    ok = H.spatial and bound.c_lower <= bound.c_upper + 1e-9
    return "pass" if ok else "fail", report, details, None


def run_commutant(payload, seed, jobs):
    A, omega = _setup(payload)
    g = gns_construct(A, omega)
    comm = weak_commutant(g.rep)
    metrics = {"dimension": comm.dimension, "is_star_closed": comm.is_star_closed,
               "is_algebra_closed": comm.is_algebra_closed, "commutation_residual": comm.commutation_residual}
    ok = comm.is_star_closed and comm.is_algebra_closed
    if "generators" in payload:
        idx = payload["generators"]
        if max(idx) >= A.dim:
            raise ConfigError(f"generator index {max(idx)} out of range", "/payload/generators")
        eq = check_commutant_equality(g.rep, g.rep[idx])
        metrics.update(commutants_equal=eq.equal, generating_commutant_dim=eq.generating_dim,
                       equality_residual=max(eq.residual_full_in_generating, eq.residual_generating_in_full))
        ok = ok and eq.equal
    return "pass" if ok else "fail", metrics, {}, None


def run_decompose(payload, seed, jobs):
    A, omega = _setup(payload)
    gens = [A.from_matrix(matrix_from_json(m, "generator")) for m in payload["generators"]]
    rep = decompose_direct_sum(A, omega, gens)
    metrics = {k: rep[k] for k in ("orthogonality_max", "completeness_residual", "total_equivalence_residual")}
    metrics["blocks"] = len(rep["blocks"])
    return "pass" if rep["status"] == "complete" else "partial", metrics, rep, None


def run_lattice(payload, seed, jobs):
    n = payload["n_sites"]
    system = LatticeSystem(n)
    if len(payload["directions"]) != n:
        raise ConfigError(f"need {n} directions", "/payload/directions")
    gamma = payload["b_support"]
    if len(payload["b_components"]) != len(gamma):
        raise ConfigError("one component per site of b_support is required", "/payload/b_components")
    comps = {}
    for k, (p, m) in enumerate(zip(gamma, payload["b_components"])):
        mat = matrix_from_json(m, "b component")
        if mat.shape != (2, 2):
            raise ConfigError("b components must be 2x2", f"/payload/b_components/{k}")
        comps[p] = mat
    if any(p >= n for p in gamma):
        raise ConfigError("b_support leaves the chain", "/payload/b_support")
    lam = payload.get("lambda", [p for p in range(n) if p not in gamma])
    dirs = np.asarray(payload["directions"], dtype=float)
    for k, v in enumerate(dirs):
        if abs(np.linalg.norm(v) - 1.0) > 1e-10:
            raise ConfigError("direction must be a unit vector", f"/payload/directions/{k}")
    rep = modification_demo(system, lam, gamma, seed=payload.get("seed", seed), directions=dirs,
                            samples=payload.get("samples", 50), epsilon=payload["epsilon"], b_components=comps)
    rows = rep.pop("_rows")
    two = rep["two_lm"]
    region_ok = two["success"] and set(two["region"]) <= set(gamma)
    ok = rep["max_equality_deviation"] < 1e-12 and region_ok and rep["two_lm_symmetric"]
    metrics = {"max_equality_deviation": rep["max_equality_deviation"],
               "two_lm_region_size": len(two["region"]) if two["success"] else -1,
               "two_lm_estimate": two["estimate"] if two["success"] else two["best_estimate"],
               "two_lm_symmetric": rep["two_lm_symmetric"]}
    if "one_lm" in rep:
        metrics["one_lm_established"] = rep["one_lm"]["established"]
    return "pass" if ok else "fail", metrics, rep, rows


def run_sweep_kind(payload, seed, jobs):
    rep = run_sweep(payload["suite"], payload["trials"], seed=seed, algebras=payload.get("algebras"),
                    jobs=jobs, params=payload.get("params"))
    return rep["status"], rep["metrics"], rep, None


RUNNERS = {
    "gns": run_gns,
    "modify": run_modify,
    "spatial": run_spatial,
    "commutant": run_commutant,
    "decompose": run_decompose,
    "lattice-demo": run_lattice,
    "sweep": run_sweep_kind,
}


def execute(config, seed=None, jobs=1):
    """Run a validated config; returns the report dict and CSV rows (or None)."""
    seed = config["seed"] if seed is None else seed
    status, metrics, details, rows = RUNNERS[config["kind"]](config["payload"], seed, jobs)
    report = {
        "kind": config["kind"],
        "seed": seed,
        "status": status,
        "metrics": _finite_metrics(metrics),
        "details": _clean(details),
    }
    return report, rows


def output_paths(config, out_dir=None, config_path=None):
    prefix = config.get("output") or (Path(config_path).stem if config_path else config["kind"])
    directory = out_dir or os.environ.get(OUTPUT_ENV) or (str(Path(prefix).parent) if Path(prefix).parent != Path(".") else ".")
    name = Path(prefix).name
    return Path(directory) / f"{name}.json", Path(directory) / f"{name}.csv"


def render_report(report):
    """Serialized report: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def render_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["region", "estimate", "pass"])
    for region, est, ok in rows:
        writer.writerow([region, repr(float(est)), str(bool(ok)).lower()])
    return buf.getvalue()


def format_table(report):
    lines = [f"kind    {report['kind']}", f"status  {report['status']}", f"seed    {report['seed']}"]
    width = max((len(k) for k in report["metrics"]), default=0)
    lines += [f"{k.ljust(width)}  {v:.6g}" for k, v in sorted(report["metrics"].items())]
    return "\n".join(lines)


def build_parser():
    parser = argparse.ArgumentParser(prog="qstar", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "sweep"):
        p = sub.add_parser(name, help=f"{name} an experiment config")
        p.add_argument("config", help="path to the JSON config")
        p.add_argument("--out", help=f"output directory (overrides ${OUTPUT_ENV})")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else 0
    try:
        config = load_config(args.config)
        if args.command == "sweep" and config["kind"] != "sweep":
            raise ConfigError("the sweep command needs kind 'sweep'", "/kind")
        if args.seed is not None and args.seed < 0:
            raise ConfigError("seed must be non-negative", "--seed")
        if args.jobs < 1:
            raise ConfigError("jobs must be at least 1", "--jobs")
        report, rows = execute(config, seed=args.seed, jobs=args.jobs)
    except ConfigError as exc:
        print(f"config error at {exc.pointer or '<root>'}: {exc.message}", file=sys.stderr)
        return EXIT_CONFIG
    except QStarError as exc:
        config_kind = config["kind"]
        report = {"kind": config_kind, "seed": config["seed"] if args.seed is None else args.seed,
                  "status": "fail", "metrics": {}, "details": {"error": type(exc).__name__, "message": str(exc)}}
        rows = None
    json_path, csv_path = output_paths(config, args.out, args.config)
    json_path.parent.mkdir(parents=True, exist_ok=True)
    artifacts = [json_path.name]
    if rows is not None:
        csv_path.write_text(render_csv(rows))
        artifacts.append(csv_path.name)
    report["artifacts"] = artifacts
    json_path.write_text(render_report(report))
    print(format_table(report))
    for a in artifacts:
        print(f"wrote   {json_path.parent / a}")
    return EXIT_CODES[report["status"]]


if __name__ == "__main__":
    sys.exit(main())
