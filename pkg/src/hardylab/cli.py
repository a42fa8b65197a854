"""Command line front end.

    hardylab constants [--xi N,p ...]
    hardylab verify --descriptor run.json [--out DIR] [--tolerance T] [--threads K]
    hardylab bounds --descriptor bounds.json [--out DIR] [--tolerance S] [--threads K]
    hardylab sweep  --descriptor sweep.json [--out DIR] [--tolerance T] [--threads K]

Exit codes: 0 success, 1 a residual or ordering check failed, 2 malformed
descriptor, 3 a domain, pair or test function precondition failed.
"""

import argparse
import copy
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass

from .bessel import j0_first_zero, lamb_constant, pair_from_dict
from .errors import BoundViolation, HardyLabError, PreconditionError, SchemaError
from .geometry import domain_from_dict
from .hardy_verify import (
    IdentityReport,
    quadrature_from_dict,
    set_threads,
    verify_1d,
    verify_avk_wirths,
    verify_conformal_bookkeeping,
    verify_domain_directional,
    verify_domain_full,
    verify_mean_identity,
)
from .mean_distance import xi
from .quadrature import sphere_quadrature
from .spectral import BOUND_SLACK, BoundReport, bound_report
from .testfunctions import test_function_from_dict

EXIT_OK, EXIT_FAIL, EXIT_SCHEMA, EXIT_PRECONDITION = 0, 1, 2, 3

IDENTITIES = (
    "thm-3.1",
    "thm-3.3-full",
    "thm-3.3-directional",
    "cor-avk-wirths",
    "thm-3.8-mean",
    "conformal",
)

_RUN_KEYS = {"identity", "domain", "pair", "test_function", "quadrature", "tolerance"}
_BOUNDS_KEYS = {"domain", "domains", "h", "sphere_nodes", "grid"}
_SWEEP_KEYS = {"base", "parameter", "values"}
_SWEEP_ALIASES = {
    "p": "pair.p",
    "lambda": "pair.lambda",
    "Lambda": "pair.Lambda",
    "R": "pair.R",
    "cells": "quadrature.cells",
    "resolution": "quadrature.cells",
    "sphere_nodes": "quadrature.sphere_nodes",
}

CSV_COLUMNS_HELP = (
    "CSV columns\n"
    "  verify: " + ",".join(IdentityReport.CSV_HEADER) + "\n"
    "  bounds: " + ",".join(BoundReport.CSV_HEADER) + "\n"
    "  sweep:  parameter,value," + ",".join(IdentityReport.CSV_HEADER) + "\n"
    "Floats are printed with 17 significant digits."
)


# ----------------------------------------------------------------------------
# formatting


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def _emit(out_dir, stem, header, rows, payload):
    text = _csv_text(header, rows)
    sys.stdout.write(text)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, stem + ".csv"), "w") as fh:
            fh.write(text)
        with open(os.path.join(out_dir, stem + ".json"), "w") as fh:
            json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
            fh.write("\n")


# ----------------------------------------------------------------------------
# descriptors


@dataclass(frozen=True)
class RunDescriptor:
    """A validated verify descriptor."""

    identity: str
    domain: object
    pair: object
    test_function: object
    quadrature: object
    tolerance: float = None
    raw: dict = None


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON in {path}: {exc}") from exc
    except OSError as exc:
        raise SchemaError(f"cannot read descriptor {path}: {exc}") from exc


def _check_keys(obj, allowed, what):
    if not isinstance(obj, dict):
        raise SchemaError(f"{what} must be a JSON object")
    unknown = set(obj) - allowed
    if unknown:
        raise SchemaError(f"unknown {what} field(s): {sorted(unknown)}")


def parse_run_descriptor(obj):
    """Validate a verify descriptor and build its objects.

    Schema problems raise SchemaError. Objects that parse but violate a
    mathematical precondition raise the corresponding PreconditionError.
    """
    _check_keys(obj, _RUN_KEYS, "descriptor")
    identity = obj.get("identity")
    if identity not in IDENTITIES:
        raise SchemaError(f"unknown identity {identity!r}; expected one of {IDENTITIES}")
    for key in ("domain", "test_function"):
        if key not in obj:
            raise SchemaError(f"descriptor needs {key!r}")
    tol = obj.get("tolerance")
    if tol is not None and (isinstance(tol, bool) or not isinstance(tol, (int, float)) or tol <= 0):
        raise SchemaError("tolerance must be a positive number")
    domain = domain_from_dict(obj["domain"])
    u = test_function_from_dict(obj["test_function"])
    q = quadrature_from_dict(obj.get("quadrature"))
    pair = None
    if identity in ("thm-3.1", "thm-3.3-full", "thm-3.3-directional", "thm-3.8-mean"):
        if "pair" not in obj:
            raise SchemaError(f"{identity} needs a pair")
        pair = pair_from_dict(obj["pair"], default_R=domain.inradius())
    elif identity == "cor-avk-wirths" and obj.get("pair") is not None:
        p = obj["pair"]
        if not isinstance(p, dict) or set(p) - {"family", "lambda"} or p.get("family", "lamb") != "lamb":
            raise SchemaError("cor-avk-wirths takes at most {\"family\": \"lamb\", \"lambda\": x}")
        pair = p
    elif obj.get("pair") is not None and identity == "conformal":
        raise SchemaError("the conformal check takes no pair")
    return RunDescriptor(identity, domain, pair, u, q, None if tol is None else float(tol), obj)


def run_identity(desc, tolerance=None):
    """Run the verifier named by a RunDescriptor; returns an IdentityReport."""
    tol = tolerance if tolerance is not None else desc.tolerance
    ident, dom, pair, u, q = desc.identity, desc.domain, desc.pair, desc.test_function, desc.quadrature
    if ident == "thm-3.1":
        if dom.dim != 1:
            raise SchemaError("thm-3.1 runs on an interval domain")
        return verify_1d(pair, dom, u, q, tol)
    if ident == "thm-3.3-full":
        return verify_domain_full(pair, dom, u, q, tol)
    if ident == "thm-3.3-directional":
        return verify_domain_directional(pair, dom, u, q, tol)
    if ident == "cor-avk-wirths":
        lam = float((pair or {}).get("lambda", 0.0))
        return verify_avk_wirths(lam, dom, u, q, tol)
    if ident == "thm-3.8-mean":
        return verify_mean_identity(pair, dom, u, quadrature=q, tolerance=tol)
    return verify_conformal_bookkeeping(dom, u, q, tol)


def _set_path(obj, path, value):
    keys = path.split(".")
    cur = obj
    for k in keys[:-1]:
        if cur.get(k) is None:
            cur[k] = {}
        cur = cur[k]
        if not isinstance(cur, dict):
            raise SchemaError(f"sweep path {path!r} does not name a field")
    cur[keys[-1]] = value


# ----------------------------------------------------------------------------
# subcommands


def cmd_constants(args):
    pairs = args.xi or [(1, 2.0), (2, 2.0), (3, 2.0), (2, 1.5), (2, 3.0), (3, 3.0)]
    rows = [("lambda0", "", "", lamb_constant()), ("z0", "", "", j0_first_zero())]
    for N, p in pairs:
        rows.append(("xi", N, p, xi(N, p)))
    sys.stdout.write(_csv_text(("name", "N", "p", "value"), rows))
    return EXIT_OK


def cmd_verify(args):
    desc = parse_run_descriptor(_load_json(args.descriptor))
    rep = run_identity(desc, args.tolerance)
    _emit(args.out, "report", IdentityReport.CSV_HEADER, [rep.csv_row()], rep.to_dict())
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_bounds(args):
    obj = _load_json(args.descriptor)
    _check_keys(obj, _BOUNDS_KEYS, "bounds descriptor")
    if ("domain" in obj) == ("domains" in obj):
        raise SchemaError("bounds descriptor needs exactly one of 'domain' or 'domains'")
    specs = [obj["domain"]] if "domain" in obj else obj["domains"]
    if not isinstance(specs, list) or not specs:
        raise SchemaError("'domains' must be a non-empty list")
    for key in ("h", "sphere_nodes", "grid"):
        v = obj.get(key)
        if v is not None and (isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0):
            raise SchemaError(f"{key} must be a positive number")
    domains = [domain_from_dict(s) for s in specs]
    slack = BOUND_SLACK if args.tolerance is None else args.tolerance
    reports, status = [], EXIT_OK
    for dom in domains:
        sq = sphere_quadrature(dom.dim, obj.get("sphere_nodes")) if obj.get("sphere_nodes") else None
        try:
            rep = bound_report(dom, h=obj.get("h"), sq=sq, grid=int(obj.get("grid", 64)), slack=slack)
        except BoundViolation:
            rep = bound_report(dom, h=obj.get("h"), sq=sq, grid=int(obj.get("grid", 64)), slack=slack,
                               check=False)
            status = EXIT_FAIL
        reports.append(rep)
    payload = [r.to_dict() for r in reports]
    _emit(args.out, "bounds", BoundReport.CSV_HEADER, [r.csv_row() for r in reports],
          payload[0] if len(payload) == 1 else payload)
    return status


def cmd_sweep(args):
    obj = _load_json(args.descriptor)
    _check_keys(obj, _SWEEP_KEYS, "sweep descriptor")
    for key in _SWEEP_KEYS:
        if key not in obj:
            raise SchemaError(f"sweep descriptor needs {key!r}")
    values = obj["values"]
    if not isinstance(values, list) or not values:
        raise SchemaError("sweep 'values' must be a non-empty list")
    param = obj["parameter"]
    if not isinstance(param, str):
        raise SchemaError("sweep 'parameter' must be a string")
    path = _SWEEP_ALIASES.get(param, param)
    base = obj["base"]
    _check_keys(base, _RUN_KEYS, "sweep base")
    descs = []
    for v in values:
        run = copy.deepcopy(base)
        _set_path(run, path, v)
        descs.append(parse_run_descriptor(run))
    rows, payload, status = [], [], EXIT_OK
    for v, desc in zip(values, descs):
        rep = run_identity(desc, args.tolerance)
        rows.append((param, v) + rep.csv_row())
        payload.append({"parameter": param, "value": v, "report": rep.to_dict()})
        if not rep.passed:
            status = EXIT_FAIL
    _emit(args.out, "sweep", ("parameter", "value") + IdentityReport.CSV_HEADER, rows, payload)
    return status


# ----------------------------------------------------------------------------
# entry point


def _xi_arg(text):
    try:
        n, p = text.split(",")
        return int(n), float(p)
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected N,p") from exc


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hardylab",
        description="Verify Hardy identities and spectral lower bounds on catalog domains.",
        epilog=CSV_COLUMNS_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    c = sub.add_parser("constants", help="print lambda0, z0 and Xi(N, p)")
    c.add_argument("--xi", type=_xi_arg, action="append", metavar="N,p", help="add an (N, p) pair")
    for name, help_ in (
        ("verify", "run one identity from a descriptor"),
        ("bounds", "spectral bounds for one or more domains"),
        ("sweep", "residual against one descriptor parameter"),
    ):
        s = sub.add_parser(name, help=help_, epilog=CSV_COLUMNS_HELP,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        s.add_argument("--descriptor", required=True, help="path to the JSON descriptor")
        s.add_argument("--out", help="directory for the JSON and CSV reports")
        s.add_argument("--threads", type=int, help="worker threads (default: HARDYLAB_THREADS or 1)")
        s.add_argument("--tolerance", type=float,
                       help="override the descriptor tolerance (bounds: relative slack on lambda1)")
    return parser


_COMMANDS = {"constants": cmd_constants, "verify": cmd_verify, "bounds": cmd_bounds, "sweep": cmd_sweep}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_SCHEMA if exc.code else EXIT_OK
    if getattr(args, "threads", None) is not None:
        set_threads(args.threads)
    try:
        return _COMMANDS[args.command](args)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except PreconditionError as exc:
        print(f"precondition failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except HardyLabError as exc:
        print(f"check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
