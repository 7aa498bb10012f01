"""Command-line front end.

Every subcommand reads one JSON document (``random`` reads none), writes a
report to standard output and diagnostics to standard error.  Exit codes:
0 on success, 1 on malformed input, 2 when a numerical contract is
violated (the residual is printed).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import __version__
from .cascade import (build_cascade, cascade_transfer_residual, recover_gamma,
                      represented_cascade)
from .completeness import ac_check
from .errors import ContractionError, DepthError, InputError, ValidationError
from .fmsystem import is_observable, observability_gramian, transfer_coefficients
from .generate import random_instance
from .linalg import is_column_contraction, min_eig, opnorm
from .markov import scattering_ac, stationarity_residual
from .process import dilate, isometry_residual, wold_wandering
from .serialize import (SCHEMA_VERSION, cascade_spec_from_json, chain_from_json, detect_kind,
                        dumps, flatten, process_to_json, system_from_json, system_to_json)

__all__ = ["main", "build_parser", "run"]

DEFAULT_DEPTH = 5
MARKOV_DEPTH = 2


def build_parser():
    p = argparse.ArgumentParser(prog="fmprocess",
                                description="Fornasini-Marchesini systems and weak Markov processes")
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--depth", type=int, default=None,
                        help=f"word depth N (default {DEFAULT_DEPTH}, markov {MARKOV_DEPTH})")
    common.add_argument("--tol", type=float, default=1e-9, help="convergence and rank tolerance")
    common.add_argument("--maxiter", type=int, default=500)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=["json", "csv"], default="json")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in [("validate", "check the invariants of a system, cascade or chain"),
                       ("transfer", "transfer coefficients T^alpha for |alpha| <= depth"),
                       ("observe", "observability Gramian and verdict"),
                       ("dilate", "truncated row-isometric dilation of a system"),
                       ("cascade", "assemble a cascade and verify it"),
                       ("ac", "asymptotic completeness criteria for a cascade"),
                       ("markov", "scattering analysis of a stationary Markov chain")]:
        sp_ = sub.add_parser(name, parents=[common], help=text)
        sp_.add_argument("input", help="JSON input file, '-' for standard input")
    r = sub.add_parser("random", parents=[common], help="seeded random instance")
    r.add_argument("kind", choices=["system", "cascade", "chain"])
    r.add_argument("--d", type=int, default=2)
    r.add_argument("--dim-x", type=int, default=2)
    r.add_argument("--dim-u", type=int, default=1)
    r.add_argument("--dim-y", type=int, default=1)
    r.add_argument("--dim-g", type=int, default=1)
    r.add_argument("--dim-k", type=int, default=2)
    r.add_argument("--gamma", choices=["contraction", "isometry", "zero"], default="contraction")
    r.add_argument("--n", type=int, default=2)
    r.add_argument("--m", type=int, default=2)
    return p


def _load(path):
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _expect(obj, kind):
    found = detect_kind(obj)
    if found != kind:
        raise InputError(f"expected a {kind} document, got {found}")


def _contractive(sys_, name="A"):
    ok, Dm = is_column_contraction(sys_.A)
    if not ok:
        raise ContractionError(f"{name} is not a column contraction",
                               -float(np.linalg.eigvalsh(Dm)[0]))


def _cascade_from(obj, depth):
    G, K, gamma, N = cascade_spec_from_json(obj)
    N = depth if depth is not None else (N or DEFAULT_DEPTH)
    _contractive(G, "G.A")
    _contractive(K, "K.A")
    PG, PK = dilate(G.A, N), dilate(K.A, N)
    shape = (PG.dim_E, wold_wandering(PK, local=True).rank)
    if gamma.size == 0:
        gamma = np.zeros(shape, dtype=complex)
    if gamma.shape != shape:
        from .errors import DimensionError
        raise DimensionError(f"gamma must be {shape[0]}x{shape[1]}, got "
                             f"{gamma.shape[0]}x{gamma.shape[1]}")
    return build_cascade(PG, PK, gamma, N), N


def _validate(obj, args):
    kind = detect_kind(obj)
    report = {"kind": kind}
    if kind == "system":
        s = system_from_json(obj)
        _contractive(s)
        report.update(d=s.d, dim_x=s.dim_x, dim_u=s.dim_u, dim_y=s.dim_y,
                      column_contraction=True)
    elif kind == "cascade":
        casc, N = _cascade_from(obj, args.depth)
        report.update(depth=N, gamma_norm=opnorm(casc.gamma), assembly=casc.residuals)
    elif kind == "chain":
        spec = chain_from_json(obj)
        r = stationarity_residual(spec)
        if r > 1e-9:
            from .errors import StationarityError
            raise StationarityError("phi is not stationary", r)
        report.update(n=spec.n, m=spec.m, stationarity_residual=r)
    else:
        raise InputError(f"cannot validate a {kind} document")
    report["valid"] = True
    return report


def _transfer(obj, args):
    _expect(obj, "system")
    s = system_from_json(obj)
    N = args.depth or DEFAULT_DEPTH
    T = transfer_coefficients(s, N)
    return {"kind": "transfer", "d": s.d, "depth": N,
            "coefficients": [{"word": w.to_json(), "matrix": M} for w, M in T.items()]}


def _observe(obj, args):
    _expect(obj, "system")
    s = system_from_json(obj)
    N = args.depth or DEFAULT_DEPTH
    W = observability_gramian(s, depth=N)
    return {"kind": "observability", "depth": N, "gramian": W,
            "min_eig": min_eig(W) if s.dim_x else None,
            "observable": bool(is_observable(s, tol=args.tol, depth=N))}


def _dilate(obj, args):
    _expect(obj, "system")
    s = system_from_json(obj)
    N = args.depth or DEFAULT_DEPTH
    proc = dilate(s.A, N)
    out = process_to_json(proc)
    out["isometry_residual"] = isometry_residual(proc)
    return out


def _cascade(obj, args):
    _expect(obj, "cascade")
    casc, N = _cascade_from(obj, args.depth)
    rc = represented_cascade(casc)
    rec = opnorm(recover_gamma(casc) - casc.gamma) if casc.gamma.size else 0.0
    return {"kind": "cascade_report", "depth": N, "system": system_to_json(rc.representation.system),
            "assembly": casc.residuals, "recover_gamma_residual": rec,
            "block_formula_residual": rc.residual,
            "transfer_factorization_residual": cascade_transfer_residual(
                rc.representation.system, rc.sysK, rc.sysG, rc.Gamma, N),
            "dim_h": casc.H.dim_h, "dim_g": casc.dim_g, "dim_k": casc.dim_k,
            "defect_dim": casc.defect_dim}


def _ac(obj, args):
    _expect(obj, "cascade")
    casc, N = _cascade_from(obj, args.depth)
    out = {"kind": "ac_report"}
    out.update(ac_check(casc, maxiter=args.maxiter, tol=args.tol).to_dict())
    out["cascade_depth"] = N
    return out


def _markov(obj, args):
    _expect(obj, "chain")
    spec = chain_from_json(obj)
    N = args.depth or MARKOV_DEPTH
    rep = scattering_ac(spec, N=N, maxiter=args.maxiter, tol=args.tol)
    out = {"kind": "markov_report", "depth": N, "tol": args.tol}
    out.update(rep.to_dict())
    return out


def _random(args):
    if args.kind == "system":
        dims = dict(d=args.d, dim_x=args.dim_x, dim_u=args.dim_u, dim_y=args.dim_y)
    elif args.kind == "cascade":
        dims = dict(d=args.d, dim_g=args.dim_g, dim_k=args.dim_k,
                    depth=args.depth or DEFAULT_DEPTH, gamma_kind=args.gamma)
    else:
        dims = dict(n=args.n, m=args.m)
    return random_instance(args.kind, seed=args.seed, **dims)


HANDLERS = {"validate": _validate, "transfer": _transfer, "observe": _observe,
            "dilate": _dilate, "cascade": _cascade, "ac": _ac, "markov": _markov}


def _emit(report, fmt, out):
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["path", "value"])
        w.writerows(flatten(report))
    else:
        out.write(dumps(report) + "\n")


def run(args, out=None, err=None):
    """Execute parsed arguments; returns the exit code."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        if args.depth is not None and args.depth < 1:
            raise InputError("--depth must be at least 1")
        if not args.tol > 0:
            raise InputError("--tol must be positive")
        if args.maxiter < 1:
            raise InputError("--maxiter must be at least 1")
        if args.command == "random":
            report = _random(args)
        else:
            report = HANDLERS[args.command](_load(args.input), args)
            report = {"schema_version": SCHEMA_VERSION, **report}
            report.setdefault("tol", args.tol)
            report.setdefault("depth", args.depth or DEFAULT_DEPTH)
    except ValidationError as exc:
        res = "n/a" if exc.residual is None else f"{exc.residual:.3e}"
        err.write(f"validation error: {exc}\nresidual: {res}\n")
        return 2
    except (InputError, DepthError) as exc:
        err.write(f"input error: {exc}\n")
        return 1
    _emit(report, args.format, out)
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
