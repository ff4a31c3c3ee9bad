"""Command-line harness: ``calogero-pencil {verify,simulate,reduce,invert,brackets}``.

Exit codes: 0 success or pass, 1 property violation or constraint breach,
2 malformed input or domain error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np
import sympy as sp

from . import io
from .cmspace import (
    CMState,
    InvariantVector,
    bracket_table,
    embed_Q,
    invariants_map,
    normalize_to_Q,
    pi_inverse,
    rank1_check,
)
from .integrate import IntegrationConfig, integrate_flow
from .matpair import DomainError, PhasePoint, in_open_set_M
from .pencil import P0, P1
from .reduction import canonical_form
from .verify import SUITES, verify

log = logging.getLogger("calogero_pencil")

SEED_ENV = "CALOGERO_PENCIL_SEED"
CONSTRAINT_LIMIT = 1e-6

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _load_start(path, space: str):
    d = io.read_json(path)
    if {"x", "y"} <= d.keys():
        c = CMState.from_dict(d)
        if space == "Q":
            return c
        sp_, _ = canonical_form(embed_Q(c))
        return sp_
    if {"A", "B"} <= d.keys():
        p = PhasePoint.from_dict(d)
        if space == "P":
            sp_, _ = canonical_form(p)
            return sp_
        return normalize_to_Q(p)
    raise InputError(f"{path}: expected keys x,y (CM state) or A,B (phase point)")


def cmd_verify(args) -> int:
    seed = args.seed
    if seed is None:
        env = os.environ.get(SEED_ENV)
        if env is None:
            raise InputError(f"--seed is required when {SEED_ENV} is not set")
        try:
            seed = int(env)
        except ValueError:
            raise InputError(f"{SEED_ENV}={env!r} is not an integer") from None
    report = verify(args.suite, args.n, args.trials, seed, args.tol, workers=args.workers)
    text = io.dumps_json(report.to_dict())
    if args.output:
        io.write_json(args.output, report.to_dict())
    else:
        sys.stdout.write(text)
    if report.error is not None:
        log.error("suite %s aborted: %s", args.suite, report.error)
        return EXIT_INPUT
    return EXIT_OK if report.passed else EXIT_VIOLATION


def cmd_simulate(args) -> int:
    start = _load_start(args.input, args.space)
    cfg = IntegrationConfig(args.flow, args.t_end, args.dt, args.space, args.stride)
    traj, report = integrate_flow(start, cfg)
    io.write_csv(args.output, traj.header(), traj.rows())
    io.write_json(io.sidecar_path(args.output), report.to_dict())
    if report.domain_exit:
        log.warning("domain exit at t=%s: %s", report.exit_time, report.exit_reason)
        return EXIT_VIOLATION
    if report.constraint_residual is not None and report.constraint_residual >= CONSTRAINT_LIMIT:
        log.warning("constraint residual %.3e exceeds %.0e", report.constraint_residual, CONSTRAINT_LIMIT)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_reduce(args) -> int:
    p = PhasePoint.from_dict(io.read_json(args.input))
    membership = in_open_set_M(p, args.tol)
    if not membership.in_M:
        raise DomainError(f"point is not in M: {', '.join(membership.reasons)}")
    sp_, g = canonical_form(p, args.tol)
    out = {
        "section": {**sp_.point.to_dict(), "pattern": list(sp_.pattern)},
        "conjugator": g.tolist(),
        "invariants": invariants_map(p).to_dict(),
        "rank1": bool(rank1_check(p)),
    }
    io.write_json(args.output, out)
    return EXIT_OK


def cmd_invert(args) -> int:
    v = InvariantVector.from_dict(io.read_json(args.invariants))
    io.write_json(args.output, pi_inverse(v).to_dict())
    return EXIT_OK


def format_expr(expr) -> str:
    return sp.sstr(sp.expand(expr), order="grlex")


def cmd_brackets(args) -> int:
    tables = [0, 1] if args.table is None else [args.table]
    for t in tables:
        s = P0 if t == 0 else P1
        for u, v, expr in bracket_table(s, args.n):
            print(f"{{{u},{v}}}_{t} = {format_expr(expr)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="calogero-pencil", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a seeded property suite")
    v.add_argument("--suite", required=True, choices=sorted(SUITES))
    v.add_argument("--n", type=int, required=True)
    v.add_argument("--trials", type=int, default=20)
    v.add_argument("--seed", type=int, default=None, help=f"defaults to ${SEED_ENV}")
    v.add_argument("--tol", type=float, default=None, help="defaults to the suite's own tolerance")
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--output", default=None, help="write the JSON report here instead of stdout")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("simulate", help="integrate a hierarchy flow")
    s.add_argument("--input", required=True)
    s.add_argument("--space", choices=["P", "Q"], default="Q")
    s.add_argument("--flow", type=int, default=2)
    s.add_argument("--t-end", type=float, required=True)
    s.add_argument("--dt", type=float, required=True)
    s.add_argument("--stride", type=int, default=1)
    s.add_argument("--output", required=True, help="CSV trajectory; drift report goes to <stem>.drift.json")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("reduce", help="canonical form, invariants and rank-1 verdict")
    r.add_argument("--input", required=True)
    r.add_argument("--output", required=True)
    r.add_argument("--tol", type=float, default=1e-8)
    r.set_defaults(func=cmd_reduce)

    i = sub.add_parser("invert", help="recover (lambda, mu) from invariants")
    i.add_argument("--invariants", required=True)
    i.add_argument("--output", required=True)
    i.set_defaults(func=cmd_invert)

    b = sub.add_parser("brackets", help="print the reduced bracket table of the invariants")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--table", type=int, choices=[0, 1], default=None)
    b.set_defaults(func=cmd_brackets)
    return ap


def cli_main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        with np.errstate(over="raise", invalid="raise"):
            return args.func(args)
    except (InputError, DomainError, ValueError, KeyError, TypeError, OSError, FloatingPointError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
