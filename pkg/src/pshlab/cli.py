"""Command-line entry point.

Exit codes: 0 when every check passes, 1 when an expectation is falsified,
2 for usage errors (bad arguments, unreadable or invalid input files).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import certify
from .direct_integral import MeasurableFamily, build_space
from .harness import SUITES, SuiteConfig, certify_family, run_suite
from .maps import DiscMap
from .means import ZeroProfile, jensen_formula_residual
from .report import dumps, emit_report, to_plain
from .spaces import check_norm_axioms, make_space

EXIT_OK, EXIT_FALSIFIED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def load_space(path: str):
    """A space descriptor, or a family {"p", "points"} standing for its direct integral."""
    data = _load_json(path)
    try:
        if isinstance(data, dict) and "points" in data:
            return MeasurableFamily.from_json(data)
        return make_space(data)
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"invalid space in {path}: {exc}") from exc


def _as_space(obj):
    return build_space(obj) if isinstance(obj, MeasurableFamily) else obj


def load_zeros(path: str) -> ZeroProfile:
    data = _load_json(path)
    if isinstance(data, dict):
        raw, mult = data.get("zeros", []), data.get("multiplicities")
    else:
        raw, mult = data, None
    try:
        zeros = [complex(z[0], z[1]) if isinstance(z, (list, tuple)) else complex(z) for z in raw]
        mult = [1] * len(zeros) if mult is None else [int(m) for m in mult]
        return ZeroProfile(tuple(zeros), tuple(mult))
    except (ValueError, TypeError, IndexError) as exc:
        raise UsageError(f"invalid zero list in {path}: {exc}") from exc


def resolve_seed(flag: int | None, default: int = 0) -> int:
    """An explicit --seed wins, then PSHLAB_SEED, then the default."""
    if flag is not None:
        return flag
    env = os.environ.get("PSHLAB_SEED")
    if env is None or env == "":
        return default
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"PSHLAB_SEED must be an integer, got {env!r}") from None


def _emit(obj, out: str | None) -> None:
    if out:
        emit_report([obj], out, "json")
    print(dumps(to_plain(obj)))


def cmd_certify(args) -> int:
    target = load_space(args.space)
    seed = resolve_seed(args.seed)
    try:
        if isinstance(target, MeasurableFamily):
            verdict, _, _ = certify_family(target, args.mode, args.restarts, args.degree, seed)
            if args.crosscheck:
                verdict.crosscheck = certify.equivalence_crosscheck(
                    build_space(target), args.mode, seed=seed, verdict=verdict)
        else:
            verdict = certify.strict_verdict(target, args.mode, args.restarts, args.degree, seed,
                                             crosscheck=args.crosscheck)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(verdict, args.out)
    if args.expect and args.expect != verdict.outcome:
        return EXIT_FALSIFIED
    if verdict.crosscheck is not None and not verdict.crosscheck.consistent:
        return EXIT_FALSIFIED
    return EXIT_OK


def cmd_suite(args) -> int:
    try:
        cfg = SuiteConfig(args.name, seed=resolve_seed(args.seed), nodes=args.nodes,
                          restarts=args.restarts, degree_cap=args.degree, output=args.out,
                          format=args.format)
        result = run_suite(cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    failed = [r for r in result.records if not r["passed"]]
    for r in result.records:
        print(f"{'PASS' if r['passed'] else 'FAIL'}  {r['suite']}  {r['check']}")
    for p in result.paths:
        print(f"report: {p}")
    print(f"{len(result.records) - len(failed)}/{len(result.records)} checks passed")
    return EXIT_FALSIFIED if failed else EXIT_OK


def cmd_jensen(args) -> int:
    try:
        disc = DiscMap.from_json(_load_json(args.disc))
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"invalid disc in {args.disc}: {exc}") from exc
    zeros = load_zeros(args.zeros)
    try:
        residual = jensen_formula_residual(disc, zeros, args.nodes)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    passed = residual <= args.tol
    print(dumps({"residual": residual, "tolerance": args.tol, "passed": passed}))
    return EXIT_OK if passed else EXIT_FALSIFIED


def cmd_norm_check(args) -> int:
    space = _as_space(load_space(args.space))
    rep = check_norm_axioms(space, args.trials, resolve_seed(args.seed))
    print(dumps(to_plain(rep)))
    return EXIT_OK if rep.passed else EXIT_FALSIFIED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pshlab", description="Numerical checks of strict convexity and strict plurisubharmonicity.")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("certify", help="search the unit sphere for a flat segment or disc")
    c.add_argument("--space", required=True, help="space descriptor or family JSON file")
    c.add_argument("--mode", required=True, choices=["convex", "psh"])
    c.add_argument("--restarts", type=int, default=100)
    c.add_argument("--degree", type=int, default=6, help="degree cap for disc searches")
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--expect", choices=["witness_found", "no_witness"])
    c.add_argument("--crosscheck", action="store_true",
                   help="also compare against a reshaped-norm gap sample")
    c.add_argument("--out", help="write the verdict JSON here as well")
    c.set_defaults(func=cmd_certify)

    s = sub.add_parser("suite", help="run a named experiment suite")
    s.add_argument("--name", required=True, choices=SUITES)
    s.add_argument("--out", help="report path; without --format both .json and .csv are written")
    s.add_argument("--format", choices=["json", "csv"])
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--nodes", type=int, default=512)
    s.add_argument("--restarts", type=int, default=100)
    s.add_argument("--degree", type=int, default=6)
    s.set_defaults(func=cmd_suite)

    j = sub.add_parser("jensen", help="check Jensen's formula for a scalar disc")
    j.add_argument("--disc", required=True)
    j.add_argument("--zeros", required=True)
    j.add_argument("--nodes", type=int, default=512)
    j.add_argument("--tol", type=float, default=1e-8)
    j.set_defaults(func=cmd_jensen)

    n = sub.add_parser("norm-check", help="sample the norm axioms")
    n.add_argument("--space", required=True)
    n.add_argument("--trials", type=int, default=1000)
    n.add_argument("--seed", type=int, default=None)
    n.set_defaults(func=cmd_norm_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"pshlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
