"""Command line entry point: ``condtest gen-instance | estimate | check``.

Every option ``--some-flag`` can also be set through the environment
variable ``CONDTEST_SOME_FLAG``; an explicit flag wins. Exit codes: 0 on
success, 1 when a check fails, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .checks import CHECKS, run_checks
from .errors import CondError
from .harness import ExperimentConfig, run_estimate_experiment, summary_path
from .instances import dump_instance, gen_equivalence_instance, gen_support_pair, instance_to_dict

ENV_PREFIX = "CONDTEST_"


def parse_int(text: str) -> int:
    """Integers written plainly or as ``2^k`` / ``2**k``."""
    t = str(text).strip().replace("**", "^")
    if "^" in t:
        base, exp = t.split("^", 1)
        return int(base) ** int(exp)
    return int(t)


def parse_int_list(text: str) -> list[int]:
    return [parse_int(v) for v in str(text).split(",") if v.strip()]


def _env_default(dest: str, default):
    return os.environ.get(ENV_PREFIX + dest.upper(), default)


def _add(p: argparse.ArgumentParser, *flags, **kw):
    dest = kw.get("dest") or flags[0].lstrip("-").replace("-", "_")
    if kw.get("action") == "store_true":
        env = os.environ.get(ENV_PREFIX + dest.upper())
        kw["default"] = env not in (None, "", "0", "false", "False")
    else:
        kw["default"] = _env_default(dest, kw.get("default"))
    if kw.get("required") and kw["default"] is not None:
        kw["required"] = False
    p.add_argument(*flags, **kw)


def _add_globals(p: argparse.ArgumentParser) -> None:
    _add(p, "--seed", type=parse_int, default=0, help="master seed")
    _add(p, "--threads", type=int, default=1, help="worker processes for trials")
    _add(p, "--format", choices=["csv", "json"], default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="condtest",
                                     description="Conditional-sampling support estimation toolkit")
    _add_globals(parser)
    # the same flags after the subcommand; SUPPRESS keeps a value given before it
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--seed", type=parse_int, help="master seed")
    common.add_argument("--threads", type=int, help="worker processes for trials")
    common.add_argument("--format", choices=["csv", "json"])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-instance", parents=[common], help="write a lower-bound instance as JSON")
    _add(g, "--family", choices=["equivalence", "support-pair"], required=True)
    _add(g, "--n", type=parse_int, required=True)
    _add(g, "--kind", choices=["yes", "no"], required=True)
    _add(g, "--gamma", type=float, default=2 ** 0.5)
    _add(g, "--rho", type=float, default=None)
    _add(g, "--out", default=None, help="output file (stdout when omitted)")

    e = sub.add_parser("estimate", parents=[common], help="run a support-estimation experiment")
    _add(e, "--n", type=parse_int_list, required=True, help="domain sizes, comma separated")
    _add(e, "--support", type=parse_int_list, required=True, help="support sizes, comma separated")
    _add(e, "--eps", type=float, default=0.3)
    _add(e, "--tau", default="1")
    _add(e, "--trials", type=int, default=100)
    _add(e, "--out", default=None)
    _add(e, "--nonadaptive", action="store_true")
    _add(e, "--timing", action="store_true", help="add wall-clock column (breaks byte-identity)")
    for name in ("c-cmp", "c-probe", "c-u", "c-na", "theta"):
        _add(e, f"--{name}", type=float, default=None)

    c = sub.add_parser("check", parents=[common], help="run a checker suite")
    c.add_argument("which", choices=sorted(CHECKS))
    _add(c, "--count", type=int, default=None, help="number of cases")
    _add(c, "--log-n", type=float, default=None)
    _add(c, "--q", type=int, default=None)
    _add(c, "--bound", type=float, default=None, help="hitting: ratio bound")
    return parser


def _cmd_gen(args) -> int:
    if args.family == "equivalence":
        inst = gen_equivalence_instance(args.n, args.kind, args.seed, rho=args.rho)
    else:
        inst = gen_support_pair(args.n, args.gamma, args.kind, args.seed)
    if args.out:
        dump_instance(inst, args.out)
    else:
        json.dump(instance_to_dict(inst), sys.stdout, indent=2)
        sys.stdout.write("\n")
    return 0


def _cmd_estimate(args) -> int:
    consts = {"c_cmp": args.c_cmp, "c_probe": args.c_probe, "c_u": args.c_u,
              "c_na": args.c_na, "theta_na": args.theta}
    cfg = ExperimentConfig(n=args.n, support=args.support, eps=args.eps, tau=str(args.tau),
                           trials=args.trials, master_seed=args.seed,
                           nonadaptive=args.nonadaptive,
                           constants={k: v for k, v in consts.items() if v is not None},
                           out=args.out, threads=args.threads, timing=args.timing)
    report = run_estimate_experiment(cfg, fmt=args.format)
    if args.out is None:
        sys.stdout.write(report.csv_text() if args.format == "csv" else report.json_text())
        if args.format == "csv":
            sys.stdout.write(report.summary_json() + "\n")
    else:
        extra = f" and {summary_path(args.out)}" if args.format == "csv" else ""
        print(f"wrote {args.out}{extra}", file=sys.stderr)
    return 0


def _cmd_check(args) -> int:
    params = {}
    if args.count is not None:
        params["count"] = args.count
    if args.seed:
        params["seed"] = args.seed
    if args.log_n is not None:
        if args.which not in ("hitting", "counting"):
            raise CondError("--log-n applies to hitting and counting")
        params["log_n"] = args.log_n
    if args.q is not None:
        if args.which not in ("hitting", "counting"):
            raise CondError("--q applies to hitting and counting")
        params["q"] = args.q
    if args.bound is not None:
        if args.which != "hitting":
            raise CondError("--bound applies to hitting")
        params["bound"] = args.bound
    report = run_checks(args.which, **params)
    if args.format == "json":
        print(json.dumps({"name": report.name, "passed": report.passed, "details": report.details,
                          "failures": report.failures[:20]}, indent=2, default=str))
    else:
        print(report.summary())
    return 0 if report.passed else 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2
    try:
        if args.command == "gen-instance":
            return _cmd_gen(args)
        if args.command == "estimate":
            return _cmd_estimate(args)
        return _cmd_check(args)
    except (CondError, ValueError, KeyError) as exc:
        print(f"condtest: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
