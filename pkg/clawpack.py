"""Command line: solve, gen, verify, constants, bench.

    python clawpack.py solve --in inst.txt --algo logimp --out trace.json
"""
import argparse
import json
import logging
import sys
from pathlib import Path

from analysis import AnalysisParams, certify_local_optimum, check_constants
from bench import emit_report, load_suite, run_bench
from circular import ColorCodingParams
from data import load_solution, read_instance, save_instance, solution_to_json
from errors import BudgetExceeded, ClawpackError, InputError
from generators import (
    LowerBoundParams,
    berman_tight_packing,
    gen_alternating_cycle,
    gen_high_girth_regular,
    gen_incidence_lowerbound,
    gen_random_packing,
)
from instance import as_graph
from oracle import DEFAULT_ORACLE_LIMIT, exact_mwis
from search import SolverConfig, solve
from utils import fmt_fraction, parse_rational

logger = logging.getLogger("clawpack")

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2


def _emit(payload, out):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args):
    obj = read_instance(args.input)
    g = as_graph(obj)
    if args.d is not None:
        g.d = args.d
    if args.exact:
        scored = g.with_weights([1] * g.n) if args.unit else g
        result = exact_mwis(scored, limit=args.oracle_limit)
        _emit(
            {
                "optimum": fmt_fraction(result.optimum_w),
                "members": result.best.sorted_members(),
                "nodes": result.nodes_explored,
                "optimal": result.optimal,
            },
            args.out,
        )
        return EXIT_OK
    start = None
    if args.start:
        start, err = load_solution(args.start)
        if err:
            raise InputError(err)
    cfg = SolverConfig(
        mode=args.algo,
        alpha=parse_rational(args.alpha),
        size_cap_factor=parse_rational(args.cap_c),
        scaling_N=parse_rational(args.scale_n) if args.scale_n else None,
        rng_seed=args.seed,
        unit=args.unit,
        d=args.d,
        start=start,
        circular=ColorCodingParams(
            mode="exhaustive" if args.cc_mode == "exhaustive" else "randomized",
            t=args.cc_t,
            repetitions=args.cc_reps,
            max_cycle_len=args.cc_maxlen,
            y_cap=args.cc_ycap,
        ),
    )
    trace = solve(g, cfg)
    _emit(trace.to_dict(), args.out)
    return EXIT_OK


def cmd_gen(args):
    side = None
    if args.family == "berman":
        obj, side, _ = berman_tight_packing(args.d)
    elif args.family == "cycle":
        obj, side, _ = gen_alternating_cycle(args.pairs, args.d, args.eps)
    elif args.family == "lowerbound":
        params = LowerBoundParams(args.d, args.alpha, args.eps, args.girth)
        H = gen_high_girth_regular(args.d - 1, args.girth, args.seed)
        obj, side, _ = gen_incidence_lowerbound(params, H)
    else:
        obj = gen_random_packing(args.sets, args.k, args.universe, args.weights, args.seed)
    save_instance(obj, args.out)
    if args.start_out and side is not None:
        Path(args.start_out).write_text(solution_to_json(side))
    return EXIT_OK


def cmd_verify(args):
    g = as_graph(read_instance(args.input))
    members, err = load_solution(args.solution)
    if err:
        raise InputError(err)
    oracle = exact_mwis(g, limit=args.oracle_limit)
    report = certify_local_optimum(g, members, oracle.best.members, AnalysisParams.from_delta(args.delta))
    payload = report.to_dict()
    payload["optimum_members"] = oracle.best.sorted_members()
    _emit(payload, args.out)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_constants(args):
    checks = check_constants(args.delta, eps_prime=args.eps_prime)
    _emit({"delta": args.delta, "conditions": [c.to_dict() for c in checks]}, args.out)
    return EXIT_OK if all(c.holds for c in checks) else EXIT_FAILED


def cmd_bench(args):
    report = run_bench(load_suite(args.suite), jobs=args.jobs)
    fmt = "json" if str(args.out).endswith(".json") else "csv"
    emit_report(report, fmt, args.out, include_timing=not args.no_timing)
    return EXIT_OK if report.ok else EXIT_FAILED


def build_parser():
    parser = argparse.ArgumentParser(prog="clawpack", description="Local search for MWIS in d-claw free graphs")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run a local-search algorithm")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--algo", choices=["greedy", "squareimp", "logimp", "param"], default="squareimp")
    p.add_argument("--alpha", default="2")
    p.add_argument("--cap-c", default="1")
    p.add_argument("--scale-n", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--unit", action="store_true", help="unit weights (cardinality)")
    p.add_argument("--d", type=int, default=None, help="claimed claw bound")
    p.add_argument("--start", default=None, help="start solution JSON")
    p.add_argument("--exact", action="store_true", help="run the exact oracle instead")
    p.add_argument("--oracle-limit", type=int, default=DEFAULT_ORACLE_LIMIT)
    p.add_argument("--cc-t", type=int, default=None)
    p.add_argument("--cc-reps", type=int, default=None)
    p.add_argument("--cc-maxlen", type=int, default=12)
    p.add_argument("--cc-ycap", type=int, default=3)
    p.add_argument("--cc-mode", choices=["rand", "exhaustive"], default="rand")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("gen", help="generate an instance family")
    fam = p.add_subparsers(dest="family", required=True)
    for name in ("berman", "cycle", "lowerbound", "random"):
        f = fam.add_parser(name)
        f.add_argument("--out", required=True)
        f.add_argument("--start-out", default=None, help="write the family's A side as a solution file")
        f.add_argument("--seed", type=int, default=0)
        if name in ("berman", "cycle", "lowerbound"):
            f.add_argument("--d", type=int, required=True)
        if name in ("cycle", "lowerbound"):
            f.add_argument("--eps", default="1/2")
        if name == "cycle":
            f.add_argument("--pairs", type=int, required=True)
        if name == "lowerbound":
            f.add_argument("--alpha", default="1")
            f.add_argument("--girth", type=int, required=True)
        if name == "random":
            f.add_argument("--sets", type=int, required=True)
            f.add_argument("--k", type=int, required=True)
            f.add_argument("--universe", type=int, required=True)
            f.add_argument("--weights", choices=["uniform", "near-unit"], default="uniform")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", help="certify a solution against the exact optimum")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--delta", default="1/2")
    p.add_argument("--oracle-limit", type=int, default=DEFAULT_ORACLE_LIMIT)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("constants", help="check the parameter conditions for delta")
    p.add_argument("--delta", required=True)
    p.add_argument("--eps-prime", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("bench", help="run a benchmark suite")
    p.add_argument("--suite", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--no-timing", action="store_true", help="blank the time_ms column")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except InputError as e:
        logger.error("%s", e)
        return EXIT_INPUT
    except BudgetExceeded as e:
        logger.error("budget exceeded: %s", e)
        return EXIT_FAILED
    except ClawpackError as e:
        logger.error("%s", e)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
