"""Command-line front end: ``bestiso <subcommand> <input> [options]``.

Every subcommand writes one JSON document.  Exit status is 0 on success,
1 for unreadable input or an order the method does not support, and 2 when
a property check or the output round-trip fails.
"""
from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import __version__
from .exceptions import StabilizationError
from .graph import chain, error_curve, is_isotonic, level_sets, lp_error, violating_pairs
from .io import ORDERS, ProblemInput, dump, load_problem, rounded
from .l0 import candidate_grid, l0_error_linear, lex0_regression_linear, strict_up0_oracle
from .l1 import YhatStrategy, median_pav, strict_down1_linear
from .linf import check_level_set_trimming, lex_inf_regression, minimax_bound, naive_inf_regression
from .means import (
    median_interval,
    wmean_0,
    wmean_1_0,
    wmean_1_inf,
    wmean_down1,
    wmean_inf,
    wmean_neg_p,
    wmean_p,
    wmean_p_sub1,
    wmean_up1,
)

EXIT_OK, EXIT_INPUT, EXIT_CHECK = 0, 1, 2
LINEAR_ONLY = {"l1-strict", "l1-pav", "l0", "lex0"}
SMALL_N = 8


class _InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _norms(fw, g, tol):
    return {
        "0": lp_error(fw, g, 0, tol=tol),
        "1": lp_error(fw, g, 1),
        "2": float(np.sqrt(lp_error(fw, g, 2))),
        "inf": lp_error(fw, g, np.inf),
    }


def _level_summary(problem: ProblemInput, g, tol):
    dag = chain(problem.n) if problem.order == "linear" else problem.closure()
    out = []
    f, w = problem.fw.values, problem.fw.weights
    for members in sorted(level_sets(g, dag, tol=tol), key=min):
        members = sorted(members)
        vals, wts = f[members], w[members]
        entry = {}
        if problem.order == "linear":
            entry["range"] = [members[0], members[-1]]
        elif problem.ids is not None:
            entry["members"] = [problem.ids[k] for k in members]
        else:
            entry["members"] = members
        entry.update(
            value=g[members[0]],
            size=len(members),
            weight=float(wts.sum()),
            wmean_inf=wmean_inf(vals, weights=wts),
            median=median_interval(vals, weights=wts).to_json(),
            wmean_down1=wmean_down1(vals, weights=wts),
        )
        out.append(entry)
    return out


def _regress(cmd, problem: ProblemInput, args):
    """Run one regression method; returns (values, extra fields)."""
    fw = problem.fw
    if cmd == "linf":
        closure = problem.closure()
        g = lex_inf_regression(closure, fw)
        return g, {"minimax_bound": minimax_bound(violating_pairs(closure, fw))}
    if cmd == "linf-naive":
        g = naive_inf_regression(problem.closure(), fw.values)
        return g, {"weights_ignored": bool(np.any(fw.weights != 1))}
    if cmd == "l1-strict":
        g, info = strict_down1_linear(fw, YhatStrategy(args.strategy, args.delta), return_info=True)
        return g, info
    if cmd == "l1-pav":
        return median_pav(fw), {}
    if cmd == "l0":
        err, g = l0_error_linear(fw)
        return g, {"min_error": err}
    if cmd == "lex0":
        sol = lex0_regression_linear(fw, candidate_grid(fw.values, args.grid))
        return sol.assignments[0], {"solutions": [a.tolist() for a in sol.assignments],
                                    "truncated": sol.truncated}
    raise AssertionError(cmd)


def _regression_document(cmd, problem: ProblemInput, args):
    if cmd in LINEAR_ONLY and problem.order != "linear":
        raise _InputError(f"'{cmd}' needs a linear order, got {problem.order}")
    t0 = time.perf_counter()
    g, extra = _regress(cmd, problem, args)
    elapsed = time.perf_counter() - t0

    emitted = np.array(rounded(np.asarray(g)), dtype=float)
    fw = problem.fw
    norms = _norms(fw, emitted, args.tolerance)
    internal = _norms(fw, g, args.tolerance)
    problems = []
    if not is_isotonic(emitted, problem.closure()):
        problems.append("emitted values are not isotonic")
    for k in norms:
        if not np.isclose(norms[k], internal[k], rtol=1e-9, atol=1e-12):
            problems.append(f"L{k} error changed on output: {internal[k]} vs {norms[k]}")

    curve = error_curve(fw, emitted, grain=args.tolerance or None)
    doc = {
        "method": cmd,
        "order": problem.order,
        "n": problem.n,
        "regression": emitted,
        "norms": norms,
        "error_curve": [list(p) for p in curve.as_pairs()],
        "level_sets": _level_summary(problem, emitted, 0.0),
        **extra,
        "config": _config(args),
    }
    if not args.no_timing:
        doc["timing"] = {"seconds": elapsed}
    return doc, problems


def _config(args):
    keys = ("order", "delta", "strategy", "p", "grid", "seed", "tolerance")
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def _means_document(problem: ProblemInput, args):
    f, w = problem.fw.values, problem.fw.weights
    t0 = time.perf_counter()
    means = {
        "median": median_interval(f, weights=w).to_json(),
        "wmean_down1": wmean_down1(f, weights=w),
        "wmean_up1": wmean_up1(f, weights=w).to_json(),
        "wmean_0": wmean_0(f, weights=w).to_json(),
        "wmean_inf": wmean_inf(f, weights=w),
        "wmean_1_inf": wmean_1_inf(f, weights=w),
        "wmean_1_0": wmean_1_0(f, weights=w).to_json(),
    }
    if args.p is not None:
        p = args.p
        if p > 1:
            val = wmean_p(f, p, weights=w)
        elif p == 1:
            val = means["median"]
        elif p > 0:
            val = wmean_p_sub1(f, p, weights=w).to_json()
        elif p < 0:
            val = wmean_neg_p(f, p, weights=w).to_json()
        else:
            val = means["wmean_0"]
        means["wmean_p"] = {"p": p, "value": val}
    doc = {"method": "means", "n": problem.n, "means": means, "config": _config(args)}
    if not args.no_timing:
        doc["timing"] = {"seconds": time.perf_counter() - t0}
    return doc, []


def _check_document(problem: ProblemInput, args):
    fw = problem.fw
    closure = problem.closure()
    rng = np.random.default_rng(args.seed)
    g = lex_inf_regression(closure, fw)
    checks = []

    def record(name, passed, detail=""):
        checks.append({"name": name, "passed": passed, "detail": detail})

    record("isotonic", is_isotonic(g, closure))
    bound = minimax_bound(violating_pairs(closure, fw))
    err = lp_error(fw, g, np.inf)
    record("minimax_optimal", bool(abs(err - bound) <= 1e-9 * max(1.0, bound)),
           f"error {err}, bound {bound}")
    bumped = fw.values + rng.uniform(0, 1, fw.n) * (np.abs(fw.values).max() + 1)
    g2 = lex_inf_regression(closure, type(fw)(bumped, fw.weights))
    record("monotone_operator", bool(np.all(g2 >= g - 1e-9)))
    record("level_set_trimming", check_level_set_trimming(g, fw, closure))
    if problem.order == "linear" and problem.n <= SMALL_N:
        try:
            same = lex0_regression_linear(fw).as_set() == strict_up0_oracle(fw).as_set()
            record("lex0_equals_strict_up0", same)
        except StabilizationError as exc:
            record("lex0_equals_strict_up0", None, f"inconclusive: {exc}")
    else:
        record("lex0_equals_strict_up0", None, f"skipped: needs a linear order with n <= {SMALL_N}")
    failed = [c["name"] for c in checks if c["passed"] is False]
    doc = {"method": "check", "order": problem.order, "n": problem.n, "checks": checks,
           "passed": not failed, "config": _config(args)}
    return doc, [f"check failed: {name}" for name in failed]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bestiso", description="Best L0, L1 and L-infinity isotonic regressions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "linf": "lex-infinity regression on any order",
        "linf-naive": "midpoint L-infinity baseline (ignores weights)",
        "l1-strict": "strict L1 regression (linear order)",
        "l1-pav": "L1 regression by median PAV (linear order)",
        "l0": "minimum L0 error and a witness (linear order)",
        "lex0": "lex-zero regressions (linear order, small n)",
        "means": "every weighted mean of the input values",
        "check": "property checks on the input",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text, description=text)
        sp.add_argument("input", help="input file, or - for standard input")
        sp.add_argument("--order", choices=ORDERS,
                        help="input layout (default: dag for .json files, linear otherwise)")
        sp.add_argument("--delta", type=float, default=1e-6, help="strict L1 value tolerance")
        sp.add_argument("--strategy", choices=("data", "bisect", "hybrid"), default="hybrid",
                        help="strict L1 probe choice")
        sp.add_argument("--p", type=float, help="exponent for the extra mean in 'means'")
        sp.add_argument("--grid", choices=("data", "augmented"), default="data",
                        help="candidate values for lex0")
        sp.add_argument("--seed", type=int, default=0, help="random seed for 'check'")
        sp.add_argument("--tolerance", type=float, default=1e-9,
                        help="errors at or below this count as exact fits")
        sp.add_argument("--out", help="write the document here instead of standard output")
        sp.add_argument("--no-timing", action="store_true", help="omit timing for byte-stable output")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        problem = load_problem(args.input, args.order)
        if args.command == "means":
            doc, problems = _means_document(problem, args)
        elif args.command == "check":
            doc, problems = _check_document(problem, args)
        else:
            doc, problems = _regression_document(args.command, problem, args)
    except (_InputError, ValueError, OSError) as exc:
        print(f"bestiso: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = dump(doc)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for msg in problems:
        print(f"bestiso: {msg}", file=sys.stderr)
    return EXIT_CHECK if problems else EXIT_OK


def main() -> None:
    sys.exit(run())
