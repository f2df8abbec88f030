"""Command-line entry point: ``hhlab {check,bounds,counterexample,suite}``.

Results go to stdout as JSON, diagnostics to stderr.  Exit status is 0
when every reported check holds, 1 when some check fails and 2 on usage
or hypothesis errors.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import bounds as bounds_mod
from . import checks, harness, rng
from .errors import ConvergenceError, DimensionError, DomainError, HypothesisError
from .matcore import matrix_to_json, read_matrix, spectral_bounds
from .quad import default_rule
from .scalarfn import get_function

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _add_matrix_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--a", metavar="PATH", help="JSON file holding A")
    p.add_argument("--b", metavar="PATH", help="JSON file holding B")
    p.add_argument("--random-dim", type=int, metavar="N", help="draw random pairs of this size")
    p.add_argument("--count", type=int, default=1, help="number of random pairs (default 1)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--window", type=float, nargs=2, default=(0.5, 2.5), metavar=("LO", "HI"),
                   help="spectrum window for random matrices")
    p.add_argument("--signed", action="store_true", help="random eigenvalue signs (indefinite)")


def _pairs(args, label: str):
    if args.random_dim is None:
        if not (args.a and args.b):
            raise _Usage("give --a and --b, or --random-dim")
        yield read_matrix(args.a), read_matrix(args.b)
        return
    if args.a or args.b:
        raise _Usage("--a/--b and --random-dim are mutually exclusive")
    if args.random_dim < 1 or args.count < 1:
        raise _Usage("--random-dim and --count must be positive")
    for i in range(args.count):
        gen = rng.stream(args.seed, label, i)
        a = harness.random_symmetric(args.random_dim, args.window, gen, signed=args.signed)
        b = harness.random_symmetric(args.random_dim, args.window, gen, signed=args.signed)
        yield a, b


class _Usage(Exception):
    pass


def _need(value, flag: str):
    if value is None:
        raise _Usage(f"{flag} is required for this theorem")
    return value


def cmd_check(args) -> int:
    f = get_function(args.f)
    rule = default_rule(f, args.nodes)
    th = args.theorem
    reports = []
    for i, (a, b) in enumerate(_pairs(args, f"cli-check-{th}")):
        if th == "hh":
            rep = checks.check_hh_chain(f, a, b, rule, args.tol)
        elif th == "t21":
            rep = checks.check_theorem21(f, get_function(_need(args.g, "--g")),
                                         _need(args.alpha, "--alpha"), a, b, rule, args.tol)
        elif th == "cor22":
            rep = checks.check_corollary22(f, get_function(_need(args.g, "--g")), a, b, rule, args.tol)
        elif th == "norm":
            rep = checks.check_norm_chain(f, a, b, args.alpha if args.alpha is not None else 1.0,
                                          rule, args.tol)
        elif th == "nabla":
            rep = checks.check_weighted_nabla(f, a, b, _need(args.lam, "--lambda"), rule, args.tol)
        elif th == "reverse":
            rep = checks.check_reverse(f, get_function(_need(args.g, "--g")),
                                       _need(args.alpha, "--alpha"), a, b, rule, args.tol)
        else:
            rep = checks.check_gradient_refinements(f, a, b, rule, args.restarts, args.tol,
                                                    args.seed + i)
        for w in rep.warnings:
            print(f"warning: {w}", file=sys.stderr)
        reports.append(rep)
    out = reports[0].to_dict() if len(reports) == 1 else [r.to_dict() for r in reports]
    _emit(out)
    return EXIT_OK if all(r.overall for r in reports) else EXIT_FAIL


def cmd_bounds(args) -> int:
    f = get_function(args.f)
    kind = args.kind
    if kind in ("beta", "alpha"):
        g = get_function(_need(args.g, "--g"))
        if args.m is None or args.M is None:
            raise _Usage("--m and --M are required for beta/alpha")
        if kind == "beta":
            res = bounds_mod.beta_constant(f, g, _need(args.alpha, "--alpha"), args.m, args.M)
        else:
            res = bounds_mod.alpha_constant(f, g, args.m, args.M)
        _emit(res.to_dict())
        return EXIT_OK
    out = []
    for i, (a, b) in enumerate(_pairs(args, f"cli-bounds-{kind}")):
        if kind == "delta":
            res = bounds_mod.delta_refinement(f, a, b, restarts=args.restarts, seed=args.seed + i)
        else:
            res = bounds_mod.xi_refinement(f, a, b, default_rule(f, args.nodes), args.restarts,
                                           seed=args.seed + i)
        d = res.to_dict()
        d["spectral_bounds"] = list(spectral_bounds([a, b]))
        out.append(d)
    _emit(out[0] if len(out) == 1 else out)
    return EXIT_OK


def cmd_counterexample(args) -> int:
    res = harness.counterexample_report(args.tol)
    a, b, f = harness.paper_counterexample()
    res["inputs"] = {"A": matrix_to_json(a), "B": matrix_to_json(b), "f": f.describe()}
    _emit(res)
    # the violation is expected; failing to reproduce it is the error
    return EXIT_OK if res["reproduced"] else EXIT_FAIL


def cmd_suite(args) -> int:
    config = harness.SuiteConfig.from_json(args.config) if args.config else harness.SuiteConfig()
    report = harness.run_suite(config)
    if not args.no_save:
        path = harness.save_report(report, args.runs_dir)
        print(f"report written to {path}", file=sys.stderr)
    sys.stdout.write(harness.dumps_report(report) + "\n")
    return EXIT_OK if report["overall"] else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hhlab", description="Numerical checks of operator Hermite-Hadamard "
                     "type inequalities for real symmetric matrices.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="verify one inequality chain on given or random matrices")
    p.add_argument("--theorem", required=True, choices=checks.THEOREMS)
    p.add_argument("--f", required=True, help="function name, 'power:<p>' or 'poly:c0,c1,...'")
    p.add_argument("--g", help="second function, where the theorem needs one")
    p.add_argument("--alpha", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--nodes", type=int, default=32, help="Gauss-Legendre node count")
    p.add_argument("--tol", type=float, default=checks.DEFAULT_TOL)
    p.add_argument("--restarts", type=int, default=16)
    _add_matrix_source(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bounds", help="compute a bound constant as JSON")
    p.add_argument("--kind", required=True, choices=["beta", "alpha", "delta", "xi"])
    p.add_argument("--f", required=True)
    p.add_argument("--g")
    p.add_argument("--alpha", type=float)
    p.add_argument("--m", type=float, help="lower end of the spectral interval")
    p.add_argument("--M", type=float, help="upper end of the spectral interval")
    p.add_argument("--nodes", type=int, default=32)
    p.add_argument("--restarts", type=int, default=16)
    _add_matrix_source(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("counterexample", help="show the 2x2 pair where t^3 breaks the operator chain")
    p.add_argument("--tol", type=float, default=checks.DEFAULT_TOL)
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("suite", help="run the seeded suite and write a JSON report")
    p.add_argument("--config", metavar="PATH", help="SuiteConfig JSON (defaults if omitted)")
    p.add_argument("--runs-dir", default="runs")
    p.add_argument("--no-save", action="store_true", help="print only, do not write to runs/")
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (_Usage, HypothesisError, DomainError, DimensionError, ValueError) as exc:
        print(f"hhlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ConvergenceError) as exc:
        print(f"hhlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
