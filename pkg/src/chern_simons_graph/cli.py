"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 solver failure (including an
inconclusive solve), 3 critical coupling flagged by inconclusive oracle
calls.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

import numpy as np

from .critical import BracketError, bisect, sweep
from .graph import FiniteGraph, GraphError, VortexSet, dirichlet_energy, integrate
from .linalg import LinearSolveError, LinearSolveOptions, spectral_gap
from .monotone import CONVERGED, DIVERGED, MonotoneOptions, compute_u0, iterate_scheme
from .nonlinearity import Problem, classify_sub_super, residual
from .serialize import dumps, load_solution, to_jsonable, to_tsv, write_solution
from .variational import VariationalError, find_two_solutions, functional_J

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_INCONCLUSIVE = 0, 1, 2, 3

SWEEP_COLUMNS = ["lambda", "status", "iterations", "mean_v", "J", "grad_norm_ratio"]


class InputError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chern-simons-graph",
        description="Generalized Chern-Simons equation on finite weighted graphs.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", required=True, help="graph JSON file")
    common.add_argument("--vortex", action="append", required=True, metavar="ID",
                        help="vortex vertex id; repeat for several (repeats add multiplicity)")
    common.add_argument("--b", type=float, required=True, help="exponent b > 0")
    common.add_argument("--strict-distinct", action="store_true", help="reject repeated vortex ids")
    common.add_argument("--format", choices=("json", "tsv"), default="json")
    common.add_argument("--step-tol", type=float, default=1e-12, help="monotone scheme step tolerance")
    common.add_argument("--max-iterations", type=int, default=100_000)
    common.add_argument("--seed", type=int, default=0, help="seed for randomized self-checks")
    common.add_argument("-v", "--verbose", action="store_true")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("solve", parents=[common], help="maximal solution by monotone iteration")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--solution-out", help="also write the solution as an id->value map")

    p = sub.add_parser("critical", parents=[common], help="bisect the critical coupling")
    p.add_argument("--tol", type=float, help="absolute bracket width (default rel-tol * upper bracket)")
    p.add_argument("--rel-tol", type=float, default=1e-4)

    p = sub.add_parser("multiplicity", parents=[common], help="two distinct solutions above lambda_c")
    p.add_argument("--lambda", dest="lam", type=float, help="coupling (default: factor * lambda_c)")
    p.add_argument("--factor", type=float, default=1.01)
    p.add_argument("--rel-tol", type=float, default=1e-4)

    p = sub.add_parser("verify", parents=[common], help="residual and classification of a solution file")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--tol", type=float, default=1e-9)

    p = sub.add_parser("sweep", parents=[common], help="maximal solutions over a coupling grid (TSV)")
    p.add_argument("--lambda-min", type=float, required=True)
    p.add_argument("--lambda-max", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("poincare", parents=[common], help="spectral gap and Poincare constant")
    p.add_argument("--samples", type=int, default=1000, help="random mean-zero checks")
    return parser


def _load(args):
    g = FiniteGraph.from_json(args.graph)
    vortices = VortexSet(tuple(args.vortex)).check(g, strict_distinct=args.strict_distinct)
    if not args.b > 0:
        raise InputError("--b must be positive")
    lam = getattr(args, "lam", None)
    if lam is not None and not lam > 0:
        raise InputError("--lambda must be positive")
    return g, vortices


def _emit(payload: dict, fmt: str, g: FiniteGraph, out) -> None:
    if fmt == "json":
        out.write(dumps(payload, g) + "\n")
        return
    flat = to_jsonable(payload, g)
    for key, value in flat.items():
        if isinstance(value, (dict, list)):
            value = json.dumps(value, separators=(",", ":"))
        out.write(f"{key}\t{'nan' if value is None else value}\n")


def _mono_opts(args) -> MonotoneOptions:
    return MonotoneOptions(step_tolerance=args.step_tol, max_iterations=args.max_iterations)


def _solve(args, g, vortices, out):
    bg = compute_u0(g, vortices)
    problem = Problem(g, vortices, args.lam, args.b)
    rep = iterate_scheme(problem, bg, _mono_opts(args))
    payload = dict(to_jsonable(rep, g), command="solve", b=args.b, vortices=list(vortices.points))
    _emit(payload, args.format, g, out)
    if rep.converged and args.solution_out:
        write_solution(g, rep.v, args.solution_out)
    return EXIT_OK if rep.status in (CONVERGED, DIVERGED) else EXIT_SOLVER


def _critical(args, g, vortices, out):
    res = bisect(g, vortices, args.b, args.tol, _mono_opts(args), rel_tol=args.rel_tol)
    payload = dict(to_jsonable(res, g), command="critical", flagged=res.flagged)
    _emit(payload, args.format, g, out)
    return EXIT_INCONCLUSIVE if res.flagged else EXIT_OK


def _multiplicity(args, g, vortices, out):
    bg = compute_u0(g, vortices)
    opts = _mono_opts(args)
    crit = bisect(g, vortices, args.b, None, opts, rel_tol=args.rel_tol, bg=bg)
    lam = args.lam if args.lam is not None else args.factor * crit.lambda_c
    result = find_two_solutions(Problem(g, vortices, lam, args.b), bg, crit, monotone_opts=opts)
    payload = dict(
        to_jsonable(result, g),
        command="multiplicity",
        lambda_c=crit.lambda_c,
        lambda_c_bracket=list(crit.bracket),
        lambda_c_flagged=crit.flagged,
    )
    _emit(payload, args.format, g, out)
    return EXIT_OK


def _verify(args, g, vortices, out):
    v = load_solution(g, args.solution)
    bg = compute_u0(g, vortices)
    problem = Problem(g, vortices, args.lam, args.b)
    r = residual(problem, bg, v)
    payload = {
        "command": "verify",
        "classification": classify_sub_super(problem, bg, v, args.tol),
        "residual_sup": float(np.max(np.abs(r))),
        "max_u0_plus_v": float(np.max(bg.u0 + v)),
        "J": functional_J(problem, bg, v),
        "residual": r,
    }
    _emit(payload, args.format, g, out)
    return EXIT_OK


def _sweep(args, g, vortices, out):
    if args.steps < 1 or not (0 < args.lambda_min <= args.lambda_max):
        raise InputError("sweep needs 0 < --lambda-min <= --lambda-max and --steps >= 1")
    lams = np.linspace(args.lambda_min, args.lambda_max, args.steps) if args.steps > 1 else [args.lambda_min]
    rows = sweep(g, vortices, args.b, lams, _mono_opts(args), jobs=args.jobs)
    ratios = [r.grad_norm_ratio for r in rows if math.isfinite(r.grad_norm_ratio)]
    bound = max(ratios) if ratios else math.nan
    if args.format == "tsv":
        table = [
            {"lambda": r.lam, "status": r.status, "iterations": r.iterations, "mean_v": r.mean_v,
             "J": r.J, "grad_norm_ratio": r.grad_norm_ratio}
            for r in rows
        ]
        out.write(to_tsv(table, SWEEP_COLUMNS))
        out.write(f"# max_grad_norm_ratio\t{bound!r}\n")
    else:
        _emit({"command": "sweep", "rows": rows, "max_grad_norm_ratio": bound}, "json", g, out)
    return EXIT_OK


def _poincare(args, g, vortices, out):
    gap = spectral_gap(g, LinearSolveOptions())
    C = 1.0 / gap
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.samples):
        u = rng.standard_normal(g.n)
        u -= integrate(g, u) / g.volume
        worst = max(worst, integrate(g, u * u) / dirichlet_energy(g, u))
    payload = {"command": "poincare", "spectral_gap": gap, "poincare_constant": C,
               "max_sampled_ratio": worst, "samples": args.samples, "holds": bool(worst <= C * (1 + 1e-9))}
    _emit(payload, args.format, g, out)
    return EXIT_OK


COMMANDS = {
    "solve": _solve,
    "critical": _critical,
    "multiplicity": _multiplicity,
    "verify": _verify,
    "sweep": _sweep,
    "poincare": _poincare,
}


def run(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        g, vortices = _load(args)
        return COMMANDS[args.command](args, g, vortices, out)
    except OSError as exc:
        print(f"error: cannot read {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, GraphError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (LinearSolveError, BracketError, VariationalError, RuntimeError, OverflowError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
