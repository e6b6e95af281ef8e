"""Command-line frontend.

Subcommands: solve, check-bm, check-mink, equiv, uniq, audit-c0, search, gen.
Exit codes: 0 success, 1 confirmed inequality violation, 2 solver failure,
3 usage error.  Output is line-delimited key=value records (floats with 17
significant digits); the timestamp lives on its own header line so the
record body is deterministic for fixed config and seeds.
"""

from __future__ import annotations

import argparse
import sys
from datetime import datetime, timezone

import numpy as np

from . import harness
from .body import (
    BodyError,
    ParameterError,
    ProblemParams,
    random_symmetric_body,
    write_body,
)
from .expr import ExpressionError, evaluate_on_grid, parse_expression
from .harness import format_record, report_records
from .solver import SolverConfig, SolverError, solve_lp_dual_minkowski
from .sphere import ScalarField, build_grid

EXIT_OK, EXIT_VIOLATION, EXIT_SOLVER, EXIT_USAGE = 0, 1, 2, 3


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_seed_spec(spec: str) -> list[int]:
    """Seed lists: "1..100" (inclusive) or "1,4,9"."""
    out = []
    for part in spec.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise UsageError(f"empty seed specification {spec!r}")
    return out


def read_config(path: str) -> dict:
    """Plain key = value lines; '#' starts a comment."""
    cfg = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            k, v = line.split("=", 1)
            cfg[k.strip().replace("-", "_")] = v.strip()
    return cfg


def build_parser() -> _Parser:
    parser = _Parser(prog="dmk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, solver=False):
        p.add_argument("--config", help="key = value file; explicit flags win")
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--p", type=float, default=None)
        p.add_argument("--q", type=float, default=None)
        p.add_argument("--res", type=int, default=None,
                       help="grid resolution (nodes for n=2, band for n=3)")
        p.add_argument("--out", default=None, help="record output path (default stdout)")
        if solver:
            p.add_argument("--residual-tol", type=float, default=None)
            p.add_argument("--max-iters", type=int, default=None)
            p.add_argument("--steps", type=int, default=None,
                           help="continuity steps")

    p = sub.add_parser("solve", help="solve the Monge-Ampere equation for data f")
    common(p, solver=True)
    p.add_argument("--f", default=None, help="expression for the data")
    p.add_argument("--body-out", default=None, help="write the solution body here")

    for name, hlp in (("check-bm", "dual Brunn-Minkowski margins on a random corpus"),
                      ("check-mink", "Minkowski-type margins on a random corpus"),
                      ("equiv", "concavity / chord equivalence probe")):
        p = sub.add_parser(name, help=hlp)
        common(p)
        p.add_argument("--seeds", default=None, help='e.g. "1..100" or "3,5,8"')
        p.add_argument("--amplitude", type=float, default=None)
        p.add_argument("--min-margin", type=float, default=None)
        if name == "check-bm":
            p.add_argument("--lambdas", default=None, help="comma-separated in (0,1)")
        p.add_argument("--plot", default=None,
                       help="two-column (instance, margin) plot data path")

    p = sub.add_parser("uniq", help="multi-start uniqueness probe")
    common(p, solver=True)
    p.add_argument("--f", default=None)
    p.add_argument("--inits", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("audit-c0", help="sup-norm growth audit for pinched data")
    common(p, solver=True)
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--instances", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("search", help="counterexample search for negative margins")
    common(p)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--lam", type=float, default=None, help="combination weight")

    p = sub.add_parser("gen", help="generate a random symmetric body corpus")
    common(p)
    p.add_argument("--seeds", default=None)
    p.add_argument("--amplitude", type=float, default=None)
    p.add_argument("--band", type=int, default=None)
    p.add_argument("--min-margin", type=float, default=None)
    p.add_argument("--out-dir", default=None)
    return parser


_DEFAULTS = {
    "n": 2, "p": 0.5, "q": 1.8, "amplitude": 0.3, "min_margin": 0.2,
    "inits": 5, "seed": 0, "lam": 1.2, "instances": 20, "budget": 200,
    "band": 8, "out_dir": ".", "seeds": "1..20", "f": "1", "lambdas": "0.25,0.5,0.75",
}
_TYPES = {"n": int, "p": float, "q": float, "res": int, "residual_tol": float,
          "max_iters": int, "steps": int, "amplitude": float, "min_margin": float,
          "inits": int, "seed": int, "lam": float, "instances": int,
          "budget": int, "band": int}


def _resolve(args) -> argparse.Namespace:
    """Fill unset flags from the config file, then from built-in defaults."""
    cfg = read_config(args.config) if getattr(args, "config", None) else {}
    for key, raw in cfg.items():
        if not hasattr(args, key):
            raise UsageError(f"unknown config key {key!r}")
        if getattr(args, key) is None:
            setattr(args, key, _TYPES.get(key, str)(raw))
    for key, val in _DEFAULTS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, val)
    return args


def _grid(args):
    res = args.res if args.res is not None else (512 if args.n == 2 else 32)
    return build_grid(args.n, res)


def _solver_cfg(args, grid) -> SolverConfig:
    kw = {}
    if getattr(args, "residual_tol", None) is not None:
        kw["residual_tol"] = args.residual_tol
    elif grid.dimension == 3:
        kw["residual_tol"] = 1e-8       # S^2 spectral noise floor
    if getattr(args, "max_iters", None) is not None:
        kw["max_newton_iters"] = args.max_iters
    if getattr(args, "steps", None) is not None:
        kw["continuity_steps"] = args.steps
    return SolverConfig(**kw)


def _data_field(args, grid) -> ScalarField:
    vals = evaluate_on_grid(parse_expression(args.f), grid)
    if np.any(vals <= 0.0):
        raise UsageError(f"data {args.f!r} is not positive on the grid")
    return ScalarField(grid, vals)


def _corpus_pair(seed, args, grid):
    K = random_symmetric_body(2 * seed, args.amplitude, 8, grid=grid,
                              min_margin=args.min_margin, n=args.n)
    L = random_symmetric_body(2 * seed + 1, args.amplitude, 8, grid=grid,
                              min_margin=args.min_margin, n=args.n)
    return K, L


def _confirm_violation(seed, args, lam_set, kind) -> bool:
    """Re-evaluate a negative margin at doubled resolution; confirmed only if
    it stays below 10x the estimated discretization error."""
    fine = build_grid(args.n, 2 * args.res if args.res else (1024 if args.n == 2 else 64))
    K, L = _corpus_pair(seed, args, fine)
    if kind == "BM":
        rep = harness.check_bm(K, L, args.p, args.q, lam_set)
    else:
        rep = harness.check_minkowski(K, L, args.p, args.q)
    return rep.min_margin < -10.0 * harness.EQUALITY_TOL


def _emit(lines, args, writer):
    writer("# timestamp=" + datetime.now(timezone.utc).isoformat())
    for line in lines:
        writer(line)


def _run_pairwise(args, writer, kind) -> int:
    grid = _grid(args)
    seeds = parse_seed_spec(args.seeds)
    lam_set = tuple(float(s) for s in args.lambdas.split(",")) \
        if getattr(args, "lambdas", None) else (0.25, 0.5, 0.75)
    lines, plot, worst, suspect = [], [], np.inf, []
    for seed in seeds:
        K, L = _corpus_pair(seed, args, grid)
        if kind == "BM":
            rep = harness.check_bm(K, L, args.p, args.q, lam_set)
        elif kind == "MINK":
            rep = harness.check_minkowski(K, L, args.p, args.q)
        else:
            rep = harness.equivalence_probe(K, L, args.p, args.q)
        rep.params["seed"] = seed
        lines.extend(report_records(rep))
        plot.append((seed, rep.min_margin))
        worst = min(worst, rep.min_margin)
        if rep.min_margin < -harness.EQUALITY_TOL:
            suspect.append(seed)
    confirmed = [s for s in suspect
                 if kind != "EQUIV" and _confirm_violation(s, args, lam_set, kind)]
    lines.append(format_record({
        "summary": kind.lower(), "pairs": len(seeds), "min_margin": worst,
        "suspect": len(suspect), "confirmed": len(confirmed)}))
    _emit(lines, args, writer)
    if args.plot:
        with open(args.plot, "w") as fh:
            for s, m in plot:
                fh.write("%d %.17g\n" % (s, m))
    return EXIT_VIOLATION if confirmed else EXIT_OK


def _run(args, writer) -> int:
    if args.command == "solve":
        params = ProblemParams(args.n, args.p, args.q)
        params.require_solver_range()
        grid = _grid(args)
        f = _data_field(args, grid)
        body, rep = solve_lp_dual_minkowski(f, params, _solver_cfg(args, grid))
        lines = [format_record({
            "command": "solve", "n": args.n, "p": args.p, "q": args.q,
            "converged": rep.converged, "residual": rep.final_residual,
            "iterations": sum(rep.iterations), "wall_time": rep.wall_time,
            "max_h": float(body.support.values.max()),
            "min_h": float(body.support.values.min())})]
        _emit(lines, args, writer)
        if args.body_out:
            write_body(body, args.body_out)
        return EXIT_OK if rep.converged else EXIT_SOLVER

    if args.command in ("check-bm", "check-mink", "equiv"):
        ProblemParams(args.n, args.p, args.q)
        kind = {"check-bm": "BM", "check-mink": "MINK", "equiv": "EQUIV"}[args.command]
        return _run_pairwise(args, writer, kind)

    if args.command == "uniq":
        params = ProblemParams(args.n, args.p, args.q)
        params.require_solver_range()
        grid = _grid(args)
        rep = harness.uniqueness_probe(_data_field(args, grid), params,
                                       n_inits=args.inits, seed=args.seed)
        _emit(report_records(rep), args, writer)
        return EXIT_SOLVER if rep.inconclusive else EXIT_OK

    if args.command == "audit-c0":
        params = ProblemParams(args.n, args.p, args.q)
        params.require_solver_range()
        rep = harness.c0_audit(args.lam, params, n_instances=args.instances,
                               seed=args.seed)
        _emit(report_records(rep), args, writer)
        return EXIT_SOLVER if rep.failures else EXIT_OK

    if args.command == "search":
        ProblemParams(args.n, args.p, args.q)
        rep = harness.counterexample_search(args.p, args.q, args.n,
                                            budget=args.budget, seed=args.seed)
        lines = [format_record({
            "command": "search", **rep.params,
            "best_margin": rep.details["best_margin"],
            "confirmed": rep.details["confirmed"]})]
        _emit(lines, args, writer)
        return EXIT_VIOLATION if rep.details["confirmed"] else EXIT_OK

    if args.command == "gen":
        grid = _grid(args)
        lines = []
        for seed in parse_seed_spec(args.seeds):
            K = random_symmetric_body(seed, args.amplitude, args.band,
                                      grid=grid, min_margin=args.min_margin,
                                      n=args.n)
            path = f"{args.out_dir}/body_n{args.n}_seed{seed}.txt"
            write_body(K, path)
            lines.append(format_record({
                "command": "gen", "seed": seed, "path": path,
                "margin": K.convexity_margin}))
        _emit(lines, args, writer)
        return EXIT_OK

    raise UsageError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    out_fh = None
    try:
        args = _resolve(build_parser().parse_args(argv))
        if getattr(args, "out", None):
            out_fh = open(args.out, "w")
            writer = lambda s: print(s, file=out_fh)
        else:
            writer = print
        return _run(args, writer)
    except (UsageError, ParameterError, BodyError, ExpressionError, ValueError,
            OSError) as exc:
        print(format_record({"error": "usage", "message": str(exc)}),
              file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(format_record({"error": "solver", "message": str(exc)}),
              file=sys.stderr)
        return EXIT_SOLVER
    finally:
        if out_fh:
            out_fh.close()


if __name__ == "__main__":
    sys.exit(main())
