"""Command-line front end.

Subcommands: dist, limit, tree-limit, test, ci, bootstrap, convergence.
All randomness flows from --seed (default 0) through per-draw substreams,
so identical invocations produce byte-identical output at any --workers.
Exit codes: 0 ok, 2 bad input or usage, 3 inconsistent data, 4 solver
failure.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import asdict

from . import inference, io, limits, resampling
from .errors import DataMismatchError, InputError, SolverError
from .ground import CostMatrix, Measure, build_cost
from .parallel import default_workers
from .transport import solve_ot
from .trees import tree_cost, tree_limit_sample


def _add_common(sp: argparse.ArgumentParser):
    sp.add_argument("--seed", type=int, default=0, help="base random seed (default 0)")
    sp.add_argument(
        "--workers",
        type=int,
        default=None,
        help="worker threads for draw loops (default: all cores); never affects values",
    )
    sp.add_argument("--output", default=None, help="write primary output to this file")


def _add_order(sp: argparse.ArgumentParser):
    sp.add_argument(
        "-p",
        "--order",
        dest="p",
        type=float,
        default=2.0,
        help="distance order p >= 1 (default 2)",
    )


def _add_cost_source(sp: argparse.ArgumentParser):
    group = sp.add_mutually_exclusive_group(required=True)
    group.add_argument("--cost", help="cost matrix CSV (entries are the p-th power costs)")
    group.add_argument("--points", help="points CSV; costs are Euclidean distances to the p")
    group.add_argument("--tree", help="tree CSV; costs are tree distances to the p")


def _load_cost(args) -> tuple[list[str], CostMatrix]:
    if args.cost is not None:
        labels, entries = io.read_cost(args.cost)
        return labels, CostMatrix(entries=entries, exponent=args.p)
    if args.points is not None:
        space = io.read_points(args.points)
        return list(space.labels), build_cost(space, args.p)
    tree = io.read_tree(args.tree)
    return list(tree.labels), tree_cost(tree, args.p)


def _load_measure(path: str, labels: list[str], what: str) -> Measure:
    got_labels, measure = io.read_measure(path)
    mass = io.align_values(got_labels, measure.mass, labels, what)
    return Measure(mass)


def _load_sample(path: str, labels: list[str], what: str):
    return io.align_observations(io.read_observations(path), labels, what)


def _workers(args) -> int:
    if args.workers is None:
        return default_workers()
    if args.workers < 1:
        raise InputError("--workers must be >= 1")
    return args.workers


def cmd_dist(args) -> int:
    labels, cost = _load_cost(args)
    r = _load_measure(args.r, labels, "measure r")
    s = _load_measure(args.s, labels, "measure s")
    sol = solve_ot(r, s, cost)
    payload = {
        "w_pp": sol.value_pp,
        "w_p": sol.value_pp ** (1.0 / args.p),
        "n_points": cost.n,
    }
    if args.plan is not None:
        io.write_plan(args.plan, labels, sol.plan)
    io.write_json(args.output, payload)
    return 0


def cmd_limit(args) -> int:
    labels, cost = _load_cost(args)
    r = _load_measure(args.r, labels, "measure r")
    s = _load_measure(args.s, labels, "measure s") if args.s is not None else None
    draws = limits.limit_sample(
        args.regime,
        r,
        s,
        cost,
        args.p,
        args.draws,
        seed=args.seed,
        lam=args.lam,
        workers=_workers(args),
    )
    io.write_draws(args.output, draws)
    return 0


def cmd_tree_limit(args) -> int:
    tree = io.read_tree(args.tree)
    r = _load_measure(args.r, list(tree.labels), "measure r")
    draws = tree_limit_sample(tree, r, args.p, args.draws, seed=args.seed)
    io.write_draws(args.output, draws)
    return 0


def cmd_test(args) -> int:
    labels, cost = _load_cost(args)
    x = _load_sample(args.x, labels, "sample x")
    y = _load_sample(args.y, labels, "sample y")
    report = inference.test_two_sample_null(
        x, y, cost, args.p, M=args.draws, seed=args.seed, workers=_workers(args)
    )
    io.write_json(args.output, asdict(report))
    return 0


def cmd_ci(args) -> int:
    labels, cost = _load_cost(args)
    x = _load_sample(args.x, labels, "sample x")
    y = _load_sample(args.y, labels, "sample y")
    ci = inference.ci_two_sample_alt(
        x,
        y,
        cost,
        args.p,
        level=args.level,
        M=args.draws,
        seed=args.seed,
        workers=_workers(args),
    )
    io.write_json(args.output, asdict(ci))
    return 0


def cmd_bootstrap(args) -> int:
    labels, cost = _load_cost(args)
    x = _load_sample(args.x, labels, "sample x")
    y = _load_sample(args.y, labels, "sample y")
    workers = _workers(args)
    if args.scheme == "naive":
        draws = resampling.naive_bootstrap(
            x, y, cost, args.p, args.reps, seed=args.seed, workers=workers
        )
    elif args.scheme == "m-of-n":
        draws = resampling.mofn_bootstrap(
            x, y, cost, args.p, args.reps, k=args.k, seed=args.seed, workers=workers
        )
    else:
        if args.k is not None:
            raise InputError("-k applies to the m-of-n scheme only")
        draws = resampling.derivative_bootstrap(
            x, y, cost, args.p, args.reps, seed=args.seed, workers=workers
        )
    io.write_bootstrap(args.output, draws)
    return 0


def cmd_convergence(args) -> int:
    n_list = [int(tok) for tok in args.n_list.split(",") if tok.strip()]
    rows = inference.convergence_study(
        args.grid_size,
        args.alpha,
        n_list,
        n_measures=args.measures,
        M=args.draws,
        seed=args.seed,
        p=args.p,
        workers=_workers(args),
    )
    io.write_convergence(args.output, rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wasserstat",
        description="Transport distances on finite spaces: exact solves, "
        "limit-law simulation, bootstraps, tests, and confidence intervals.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("dist", help="distance between two measures, optional plan export")
    sp.add_argument("--r", required=True, help="first measure CSV (id,mass)")
    sp.add_argument("--s", required=True, help="second measure CSV (id,mass)")
    sp.add_argument("--plan", default=None, help="also write the optimal plan CSV here")
    _add_cost_source(sp)
    _add_order(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_dist)

    sp = sub.add_parser("limit", help="sample a limiting distribution")
    sp.add_argument("--regime", required=True, choices=limits.REGIMES)
    sp.add_argument("--r", required=True, help="measure CSV (plug-in under null)")
    sp.add_argument("--s", default=None, help="second measure CSV (alternative regimes)")
    sp.add_argument("--lam", type=float, default=None, help="sample-balance weight (two-sample-alt)")
    sp.add_argument("-M", "--draws", type=int, default=20000, help="Monte Carlo draws (default 20000)")
    _add_cost_source(sp)
    _add_order(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_limit)

    sp = sub.add_parser("tree-limit", help="closed-form limit sample on a weighted tree")
    sp.add_argument("--tree", required=True, help="tree CSV (child,parent,weight)")
    sp.add_argument("--r", required=True, help="measure CSV on the tree nodes")
    sp.add_argument("-M", "--draws", type=int, default=20000)
    _add_order(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_tree_limit)

    sp = sub.add_parser("test", help="two-sample null test from count or observation files")
    sp.add_argument("--x", required=True, help="first sample (labels or id,count)")
    sp.add_argument("--y", required=True, help="second sample")
    sp.add_argument("-M", "--draws", type=int, default=20000)
    _add_cost_source(sp)
    _add_order(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_test)

    sp = sub.add_parser("ci", help="confidence interval for the two-sample distance")
    sp.add_argument("--x", required=True)
    sp.add_argument("--y", required=True)
    sp.add_argument("--level", type=float, default=0.95, help="nominal coverage (default 0.95)")
    sp.add_argument("-M", "--draws", type=int, default=20000)
    _add_cost_source(sp)
    _add_order(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_ci)

    sp = sub.add_parser("bootstrap", help="bootstrap replication of the two-sample statistic")
    sp.add_argument("--x", required=True)
    sp.add_argument("--y", required=True)
    sp.add_argument("--scheme", required=True, choices=resampling.SCHEMES)
    sp.add_argument("-B", "--reps", type=int, default=999, help="replications (default 999)")
    sp.add_argument("-k", type=int, default=None, help="resample size for m-of-n")
    _add_cost_source(sp)
    _add_order(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_bootstrap)

    sp = sub.add_parser("convergence", help="finite-sample vs limit study on an LxL grid")
    sp.add_argument("--grid-size", type=int, required=True, help="grid side length L")
    sp.add_argument("--alpha", type=float, default=1.0, help="Dirichlet concentration")
    sp.add_argument("--n-list", default="10,100,1000,5000", help="comma-separated sample sizes")
    sp.add_argument("--measures", type=int, default=5, help="number of random measures")
    sp.add_argument("-M", "--draws", type=int, default=20000)
    _add_order(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_convergence)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
