"""bidscape command line: solve, bound, lp-alpha and gen."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from pathlib import Path

from . import clickprice, exact, factor_lp, instances, oracle, serialize, uniform
from .graph import Instance, MixedStrategy, StructureError, evaluate_mixed
from .landscape import MICRO, convex_hull
from .simplex import SolverError

EXIT_OK, EXIT_IO, EXIT_STRUCTURE, EXIT_SOLVER = 0, 1, 2, 3

METHODS = (
    "uniform", "single", "matching", "stars", "nested", "laminar",
    "laminar-random", "oracle", "oracle-det", "approx-half", "approx-e",
)


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def money(micro: float) -> dict:
    """Money as raw micro-units plus a decimal currency string."""
    raw = int(micro) if float(micro).is_integer() else round(float(micro), 3)
    return {"micro": raw, "amount": f"{micro / MICRO:.6f}"}


def threads() -> int:
    raw = os.environ.get("BIDSCAPE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise CliError(f"BIDSCAPE_THREADS must be an integer, got {raw!r}", EXIT_STRUCTURE)
    return max(1, n)


def _load(path: str) -> Instance:
    try:
        return serialize.load(path)
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror or e}", EXIT_IO)
    except (json.JSONDecodeError, ValueError) as e:
        raise CliError(f"{path}: {e}", EXIT_IO)


def _budget(inst: Instance, given: int | None) -> int:
    budget = inst.budget if given is None else given
    if budget is None:
        raise CliError("no budget: pass --budget or set one in the instance", EXIT_STRUCTURE)
    if budget < 0:
        raise CliError("budget must be >= 0", EXIT_STRUCTURE)
    return budget


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as e:
        raise CliError(f"cannot write {path}: {e.strerror or e}", EXIT_IO)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _grid(inst: Instance, step: int | None):
    return None if step is None else oracle.default_grid(inst, step)


def _run_method(inst: Instance, budget: int, method: str, atoms: int, step: int | None) -> MixedStrategy:
    if method == "uniform":
        return uniform.best_uniform(inst, budget).to_mixed(inst)
    if method == "single":
        return uniform.best_single_bid(inst, budget).to_mixed(inst)
    if method == "approx-half":
        return clickprice.half_strategy(inst, budget).to_mixed(inst)
    if method == "approx-e":
        return clickprice.one_minus_inv_e_strategy(inst, budget, atoms).to_mixed(inst)
    if method == "matching":
        return exact.solve_matching(inst, budget).strategy
    if method == "stars":
        return exact.solve_union_of_stars(inst, budget).strategy
    if method == "nested":
        return exact.solve_nested_dp(inst, budget, _grid(inst, step)).strategy
    if method == "laminar":
        return exact.solve_laminar_dp(inst, budget, _grid(inst, step)).strategy
    if method == "laminar-random":
        return exact.solve_laminar_randomized(inst, budget, _grid(inst, step)).strategy
    if method == "oracle":
        return oracle.brute_force_randomized(inst, budget, _grid(inst, step)).strategy
    if method == "oracle-det":
        return oracle.brute_force_deterministic(inst, budget, _grid(inst, step)).strategy
    raise CliError(f"unknown method {method!r}", EXIT_STRUCTURE)


def cmd_solve(args) -> dict:
    inst = _load(args.instance)
    budget = _budget(inst, args.budget)
    threads()
    start = time.perf_counter()
    strategy = _run_method(inst, budget, args.method, args.atoms, args.grid_step)
    elapsed = time.perf_counter() - start
    # never trust a solver's own accounting
    spend, traffic = evaluate_mixed(inst, strategy)
    if spend > budget + 1:
        raise CliError(f"{args.method} overspent: {spend} > {budget}", EXIT_SOLVER)
    omega = clickprice.omega_bound(inst, budget)
    ratio = traffic / omega.clicks if omega.clicks > 0 else None
    report = {
        "method": args.method,
        "budget": money(budget),
        "spend": money(spend),
        "traffic": traffic,
        "omega": {"clicks": omega.clicks, "spend": money(omega.spend)},
        "ratio": ratio,
        "strategy": [
            {"weight": w, "bids": [[k, money(b)] for k, b in bids.items()]} for bids, w in strategy.atoms
        ],
        "wall_time_s": elapsed,
    }
    _write(args.out, json.dumps(report, indent=1) + "\n")
    return report


def cmd_bound(args) -> dict:
    inst = _load(args.instance)
    budget = _budget(inst, args.budget)
    omega = clickprice.omega_bound(inst, budget)
    curve = clickprice.build_curve(omega)
    if curve.area != omega.spend:
        raise CliError(f"curve area {curve.area} differs from adversary spend {omega.spend}", EXIT_SOLVER)
    rows, cum = [], 0.0
    for s in curve.steps:
        rows.append([cum, cum + s.width, f"{s.height:.6f}", s.area, s.bid])
        cum += s.width
    curve_csv = _csv(["clicks_from", "clicks_to", "height_micro", "area_micro", "bid_micro"], rows)
    report = {"clicks": omega.clicks, "spend": money(omega.spend), "steps": len(curve.steps)}
    if args.curve_out:
        _write(args.curve_out, curve_csv)
    if args.hull_out:
        agg = uniform.aggregate(inst)
        hull = convex_hull(agg)
        _write(args.hull_out, _csv(["cost_micro", "clicks", "bid_micro"], [[p.cost, p.clicks, p.bid] for p in hull]))
    _write(args.out, json.dumps(report, indent=1) + "\n")
    if not args.curve_out and args.out in (None, "-"):
        sys.stdout.write(curve_csv)
    return report


def cmd_lp_alpha(args) -> dict:
    eps = args.epsilon
    if not 0 < eps <= 0.25:
        raise CliError("--epsilon must lie in (0, 0.25]", EXIT_STRUCTURE)
    n = 1 / eps
    if abs(n - round(n)) > 1e-9 * n:
        raise CliError("--epsilon must divide 1", EXIT_STRUCTURE)
    try:
        alpha = factor_lp.search_alpha(eps)
        result = factor_lp.solve_factor(factor_lp.FactorGrid(eps, alpha))
    except SolverError as e:
        raise CliError(f"LP solver failed: {e}", EXIT_SOLVER)
    grid = result.grid
    worst = clickprice.worst_case_curve(grid.points)
    primal = _csv(["r", "h", "worst_case_h"], [[f"{r:.6f}", f"{h:.9f}", f"{w:.9f}"]
                                               for r, h, w in zip(grid.points, result.h, worst)])
    mix = factor_lp.dual_to_strategy(result)
    dual = _csv(["r", "weight"], [[f"{r:.6f}", f"{p:.9f}"] for r, p in mix])
    report = {
        "epsilon": eps,
        "alpha": alpha,
        "reference": 1 - 1 / math.e,
        "primal_objective": result.objective,
        "dual_objective": result.dual_objective,
    }
    if args.out:
        out = Path(args.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise CliError(f"cannot create {out}: {e.strerror or e}", EXIT_IO)
        _write(str(out / "primal_curve.csv"), primal)
        _write(str(out / "dual_mixture.csv"), dual)
        report["files"] = [str(out / "primal_curve.csv"), str(out / "dual_mixture.csv")]
        sys.stdout.write(json.dumps(report, indent=1) + "\n")
    else:
        sys.stdout.write(json.dumps(report, indent=1) + "\n\n" + primal + "\n" + dual)
    return report


def _parse_graph(text: str) -> list[tuple[int, int]]:
    edges = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        u, sep, v = part.partition("-")
        if not sep:
            raise ValueError(f"edge {part!r} is not of the form u-v")
        edges.append((int(u), int(v)))
    return edges


def _parse_sets(text: str) -> list[list[int]]:
    return [[int(x) for x in s.split(",") if x.strip()] for s in text.split(";")]


def cmd_gen(args) -> Instance:
    kind = args.kind
    try:
        if kind == "tight":
            spec = instances.CurveSpec(clickprice.worst_case_curve, slack=args.slack)
            inst = instances.build_tight_instance(spec)
        elif kind == "single-bid-tight":
            inst, _ = instances.tight_single_bid_instance(args.alpha, args.eps)
        elif kind == "vc":
            if args.graph is None:
                raise ValueError("--graph is required for kind=vc")
            edges = _parse_graph(args.graph)
            n = args.vertices if args.vertices is not None else max((max(e) for e in edges), default=-1) + 1
            inst, _ = instances.from_vertex_cover((list(range(n)), edges), args.k_star)
        elif kind == "coverage":
            if args.sets is None:
                raise ValueError("--sets is required for kind=coverage")
            inst, _ = instances.from_max_coverage(_parse_sets(args.sets), args.k_star)
        elif kind == "random":
            inst = instances.random_instance(args.seed, args.keywords, args.queries, args.max_slots, args.structure)
        else:
            raise ValueError(f"unknown kind {kind!r}")
    except ValueError as e:
        raise CliError(f"gen {kind}: {e}", EXIT_IO)
    _write(args.out, serialize.dumps(inst))
    return inst


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bidscape", description="Budget optimization for keyword auctions.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve an instance and print a JSON report")
    s.add_argument("--instance", required=True)
    s.add_argument("--budget", type=int, help="budget in micro-units (default: the instance's)")
    s.add_argument("--method", choices=METHODS, default="uniform")
    s.add_argument("--atoms", type=int, default=256, help="mixture size for approx-e")
    s.add_argument("--grid-step", type=int, help="budget unit in micro-units for DP and oracle methods")
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bound", help="adversary bound and click-price curve")
    b.add_argument("--instance", required=True)
    b.add_argument("--budget", type=int)
    b.add_argument("--curve-out", help="CSV file for the click-price curve")
    b.add_argument("--hull-out", help="CSV file for the aggregate landscape hull")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bound)

    a = sub.add_parser("lp-alpha", help="approximation ratio from the factor-revealing LP")
    a.add_argument("--epsilon", type=float, required=True)
    a.add_argument("--out", help="directory for the two CSV files")
    a.set_defaults(func=cmd_lp_alpha)

    g = sub.add_parser("gen", help="generate an instance JSON")
    g.add_argument("--kind", required=True, choices=("tight", "single-bid-tight", "vc", "coverage", "random"))
    g.add_argument("--alpha", type=float, default=0.5)
    g.add_argument("--eps", type=float, default=0.01, help="small bid in currency units (single-bid-tight)")
    g.add_argument("--slack", type=float, default=1e-3, help="extra budget in currency units (tight)")
    g.add_argument("--graph", help="edges as 'u-v,u-v,...' over integer vertices (vc)")
    g.add_argument("--vertices", type=int, help="vertex count, if some are isolated (vc)")
    g.add_argument("--sets", help="sets as '1,2;2,3' (coverage)")
    g.add_argument("--k-star", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--keywords", type=int, default=4)
    g.add_argument("--queries", type=int, default=6)
    g.add_argument("--max-slots", type=int, default=3)
    g.add_argument("--structure", choices=instances.STRUCTURES, default="general")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CliError as e:
        print(f"bidscape: {e}", file=sys.stderr)
        return e.code
    except StructureError as e:
        print(f"bidscape: structure mismatch: {e}", file=sys.stderr)
        return EXIT_STRUCTURE
    except (SolverError, exact.GridOverflowError, oracle.SearchSpaceError) as e:
        print(f"bidscape: solver failure: {e}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
