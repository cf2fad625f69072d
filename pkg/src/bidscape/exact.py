"""Exact solvers for structured keyword graphs.

Matchings and disjoint unions of stars reduce to a fractional knapsack
over query hulls.  Nested and laminar neighbourhood families are solved
by dynamic programming over the inclusion tree on a discrete grid of
bids and budgets: keyword i bids at least as much as any keyword whose
neighbourhood contains its own, so each query is decided by the
innermost keyword covering it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np

from .graph import (
    Instance,
    MixedStrategy,
    Query,
    Solution,
    StructureError,
    _components,
    evaluate,
    evaluate_mixed,
    validate,
)
from .knapsack import greedy_fill
from .landscape import hull_indices, mix_on_hull
from .oracle import GridSpec, default_grid
from .uniform import aggregate

MAX_DP_CELLS = 50_000_000


class GridOverflowError(ValueError):
    """The DP table for the requested grid would be too large."""


def solve_matching(instance: Instance, budget: int) -> Solution:
    """Optimal randomized strategy on a matching graph (greedy over hull pieces)."""
    if not validate(instance).matching:
        raise StructureError("solve_matching requires a matching graph (all degrees <= 1)")
    adj = instance.query_keywords
    queries = instance.covered_queries
    hulls = []
    for q in queries:
        ls = q.landscape
        clicks = ls.clicks * q.weight
        idx = hull_indices(ls.costs, clicks)
        hulls.append((ls.costs[idx], clicks[idx], ls.bids[idx]))
    alloc = greedy_fill([(xs, ys) for xs, ys, _ in hulls], budget)
    base = {k: 0 for k in instance.keywords}
    alt = None
    for q, (_, _, bids), a in zip(queries, hulls, alloc):
        k = adj[q.id][0]
        base[k] = int(bids[a.vertex])
        if a.extra_cost:
            alt = (k, int(bids[a.vertex + 1]), a.fraction)
    if alt is None:
        strategy = MixedStrategy.pure(base)
    else:
        k, bid, f = alt
        other = dict(base)
        other[k] = bid
        strategy = MixedStrategy(((base, 1.0 - f), (other, f)))
    spend, traffic = evaluate_mixed(instance, strategy)
    return Solution(strategy, spend, traffic)


def star_transform(instance: Instance) -> Instance:
    """Rewrite a disjoint union of stars as a matching.

    A keyword-centred star becomes one query carrying the aggregate
    landscape of its leaves; a query-centred star keeps only its first
    keyword.
    """
    if not validate(instance).star_union:
        raise StructureError("graph is not a disjoint union of stars")
    queries: list[Query] = []
    edges = []
    order = instance.keyword_index
    for ks, qs in _components(instance):
        if not qs:
            continue
        if len(qs) == 1:
            (qid,) = qs
            k = min(ks, key=order.__getitem__)
            queries.append(instance.query(qid))
            edges.append((k, qid))
            continue
        (k,) = ks
        leaves = [q for q in instance.queries if q.id in qs]
        sub = Instance((k,), leaves, [(k, q.id) for q in leaves])
        star = ("star", k)
        queries.append(Query(star, aggregate(sub), 1.0))
        edges.append((k, star))
    return Instance(instance.keywords, queries, edges, instance.budget)


def solve_union_of_stars(instance: Instance, budget: int) -> Solution:
    matched = solve_matching(star_transform(instance), budget)
    spend, traffic = evaluate_mixed(instance, matched.strategy)
    return Solution(matched.strategy, spend, traffic)


# ---------------------------------------------------------------------------
# inclusion tree of keyword neighbourhoods


@dataclass
class _Node:
    keywords: list
    queries: frozenset
    children: list = field(default_factory=list)
    own: frozenset = frozenset()


def _build_tree(instance: Instance) -> list[_Node]:
    """Roots of the inclusion forest; equal neighbourhoods share one node."""
    groups: dict[frozenset, list] = {}
    for k in instance.keywords:
        qs = instance.keyword_queries[k]
        if qs:
            groups.setdefault(qs, []).append(k)
    nodes = [_Node(ks, qs) for qs, ks in groups.items()]
    nodes.sort(key=lambda n: len(n.queries))
    roots = []
    for i, n in enumerate(nodes):
        parent = next((m for m in nodes[i + 1:] if n.queries < m.queries), None)
        (roots if parent is None else parent.children).append(n)
    for n in nodes:
        covered = frozenset().union(*(c.queries for c in n.children))
        n.own = n.queries - covered
    return roots


def binarize_laminar(instance: Instance) -> Instance:
    """Add dummy keywords until every inclusion-tree node has at most two children.

    A dummy covers the union of two siblings and replaces them under their
    parent.  Top-level sets are treated as children of a virtual root.
    """
    if not validate(instance).laminar:
        raise StructureError("binarize_laminar requires a laminar graph")
    roots = _build_tree(instance)
    taken = {str(k) for k in instance.keywords}
    dummies: list[tuple[str, frozenset]] = []

    def new_id() -> str:
        n = len(dummies)
        while f"~dummy{n}" in taken:
            n += 1
        taken.add(f"~dummy{n}")
        return f"~dummy{n}"

    def fix(children: list) -> list:
        children = list(children)
        while len(children) > 2:
            a, b = children[0], children[1]
            d = _Node([new_id()], a.queries | b.queries, [a, b])
            dummies.append((d.keywords[0], d.queries))
            children = [d] + children[2:]
        return children

    stack = [fix(roots)]
    while stack:
        for n in stack.pop():
            n.children = fix(n.children)
            stack.append(n.children)
    if not dummies:
        return instance
    edges = list(instance.edges)
    qorder = instance.query_index
    for k, qs in dummies:
        edges += [(k, q) for q in sorted(qs, key=qorder.__getitem__)]
    return Instance(instance.keywords + tuple(k for k, _ in dummies), instance.queries, edges, instance.budget)


# ---------------------------------------------------------------------------
# dynamic programme


@dataclass(frozen=True)
class BudgetSweep:
    """Optimal deterministic traffic at each budget in ``budgets`` (increasing)."""

    budgets: tuple
    traffic: tuple
    solutions: tuple | None = None

    def __post_init__(self):
        if len(self.budgets) != len(self.traffic) or not self.budgets:
            raise ValueError("sweep needs matching, non-empty budgets and traffic")
        if any(b <= a for a, b in zip(self.budgets, self.budgets[1:])):
            raise ValueError("sweep budgets must be strictly increasing")
        if any(b < a - 1e-12 for a, b in zip(self.traffic, self.traffic[1:])):
            raise ValueError("sweep traffic must be non-decreasing in the budget")


@dataclass(frozen=True)
class BudgetMix:
    """Lottery over sweep entries: ``weights`` holds (sweep index, probability)."""

    weights: tuple[tuple[int, float], ...]
    spend: float
    traffic: float
    strategy: MixedStrategy | None = None


def randomize_over_budgets(sweep: BudgetSweep, budget: float | None = None) -> BudgetMix:
    """Best lottery over the swept deterministic solutions with expected budget <= ``budget``."""
    budget = sweep.budgets[-1] if budget is None else budget
    idx = hull_indices(sweep.budgets, sweep.traffic)
    xs = [sweep.budgets[i] for i in idx]
    i, j, w = mix_on_hull(xs, budget)
    weights = [(idx[i], 1.0 - w)] if i == j or w == 0 else [(idx[i], 1.0 - w), (idx[j], w)]
    spend = sum(p * sweep.budgets[k] for k, p in weights)
    traffic = sum(p * sweep.traffic[k] for k, p in weights)
    strategy = None
    if sweep.solutions is not None:
        strategy = MixedStrategy(tuple((sweep.solutions[k], p) for k, p in weights))
    return BudgetMix(tuple(weights), float(spend), float(traffic), strategy)


class _TreeDP:
    """F[node][l, u]: best clicks in the node's subtree when it bids level l,
    every descendant bids at least level l, and at most u budget units go in.
    Infeasible cells hold -inf.
    """

    def __init__(self, instance: Instance, roots: list[_Node], grid: GridSpec, units: int):
        if any(len(n.children) > 2 for n in _walk(roots)) or len(roots) > 2:
            raise StructureError("inclusion tree must be binary; binarize first")
        self.levels = np.asarray(grid.bids, dtype=np.int64)
        self.step = grid.budget_step
        n_lv, width = len(self.levels), units + 1
        nodes = list(_walk(roots))
        cells = n_lv * width * (len(nodes) + 1)
        conv = n_lv * width * width * sum(len(n.children) == 2 for n in nodes)
        if cells > MAX_DP_CELLS or conv > 20 * MAX_DP_CELLS:
            raise GridOverflowError(f"DP needs {cells} cells / {conv} convolution steps")
        self.instance = instance
        self.units = units
        self.top = _Node([], frozenset(), list(roots), frozenset())
        self.F: dict[int, np.ndarray] = {}
        self.G: dict[int, np.ndarray] = {}
        self.argG: dict[int, np.ndarray] = {}
        self.cost_units: dict[int, np.ndarray] = {}
        for n in _postorder_list(self.top):
            self._solve(n)

    def _incremental(self, node: _Node):
        n_lv = len(self.levels)
        clicks = np.zeros(n_lv)
        units = np.zeros(n_lv, dtype=np.int64)
        for qid in sorted(node.own, key=self.instance.query_index.__getitem__):
            q = self.instance.query(qid)
            i = q.landscape.index_at(self.levels)
            clicks += q.weight * q.landscape.clicks[i]
            units += -(-q.landscape.costs[i] // self.step)
        return clicks, units

    def _children_value(self, node: _Node) -> np.ndarray:
        n_lv, width = len(self.levels), self.units + 1
        if not node.children:
            return np.zeros((n_lv, width))
        if len(node.children) == 1:
            return self.G[id(node.children[0])]
        g1, g2 = (self.G[id(c)] for c in node.children)
        h = np.empty((n_lv, width))
        for w in range(width):
            h[:, w] = (g1[:, : w + 1] + g2[:, w::-1]).max(axis=1)
        return h

    def _solve(self, node: _Node):
        n_lv, width = len(self.levels), self.units + 1
        clicks, units = self._incremental(node)
        self.cost_units[id(node)] = units
        h = self._children_value(node)
        f = np.full((n_lv, width), -np.inf)
        for l in range(n_lv):
            s = int(units[l])
            if s < width:
                f[l, s:] = clicks[l] + h[l, : width - s]
        g = f.copy()
        arg = np.tile(np.arange(n_lv)[:, None], (1, width))
        for l in range(n_lv - 2, -1, -1):
            better = g[l + 1] > g[l]
            g[l] = np.where(better, g[l + 1], g[l])
            arg[l] = np.where(better, arg[l + 1], arg[l])
        self.F[id(node)], self.G[id(node)], self.argG[id(node)] = f, g, arg

    def value(self, units: int) -> float:
        return float(self.F[id(self.top)][0, units])

    def sweep_values(self) -> np.ndarray:
        return self.F[id(self.top)][0].copy()

    def trace(self, units: int) -> dict:
        bids: dict = {}
        stack = [(self.top, 0, units)]
        while stack:
            node, l, u = stack.pop()
            for k in node.keywords:
                bids[k] = int(self.levels[l])
            u -= int(self.cost_units[id(node)][l])
            ch = node.children
            if len(ch) == 1:
                c = ch[0]
                stack.append((c, int(self.argG[id(c)][l, u]), u))
            elif len(ch) == 2:
                g1, g2 = self.G[id(ch[0])], self.G[id(ch[1])]
                v = int(np.argmax(g1[l, : u + 1] + g2[l, u::-1]))
                stack.append((ch[0], int(self.argG[id(ch[0])][l, v]), v))
                stack.append((ch[1], int(self.argG[id(ch[1])][l, u - v]), u - v))
        return bids


def _walk(roots):
    stack = list(roots)
    while stack:
        n = stack.pop()
        yield n
        stack.extend(n.children)


def _postorder_list(top: _Node) -> list[_Node]:
    out, stack = [], [(top, False)]
    while stack:
        n, done = stack.pop()
        if done:
            out.append(n)
            continue
        stack.append((n, True))
        stack.extend((c, False) for c in n.children)
    return out


def _check_grid(grid: GridSpec, budget: int) -> int:
    if budget < 0:
        raise ValueError("budget must be >= 0")
    return budget // grid.budget_step


def _finish(instance: Instance, dp: _TreeDP, units: int) -> Solution:
    raw = dp.trace(units)
    bids = {k: raw.get(k, 0) for k in instance.keywords}
    spend, traffic = evaluate(instance, bids)
    return Solution(MixedStrategy.pure(bids), float(spend), traffic)


def solve_nested_dp(instance: Instance, budget: int, grid: GridSpec | None = None) -> Solution:
    """Optimal deterministic bid vector for nested neighbourhoods.

    Costs are rounded up to whole budget units, so the result is exact
    when every cost is a multiple of ``grid.budget_step``.
    """
    if not validate(instance).nested:
        raise StructureError("solve_nested_dp requires nested keyword neighbourhoods")
    grid = default_grid(instance) if grid is None else grid
    units = _check_grid(grid, budget)
    dp = _TreeDP(instance, _build_tree(instance), grid, units)
    return _finish(instance, dp, units)


def _laminar_dp(instance: Instance, budget: int, grid: GridSpec | None):
    if not validate(instance).laminar:
        raise StructureError("solve_laminar_dp requires laminar keyword neighbourhoods")
    grid = default_grid(instance) if grid is None else grid
    units = _check_grid(grid, budget)
    binary = binarize_laminar(instance)
    return binary, _TreeDP(binary, _build_tree(binary), grid, units), units


def solve_laminar_dp(instance: Instance, budget: int, grid: GridSpec | None = None) -> Solution:
    """Optimal deterministic bid vector for laminar neighbourhoods (dummies stripped)."""
    _, dp, units = _laminar_dp(instance, budget, grid)
    return _finish(instance, dp, units)


def _max_spend(instance: Instance, grid: GridSpec) -> int:
    top = max(grid.bids)
    return sum(int(q.landscape.cost_clicks_at(top)[0]) for q in instance.covered_queries)


def laminar_sweep(
    instance: Instance, budget: int | None = None, grid: GridSpec | None = None, with_solutions: bool = True
) -> BudgetSweep:
    """Optimal deterministic traffic at every grid budget up to ``budget``.

    The default range ends where bidding the top grid level everywhere
    is affordable, beyond which traffic cannot grow.
    """
    grid = default_grid(instance) if grid is None else grid
    budget = _max_spend(instance, grid) if budget is None else budget
    _, dp, units = _laminar_dp(instance, budget, grid)
    values = dp.sweep_values()
    sols = None
    if with_solutions:
        sols = tuple({k: dp.trace(u).get(k, 0) for k in instance.keywords} for u in range(units + 1))
    return BudgetSweep(tuple(u * dp.step for u in range(units + 1)), tuple(float(v) for v in values), sols)


def solve_laminar_randomized(instance: Instance, budget: int, grid: GridSpec | None = None) -> Solution:
    """Optimal lottery over deterministic laminar solutions across budgets.

    Sweeps every grid budget, takes the upper hull of (budget, traffic)
    and mixes the two optima bracketing ``budget``.
    """
    grid = default_grid(instance) if grid is None else grid
    ceiling = max(budget, _max_spend(instance, grid))
    _, dp, units = _laminar_dp(instance, ceiling, grid)
    values = dp.sweep_values()
    sweep = BudgetSweep(tuple(u * dp.step for u in range(units + 1)), tuple(float(v) for v in values))
    mix = randomize_over_budgets(sweep, budget)
    atoms = []
    for u, w in mix.weights:
        raw = dp.trace(u)
        atoms.append(({k: raw.get(k, 0) for k in instance.keywords}, w))
    strategy = MixedStrategy(tuple(atoms))
    spend, traffic = evaluate_mixed(instance, strategy)
    return Solution(strategy, spend, traffic)


def keyword_bid_normalize(instance: Instance, bids: dict) -> dict:
    """Raise a_i to max(a_i, a_j) whenever Q_i is a subset of Q_j."""
    out = dict(bids)
    nq = instance.keyword_queries
    changed = True
    while changed:
        changed = False
        for i in instance.keywords:
            for j in instance.keywords:
                if i != j and nq[i] <= nq[j] and out.get(j, 0) > out.get(i, 0):
                    out[i] = out[j]
                    changed = True
    return out
