"""Exhaustive reference solvers over a discrete bid grid.

Only the bids at which some query's outcome changes matter: any bid
between two consecutive interesting bids gets the same position, hence
the same cost and clicks, on every query.  So the default grid
``{0} + interesting bids`` loses nothing.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Instance, MixedStrategy, Solution, evaluate_mixed
from .uniform import interesting_bids

MAX_VECTORS = 10_000_000
_CHUNK = 1 << 16


class SearchSpaceError(ValueError):
    """The enumeration would exceed the search-space guard."""


@dataclass(frozen=True)
class GridSpec:
    """Bid levels (micro-units, sorted, containing 0) and a budget unit."""

    bids: tuple[int, ...]
    budget_step: int = 10_000

    def __post_init__(self):
        bids = tuple(sorted({int(b) for b in self.bids} | {0}))
        if self.budget_step <= 0:
            raise ValueError("budget_step must be positive")
        object.__setattr__(self, "bids", bids)


def default_grid(instance: Instance, budget_step: int = 10_000) -> GridSpec:
    return GridSpec(tuple(interesting_bids(instance)), budget_step)


def _tables(instance: Instance, levels: np.ndarray):
    kidx = instance.keyword_index
    adj = instance.query_keywords
    out = []
    for q in instance.covered_queries:
        ls = q.landscape
        i = ls.index_at(levels)
        out.append(([kidx[k] for k in adj[q.id]], ls.costs[i].astype(np.int64), q.weight * ls.clicks[i]))
    return out


def _enumerate(instance: Instance, grid: GridSpec, limit: int = MAX_VECTORS):
    """Yield (first index, spend, traffic) per chunk over all grid vectors.

    Vector index n encodes keyword j's level as digit j of n in base
    len(levels), keyword 0 most significant, so index order is
    lexicographic order.
    """
    levels = np.asarray(grid.bids, dtype=np.int64)
    n_kw, n_lv = len(instance.keywords), len(levels)
    total = n_lv ** n_kw
    if total > limit:
        raise SearchSpaceError(f"{total} grid vectors exceed the guard of {limit}")
    tables = _tables(instance, levels)
    powers = n_lv ** np.arange(n_kw - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        digits = (idx[:, None] // powers[None, :]) % n_lv
        spend = np.zeros(len(idx), dtype=np.int64)
        traffic = np.zeros(len(idx))
        for cols, cost_l, clicks_l in tables:
            eff = digits[:, cols].max(axis=1)
            spend += cost_l[eff]
            traffic += clicks_l[eff]
        yield start, spend, traffic


def decode(instance: Instance, grid: GridSpec, index: int) -> dict:
    n_lv = len(grid.bids)
    bids = {}
    for k in reversed(instance.keywords):
        index, d = divmod(index, n_lv)
        bids[k] = grid.bids[d]
    return {k: bids[k] for k in instance.keywords}


def brute_force_deterministic(instance: Instance, budget: int, grid: GridSpec | None = None) -> Solution:
    """Max-traffic grid vector with spend <= budget; ties go to the lexicographically smallest."""
    grid = default_grid(instance) if grid is None else grid
    best_t, best_i, best_s = -1.0, 0, 0
    for start, spend, traffic in _enumerate(instance, grid):
        t = np.where(spend <= budget, traffic, -1.0)
        top = t.max()
        if top > best_t + 1e-9:
            i = int(np.argmax(t >= top - 1e-9))
            best_t, best_i, best_s = float(t[i]), start + i, int(spend[i])
    bids = decode(instance, grid, best_i)
    return Solution(MixedStrategy.pure(bids), float(best_s), best_t)


def pareto_front(instance: Instance, grid: GridSpec | None = None):
    """Spend-sorted (spend, traffic, index) of grid vectors that beat every cheaper one."""
    grid = default_grid(instance) if grid is None else grid
    parts = []
    for start, spend, traffic in _enumerate(instance, grid):
        parts.append((spend, traffic, np.arange(start, start + len(spend))))
    spend = np.concatenate([p[0] for p in parts])
    traffic = np.concatenate([p[1] for p in parts])
    index = np.concatenate([p[2] for p in parts])
    # by spend, then by traffic descending, then by index
    order = np.lexsort((index, -traffic, spend))
    t = traffic[order]
    prev = np.concatenate(([-np.inf], np.maximum.accumulate(t)[:-1]))
    keep = order[t > prev + 1e-12]
    return spend[keep], traffic[keep], index[keep]


def brute_force_randomized(instance: Instance, budget: int, grid: GridSpec | None = None) -> Solution:
    """Best lottery over grid vectors with expected spend <= budget."""
    from .exact import BudgetSweep, randomize_over_budgets

    grid = default_grid(instance) if grid is None else grid
    spend, traffic, index = pareto_front(instance, grid)
    sweep = BudgetSweep(tuple(int(s) for s in spend), tuple(float(t) for t in traffic))
    mix = randomize_over_budgets(sweep, budget)
    atoms = tuple((decode(instance, grid, int(index[i])), w) for i, w in mix.weights)
    strategy = MixedStrategy(atoms)
    s, t = evaluate_mixed(instance, strategy)
    return Solution(strategy, s, t)
