"""Uniform bidding: one common bid (or a lottery over a few) on every keyword."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Instance, MixedStrategy
from .landscape import CLICK_TOL, Landscape, hull_indices, mix_on_hull


def interesting_bids(instance: Instance) -> list[int]:
    """Sorted union of the bids at which some covered query's outcome changes."""
    bids: set[int] = set()
    for q in instance.covered_queries:
        bids.update(q.landscape.interesting_bids)
    return sorted(bids)


def aggregate(instance: Instance) -> Landscape:
    """Aggregate landscape: summed cost and weighted clicks of a uniform bid.

    Entry i holds the totals for bidding ``bids[i]`` on every keyword.
    Only queries adjacent to at least one keyword take part.
    """
    base_cost, base_clicks = 0, 0.0
    ev_bids, ev_cost, ev_clicks = [], [], []
    for q in instance.covered_queries:
        ls = q.landscape
        base_cost += int(ls.costs[0])
        base_clicks += q.weight * float(ls.clicks[0])
        if len(ls) > 1:
            ev_bids.append(ls.bids[1:])
            ev_cost.append(np.diff(ls.costs))
            ev_clicks.append(q.weight * np.diff(ls.clicks))
    if not ev_bids:
        return Landscape([0], [base_cost], [base_clicks])
    bids = np.concatenate(ev_bids)
    dcost = np.concatenate(ev_cost)
    dclicks = np.concatenate(ev_clicks)
    uniq, inv = np.unique(bids, return_inverse=True)
    step_cost = np.zeros(len(uniq), dtype=np.int64)
    np.add.at(step_cost, inv, dcost)
    step_clicks = np.bincount(inv, weights=dclicks, minlength=len(uniq))
    costs = base_cost + np.cumsum(step_cost)
    clicks = base_clicks + np.cumsum(step_clicks)
    return Landscape(
        np.concatenate(([0], uniq)),
        np.concatenate(([base_cost], costs)),
        np.concatenate(([base_clicks], clicks)),
    )


@dataclass(frozen=True)
class UniformStrategy:
    """Lottery over uniform bids; ``spend``/``traffic`` are its expectations.

    ``kind`` is ``"two-bid"``, ``"single-bid"`` or ``"mixture"``.
    """

    atoms: tuple[tuple[int, float], ...]
    kind: str
    spend: float
    traffic: float

    def __post_init__(self):
        atoms = tuple((int(b), float(w)) for b, w in self.atoms)
        if atoms and abs(sum(w for _, w in atoms) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")
        if self.kind == "two-bid" and len(atoms) > 2:
            raise ValueError("a two-bid strategy has at most two atoms")
        if self.kind == "single-bid" and sum(1 for b, w in atoms if b > 0 and w > 0) > 1:
            raise ValueError("a single-bid strategy has one non-zero bid")
        object.__setattr__(self, "atoms", atoms)

    def to_mixed(self, instance: Instance) -> MixedStrategy:
        return MixedStrategy(tuple((instance.uniform(b), w) for b, w in self.atoms))


def evaluate_uniform(agg: Landscape, atoms) -> tuple[float, float]:
    spend = traffic = 0.0
    for b, w in atoms:
        i = int(agg.index_at(b))
        spend += w * int(agg.costs[i])
        traffic += w * float(agg.clicks[i])
    return spend, traffic


def _clean(atoms) -> tuple:
    merged: dict[int, float] = {}
    for b, w in atoms:
        if w > 0:
            merged[b] = merged.get(b, 0.0) + w
    return tuple(sorted(merged.items()))


def best_uniform(instance: Instance, budget: int, agg: Landscape | None = None) -> UniformStrategy:
    """Best lottery over uniform bids: a point on the aggregate upper hull."""
    if budget < 0:
        raise ValueError("budget must be >= 0")
    agg = aggregate(instance) if agg is None else agg
    idx = hull_indices(agg.costs, agg.clicks)
    xs = [int(agg.costs[i]) for i in idx]
    i, j, w = mix_on_hull(xs, budget)
    atoms = _clean([(int(agg.bids[idx[i]]), 1.0 - w), (int(agg.bids[idx[j]]), w)])
    spend, traffic = evaluate_uniform(agg, atoms)
    return UniformStrategy(atoms, "two-bid", spend, traffic)


def best_single_bid(instance: Instance, budget: int, agg: Landscape | None = None) -> UniformStrategy:
    """Best lottery between one uniform bid and bidding zero.

    Scans every aggregate point; each is bought outright if affordable,
    otherwise mixed with the zero bid so the budget is met exactly.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    agg = aggregate(instance) if agg is None else agg
    base_clicks = float(agg.clicks[0])
    best = (base_clicks, 0.0, 0, 1.0)
    for b, c, k in zip(agg.bids, agg.costs, agg.clicks):
        c, k = int(c), float(k)
        w = 1.0 if c <= budget else budget / c
        traffic = w * k + (1 - w) * base_clicks
        spend = w * c
        if traffic > best[0] + CLICK_TOL or (abs(traffic - best[0]) <= CLICK_TOL and spend < best[1]):
            best = (traffic, spend, int(b), w)
    _, _, b, w = best
    atoms = _clean([(b, w), (0, 1.0 - w)])
    spend, traffic = evaluate_uniform(agg, atoms)
    return UniformStrategy(atoms, "single-bid", spend, traffic)
