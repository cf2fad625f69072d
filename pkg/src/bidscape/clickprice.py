"""Per-query adversary bound, click-price curves and the uniform approximations.

The adversary bids on every query independently (its best randomized
per-query allocation under the budget); it upper-bounds any keyword
bidder.  Its purchases, sorted by price per click, form the click-price
curve ``h``.  Bidding ``h(r)`` on every keyword wins at least ``r``
clicks, each at no more than ``h(r)``, which gives the 1/2 and 1 - 1/e
uniform strategies below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Iterable

import numpy as np

from .graph import Instance, MixedStrategy, evaluate, evaluate_mixed
from .knapsack import greedy_fill
from .landscape import Landscape, hull_indices
from .uniform import UniformStrategy, _clean


@dataclass(frozen=True)
class QueryShare:
    """What the adversary buys on one query.

    ``bid`` buys ``(cost, clicks)`` outright; when the query holds the
    fractional greedy piece, ``extra_cost`` buys ``extra_clicks`` more by
    randomizing towards ``next_bid``.  Clicks are weighted.
    """

    query: Hashable
    bid: int
    cost: int
    clicks: float
    next_bid: int = 0
    extra_cost: int = 0
    extra_clicks: float = 0.0


@dataclass(frozen=True)
class OmegaSolution:
    shares: tuple[QueryShare, ...]
    clicks: float
    spend: int

    @property
    def bids(self) -> dict:
        return {s.query: s.bid for s in self.shares}


def _weighted_hull(ls: Landscape, weight: float):
    clicks = ls.clicks * weight
    idx = hull_indices(ls.costs, clicks)
    return ls.costs[idx], clicks[idx], ls.bids[idx]


def omega_bound(instance: Instance, budget: int) -> OmegaSolution:
    """Best per-query randomized allocation of ``budget`` (fractional knapsack)."""
    if budget < 0:
        raise ValueError("budget must be >= 0")
    queries = instance.covered_queries
    hulls = [_weighted_hull(q.landscape, q.weight) for q in queries]
    alloc = greedy_fill([(xs, ys) for xs, ys, _ in hulls], budget)
    shares = []
    for q, (xs, ys, bs), a in zip(queries, hulls, alloc):
        v = a.vertex
        share = QueryShare(q.id, int(bs[v]), int(xs[v]), float(ys[v]))
        if a.extra_cost:
            share = QueryShare(
                q.id, share.bid, share.cost, share.clicks,
                next_bid=int(bs[v + 1]),
                extra_cost=a.extra_cost,
                extra_clicks=float(a.fraction * (ys[v + 1] - ys[v])),
            )
        shares.append(share)
    clicks = math.fsum(s.clicks + s.extra_clicks for s in shares)
    spend = sum(s.cost + s.extra_cost for s in shares)
    return OmegaSolution(tuple(shares), clicks, spend)


@dataclass(frozen=True)
class Step:
    """One step of a click-price curve: ``width`` clicks costing ``area``.

    ``bid`` is the smallest uniform bid that wins the whole step.
    """

    width: float
    area: int
    bid: int

    @property
    def height(self) -> float:
        return self.area / self.width


@dataclass(frozen=True, eq=False)
class ClickPriceCurve:
    steps: tuple[Step, ...]

    def __post_init__(self):
        steps = tuple(self.steps)
        heights = [s.height for s in steps]
        if any(b < a for a, b in zip(heights, heights[1:])):
            raise ValueError("steps must have non-decreasing heights")
        object.__setattr__(self, "steps", steps)
        cum = np.cumsum([s.width for s in steps]) if steps else np.zeros(0)
        object.__setattr__(self, "_cum", cum)
        object.__setattr__(self, "_bid_prefix", np.maximum.accumulate([s.bid for s in steps]) if steps else np.zeros(0, np.int64))

    @property
    def total_clicks(self) -> float:
        return float(self._cum[-1]) if len(self._cum) else 0.0

    @property
    def area(self) -> int:
        """Exact integral of the curve in micro-units."""
        return sum(s.area for s in self.steps)

    def _step_index(self, r: float) -> int | None:
        if r <= 0 or not self.steps:
            return None
        if r > self.total_clicks * (1 + 1e-12) + 1e-12:
            raise ValueError(f"r={r} exceeds the curve's domain {self.total_clicks}")
        i = int(np.searchsorted(self._cum, r - 1e-12 * max(1.0, self.total_clicks), side="left"))
        return min(i, len(self.steps) - 1)

    def height_at(self, r: float) -> float:
        """h(r): price per click of the step covering cumulative click ``r``."""
        i = self._step_index(r)
        return 0.0 if i is None else self.steps[i].height

    def bid_at(self, r: float) -> int:
        """Smallest uniform bid winning every step up to cumulative click ``r``."""
        i = self._step_index(r)
        return 0 if i is None else int(self._bid_prefix[i])

    def rows(self) -> list[tuple[float, float]]:
        """(cumulative clicks, height) at the right end of every step."""
        return [(float(c), s.height) for c, s in zip(self._cum, self.steps)]


def build_curve(omega: OmegaSolution) -> ClickPriceCurve:
    steps = []
    for s in omega.shares:
        if s.clicks > 0:
            steps.append(Step(s.clicks, s.cost, s.bid))
        if s.extra_clicks > 0:
            steps.append(Step(s.extra_clicks, s.extra_cost, s.next_bid))
    steps.sort(key=lambda st: (st.height, st.bid))
    return ClickPriceCurve(tuple(steps))


def target_click_atom(curve: ClickPriceCurve, instance: Instance, r: float) -> tuple[int, float]:
    """Uniform bid h(r) and the probability of playing it to get r clicks.

    The probability is rounded up so that the instance's own evaluation
    of the lottery reaches ``r`` exactly.
    """
    if r <= 0:
        return 0, 0.0
    bid = curve.bid_at(r)
    _, traffic = evaluate(instance, instance.uniform(bid))
    if traffic <= 0:
        return bid, 0.0
    w = r / traffic
    while w < 1.0 and w * traffic < r:
        w = float(np.nextafter(w, 2.0))
    return bid, min(1.0, w)


def _as_strategy(instance: Instance, atoms, kind: str) -> UniformStrategy:
    atoms = _clean(atoms) or ((0, 1.0),)
    spend, traffic = evaluate_mixed(instance, MixedStrategy(tuple((instance.uniform(b), w) for b, w in atoms)))
    return UniformStrategy(atoms, kind, spend, traffic)


def click_target_mixture(instance: Instance, budget: int, targets: Iterable[tuple[float, float]]) -> UniformStrategy:
    """Mix single-bid strategies; ``targets`` holds (r / C_Omega, probability)."""
    omega = omega_bound(instance, budget)
    curve = build_curve(omega)
    atoms = []
    for frac, p in targets:
        bid, w = target_click_atom(curve, instance, frac * omega.clicks)
        atoms += [(bid, p * w), (0, p * (1 - w))]
    return _as_strategy(instance, atoms, "mixture")


def half_strategy(instance: Instance, budget: int) -> UniformStrategy:
    """Single-bid strategy winning half the adversary's clicks."""
    if budget < 0:
        raise ValueError("budget must be >= 0")
    omega = omega_bound(instance, budget)
    bid, w = target_click_atom(build_curve(omega), instance, omega.clicks / 2)
    return _as_strategy(instance, [(bid, w), (0, 1.0 - w)], "single-bid")


def e_targets(atoms: int) -> list[tuple[float, float]]:
    """Geometric click targets e^(k/atoms - 1), k < atoms, each with mass 1/atoms.

    Discretizes the density 1/r on [C/e, C]; left endpoints keep the
    spend within the curve's integral over [C/e, C].
    """
    return [(math.exp(-1.0 + k / atoms), 1.0 / atoms) for k in range(atoms)]


def one_minus_inv_e_strategy(instance: Instance, budget: int, atoms: int = 256) -> UniformStrategy:
    if atoms < 2:
        raise ValueError("atoms must be >= 2")
    if budget < 0:
        raise ValueError("budget must be >= 0")
    return click_target_mixture(instance, budget, e_targets(atoms))


def worst_case_curve(r):
    """Click-price curve on [0, 1] against which no uniform strategy beats 1 - 1/e."""
    arr = np.asarray(r, dtype=np.float64)
    if np.any(arr < 0) or np.any(arr > 1):
        raise ValueError("r must lie in [0, 1]")
    with np.errstate(divide="ignore"):
        val = np.where(arr < 1 / math.e, 0.0, (math.e - 1 / np.maximum(arr, 1e-300)) / (math.e - 2))
    val = np.maximum(val, 0.0)
    return float(val) if val.ndim == 0 else val
