"""Single query auctions: slot tables, bid landscapes and their upper hulls.

Money is integer micro-units throughout (``MICRO`` per currency unit).
Clicks are floats.  A landscape is stored as a step function: ``bids[i]``
is the smallest bid that yields ``(costs[i], clicks[i])``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MICRO = 1_000_000

# absolute tolerance on clicks, and relative slack used by the hull test
CLICK_TOL = 1e-9
_HULL_RTOL = 1e-12


def to_micro(amount: float) -> int:
    return int(round(amount * MICRO))


def from_micro(micro: float) -> float:
    return micro / MICRO


def slot_cost(ctr: float, bid: int) -> int:
    """Expected cost ``ctr * bid`` in micro-units, rounded down.

    Rounding down keeps ``cost / clicks <= bid`` for every won position.
    """
    return int(math.floor(ctr * bid + 1e-6))


def _frozen(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SlotTable:
    """Competing bids and ctrs by position, position 1 first."""

    bids: np.ndarray
    ctrs: np.ndarray

    def __post_init__(self):
        bids = _frozen(self.bids, np.int64).reshape(-1)
        ctrs = _frozen(self.ctrs, np.float64).reshape(-1)
        if bids.shape != ctrs.shape:
            raise ValueError("bids and ctrs must have the same length")
        if len(bids):
            if bids.min() < 0:
                raise ValueError("slot bids must be >= 0")
            if np.any(np.diff(bids) > 0):
                raise ValueError("slot bids must be non-increasing by position")
            if ctrs.min() < 0 or ctrs.max() > 1:
                raise ValueError("ctrs must lie in [0, 1]")
            if np.any(np.diff(ctrs) > 0):
                raise ValueError("ctrs must be non-increasing by position")
        object.__setattr__(self, "bids", bids)
        object.__setattr__(self, "ctrs", ctrs)

    @classmethod
    def from_positions(cls, positions: Iterable[tuple[int, float]]) -> SlotTable:
        positions = list(positions)
        return cls([int(b) for b, _ in positions], [float(a) for _, a in positions])

    @property
    def positions(self) -> list[tuple[int, float]]:
        return [(int(b), float(a)) for b, a in zip(self.bids, self.ctrs)]

    def __len__(self):
        return len(self.bids)


def position_for_bid(slots: SlotTable, bid: int) -> int | None:
    """1-based position won by ``bid``, or None when no slot is won.

    The winner of a tie ``bid == b[i]`` takes position i; among equal
    competing bids the highest position is taken.
    """
    if bid < 0:
        raise ValueError("bid must be >= 0")
    # bids are non-increasing, so the first index with b[i] <= bid is the answer
    idx = int(np.searchsorted(-slots.bids, -bid, side="left"))
    if idx >= len(slots.bids):
        return None
    return idx + 1


def cost_clicks_at(slots: SlotTable, bid: int) -> tuple[int, float]:
    pos = position_for_bid(slots, bid)
    if pos is None:
        return 0, 0.0
    ctr = float(slots.ctrs[pos - 1])
    return slot_cost(ctr, int(slots.bids[pos - 1])), ctr


@dataclass(frozen=True)
class HullPoint:
    cost: int
    clicks: float
    bid: int


@dataclass(frozen=True, eq=False)
class Landscape:
    """Finite set of (cost, clicks) outcomes of one query, indexed by bid.

    ``bids`` is strictly increasing and starts at 0; ``costs`` and
    ``clicks`` are non-decreasing.  Entry 0 is what a zero bid gets, which
    is the origin unless some competitor bids zero.
    """

    bids: np.ndarray
    costs: np.ndarray
    clicks: np.ndarray

    def __post_init__(self):
        bids = _frozen(self.bids, np.int64)
        costs = _frozen(self.costs, np.int64)
        clicks = _frozen(self.clicks, np.float64)
        if not (bids.shape == costs.shape == clicks.shape) or bids.ndim != 1 or not len(bids):
            raise ValueError("landscape arrays must be 1-d, non-empty and of equal length")
        if bids[0] != 0 or np.any(np.diff(bids) <= 0):
            raise ValueError("landscape bids must start at 0 and strictly increase")
        if costs.min() < 0 or clicks.min() < 0:
            raise ValueError("costs and clicks must be >= 0")
        if np.any(np.diff(costs) < 0) or np.any(np.diff(clicks) < -CLICK_TOL):
            raise ValueError("costs and clicks must be non-decreasing in the bid")
        object.__setattr__(self, "bids", bids)
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "clicks", clicks)

    @classmethod
    def from_slots(cls, slots: SlotTable) -> Landscape:
        b, a = slots.bids, slots.ctrs
        if len(b) == 0:
            return cls([0], [0], [0.0])
        # among equal bids only the highest position is reachable
        reachable = np.ones(len(b), dtype=bool)
        reachable[1:] = b[1:] < b[:-1]
        keep = reachable & (a > 0)
        b, a = b[keep][::-1], a[keep][::-1]
        costs = np.floor(a * b + 1e-6).astype(np.int64)
        if len(b) and b[0] == 0:
            bids, cs, ks = b, costs, a
        else:
            bids = np.concatenate(([0], b))
            cs = np.concatenate(([0], costs))
            ks = np.concatenate(([0.0], a))
        dup = np.zeros(len(bids), dtype=bool)
        dup[1:] = (cs[1:] == cs[:-1]) & (ks[1:] == ks[:-1])
        return cls(bids[~dup], cs[~dup], ks[~dup])

    @classmethod
    def from_points(cls, points: Iterable[tuple[int, float]]) -> Landscape:
        """Landscape from outcome points; each point is won at its cpc.

        The winning bid is the cpc rounded up to a whole micro-unit.
        """
        pts = sorted({(int(c), float(k)) for c, k in points if k > 0})
        bids, cs, ks = [0], [0], [0.0]
        for c, k in pts:
            bid = max(0, math.ceil(c / k - 1e-9))
            if bid == 0:
                cs[0], ks[0] = c, max(ks[0], k)
                continue
            if bid <= bids[-1]:
                raise ValueError(f"point ({c}, {k}) has non-increasing cpc")
            bids.append(bid)
            cs.append(c)
            ks.append(k)
        return cls(bids, cs, ks)

    def scaled(self, weight: float) -> Landscape:
        """Same landscape with clicks multiplied by ``weight``."""
        return Landscape(self.bids, self.costs, self.clicks * weight)

    def index_at(self, bid) -> int | np.ndarray:
        return np.searchsorted(self.bids, bid, side="right") - 1

    def cost_clicks_at(self, bid: int) -> tuple[int, float]:
        if bid < 0:
            raise ValueError("bid must be >= 0")
        i = int(self.index_at(bid))
        return int(self.costs[i]), float(self.clicks[i])

    @property
    def points(self) -> list[tuple[int, float]]:
        return [(int(c), float(k)) for c, k in zip(self.costs, self.clicks)]

    @property
    def interesting_bids(self) -> list[int]:
        """Bids at which this query's outcome has positive clicks and changes."""
        return [int(b) for b, k in zip(self.bids, self.clicks) if k > 0]

    def __len__(self):
        return len(self.bids)


def hull_indices(xs: Sequence[float], ys: Sequence[float]) -> list[int]:
    """Indices of the upper concave hull of points sorted by x.

    Equal-x points keep the highest y; collinear interior points are
    dropped, as is any flat or falling tail after the maximum y.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    hull: list[int] = []
    for i in range(len(xs)):
        x2, y2 = xs[i], ys[i]
        if hull and xs[hull[-1]] == x2:
            if ys[hull[-1]] >= y2:
                continue
            hull.pop()
        while len(hull) >= 2:
            x0, y0 = xs[hull[-2]], ys[hull[-2]]
            x1, y1 = xs[hull[-1]], ys[hull[-1]]
            lhs = (y1 - y0) * (x2 - x0)
            rhs = (y2 - y0) * (x1 - x0)
            if lhs <= rhs + _HULL_RTOL * (abs(lhs) + abs(rhs)):
                hull.pop()
            else:
                break
        hull.append(i)
    while len(hull) >= 2 and ys[hull[-1]] <= ys[hull[-2]] + CLICK_TOL * 1e-3:
        hull.pop()
    return hull


def mix_on_hull(xs: Sequence[float], budget: float) -> tuple[int, int, float]:
    """Bracket ``budget`` on hull x-coordinates.

    Returns ``(i, j, w)``: put weight ``1 - w`` on vertex i and ``w`` on
    vertex j.  ``i == j`` means a pure strategy.
    """
    n = len(xs)
    if budget >= xs[-1]:
        return n - 1, n - 1, 0.0
    j = int(np.searchsorted(xs, budget, side="right"))
    i = j - 1
    if i < 0:
        # budget below the cheapest vertex (only possible if it costs > 0)
        return 0, 0, 0.0
    if xs[i] == budget:
        return i, i, 0.0
    w = (budget - xs[i]) / (xs[j] - xs[i])
    return i, j, float(w)


def convex_hull(landscape: Landscape) -> list[HullPoint]:
    idx = hull_indices(landscape.costs, landscape.clicks)
    return [
        HullPoint(int(landscape.costs[i]), float(landscape.clicks[i]), int(landscape.bids[i]))
        for i in idx
    ]


def hull_height(hull: Sequence[HullPoint], cost: float) -> float:
    """Height of the hull polyline at ``cost`` (flat past the last vertex)."""
    xs = [p.cost for p in hull]
    i, j, w = mix_on_hull(xs, cost)
    return (1 - w) * hull[i].clicks + w * hull[j].clicks


@dataclass(frozen=True)
class BidDistribution:
    atoms: tuple[tuple[int, float], ...]

    def __post_init__(self):
        atoms = tuple((int(b), float(w)) for b, w in self.atoms)
        if any(b < 0 for b, _ in atoms) or any(w < 0 for _, w in atoms):
            raise ValueError("bids and weights must be >= 0")
        if abs(sum(w for _, w in atoms) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def pure(cls, bid: int) -> BidDistribution:
        return cls(((bid, 1.0),))


def optimal_single_query_mix(landscape: Landscape, budget: int) -> BidDistribution:
    """Click-maximizing distribution on at most two bids with expected cost <= budget."""
    if budget < 0:
        raise ValueError("budget must be >= 0")
    hull = convex_hull(landscape)
    i, j, w = mix_on_hull([p.cost for p in hull], budget)
    if i == j or w == 0.0:
        return BidDistribution.pure(hull[i].bid)
    return BidDistribution(((hull[i].bid, 1.0 - w), (hull[j].bid, w)))


def evaluate_distribution(landscape: Landscape, dist: BidDistribution) -> tuple[float, float]:
    cost = clicks = 0.0
    for bid, w in dist.atoms:
        c, k = landscape.cost_clicks_at(bid)
        cost += w * c
        clicks += w * k
    return cost, clicks
