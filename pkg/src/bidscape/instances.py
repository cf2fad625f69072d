"""Instance generators: tight constructions, hardness reductions, random graphs."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable, Sequence

import numpy as np

from .graph import Instance, Query
from .landscape import MICRO, Landscape, SlotTable, slot_cost, to_micro

STRUCTURES = ("general", "matching", "nested", "laminar", "stars")


@dataclass(frozen=True)
class CurveSpec:
    """Non-decreasing price curve ``f`` on [0, C] (currency per click) with area ``U``.

    ``f`` must accept numpy arrays.  ``slack`` is the extra budget the
    construction may use on top of ``U``.
    """

    f: Callable
    clicks: float = 1.0
    budget: float = 1.0
    slack: float = 1e-3

    def __post_init__(self):
        if self.clicks <= 0 or self.budget < 0 or self.slack <= 0:
            raise ValueError("need C > 0, U >= 0 and slack > 0")
        r = np.linspace(0.0, self.clicks, 1 << 16)
        v = np.asarray(self.f(r), dtype=np.float64)
        if np.any(v < 0) or np.any(np.diff(v) < -1e-12):
            raise ValueError("curve must be non-negative and non-decreasing")
        if abs(self.area() - self.budget) > 1e-6 * max(1.0, self.budget):
            raise ValueError(f"curve area {self.area():.9f} differs from U = {self.budget}")

    def area(self, n: int = 1 << 22) -> float:
        h = self.clicks / n
        mid = (np.arange(n) + 0.5) * h
        return float(np.asarray(self.f(mid), dtype=np.float64).sum() * h)


def _inverse(f, levels: np.ndarray, hi: float, iters: int = 60) -> np.ndarray:
    """sup{r in [0, hi] : f(r) <= level} for each level, by vectorized bisection."""
    lo = np.zeros(len(levels))
    up = np.full(len(levels), hi)
    for _ in range(iters):
        mid = (lo + up) / 2
        ok = np.asarray(f(mid)) <= levels
        lo = np.where(ok, mid, lo)
        up = np.where(ok, up, mid)
    return lo


def tight_grid(spec: CurveSpec, delta: float) -> np.ndarray:
    """Points 0 = r_0 < ... < r_m = C with gaps and f-increments of at most ``delta``.

    Union of a uniform grid of step ``delta`` and the points where f
    crosses multiples of ``delta``.
    """
    C = spec.clicks
    uniform = np.linspace(0.0, C, int(math.ceil(C / delta)) + 1)
    top = float(spec.f(np.array([C]))[0])
    levels = np.arange(1, int(top / delta) + 1) * delta
    crossings = _inverse(spec.f, levels, C) if len(levels) else np.zeros(0)
    r = np.unique(np.concatenate((uniform, crossings)))
    r = r[(r > 0) & (r < C)]
    # merge near-duplicates
    r = r[np.concatenate(([True], np.diff(r) > 1e-12 * C))] if len(r) else r
    return np.concatenate(([0.0], r, [C]))


def _tight_prices(spec: CurveSpec, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(ctrs, prices in micro-units) on grid ``r``, with clicks scaled by 1/C."""
    ctrs = np.diff(r) / spec.clicks
    prices = np.array([to_micro(x) for x in np.asarray(spec.f(r[1:]), dtype=np.float64) * spec.clicks])
    return ctrs, prices


def _tight_spend(spec: CurveSpec, delta: float) -> int:
    ctrs, prices = _tight_prices(spec, tight_grid(spec, delta))
    return int(np.floor(ctrs * prices + 1e-6).astype(np.int64).sum())


def build_tight_instance(spec: CurveSpec, max_queries: int = 20_000) -> Instance:
    """Matching instance whose uniform strategies are limited to following ``f``.

    Query i gets competitors bidding f(r_i), ..., f(r_m), all with ctr
    r_i - r_(i-1), so a uniform bid of f(r_i) wins exactly queries
    1..i.  The grid step is the largest (found by bisection) for which
    bidding f(r_i) on every q_i fits in U + slack.  Ctrs are divided by C
    and query weights set to C, which keeps ctrs in [0, 1] without
    changing clicks or costs.
    """
    target = to_micro(spec.budget + spec.slack)
    lo = spec.slack / (spec.clicks + float(spec.f(np.array([spec.clicks]))[0]) + 1e-300)
    hi = spec.clicks
    if _tight_spend(spec, hi) <= target:
        lo = hi
    elif _tight_spend(spec, lo) > target:
        raise ValueError("construction slack too small for micro-unit rounding")
    for _ in range(40):
        if hi - lo <= 1e-4 * lo:
            break
        mid = math.sqrt(lo * hi)
        if _tight_spend(spec, mid) <= target:
            lo = mid
        else:
            hi = mid
    r = tight_grid(spec, lo)
    if len(r) - 1 > max_queries:
        raise ValueError(f"construction needs {len(r) - 1} queries (> {max_queries})")
    ctrs, prices = _tight_prices(spec, r)
    m = len(ctrs)
    queries, edges, keywords = [], [], []
    for i in range(m):
        bids = prices[i:][::-1].copy()
        slots = SlotTable(bids, np.full(len(bids), ctrs[i]))
        qid, kid = f"q{i + 1}", f"k{i + 1}"
        queries.append(Query(qid, Landscape.from_slots(slots), spec.clicks, slots))
        keywords.append(kid)
        edges.append((kid, qid))
    return Instance(tuple(keywords), queries, edges, target)


def tight_grid_points(instance: Instance) -> tuple[np.ndarray, np.ndarray]:
    """(cumulative clicks r_i, price f(r_i)) of an instance from :func:`build_tight_instance`."""
    ctrs = np.array([q.slots.ctrs[0] * q.weight for q in instance.queries])
    prices = np.array([q.slots.bids[-1] for q in instance.queries], dtype=np.int64)
    return np.cumsum(ctrs), prices


def tight_single_bid_instance(alpha: float, eps: float) -> tuple[Instance, float]:
    """Two-query example where single-bid strategies reach only about half the optimum.

    ``eps`` is in currency units.  Returns the instance (budget 1 + eps*alpha)
    and its optimal traffic 2*alpha.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    if eps <= 0:
        raise ValueError("eps must be positive")
    high, low = to_micro(1 / alpha), to_micro(eps)
    if low >= high:
        raise ValueError("eps must be below 1/alpha")
    x = Query.from_slots("x", [(high, alpha), (low, alpha)])
    y = Query.from_slots("y", [(high, alpha)])
    budget = slot_cost(alpha, low) + slot_cost(alpha, high)
    inst = Instance(("u", "v"), [x, y], [("u", "x"), ("v", "y")], budget)
    return inst, 2 * alpha


def _graph_parts(H) -> tuple[list, list]:
    if hasattr(H, "nodes") and hasattr(H, "edges"):
        return list(H.nodes), [tuple(e) for e in H.edges]
    nodes, edges = H
    return list(nodes), [tuple(e) for e in edges]


@dataclass(frozen=True)
class ReductionWitness:
    """Parameters of a hardness reduction and the click level certifying YES."""

    kind: str
    k_star: int
    threshold: float
    eps: int = 0
    vertices: tuple = ()
    graph_edges: tuple = ()
    sets: tuple = ()


def from_vertex_cover(H, k_star: int, eps: int | None = None) -> tuple[Instance, ReductionWitness]:
    """Keyword instance reaching |E|+|V| clicks within budget iff H has a vertex cover of size <= k*.

    ``H`` is a networkx-style graph or a ``(vertices, edges)`` pair;
    ``eps`` is in micro-units and defaults to floor($1 / |E|^2).
    """
    vertices, edges = _graph_parts(H)
    if len(set(vertices)) != len(vertices):
        raise ValueError("duplicate vertices")
    vs = set(vertices)
    seen = set()
    for u, v in edges:
        if u == v or u not in vs or v not in vs:
            raise ValueError(f"malformed edge {(u, v)!r}")
        key = frozenset((u, v))
        if key in seen:
            raise ValueError(f"repeated edge {(u, v)!r}")
        seen.add(key)
    if not 1 <= k_star <= len(vertices):
        raise ValueError("k* must lie in [1, |V|]")
    n_e = len(edges)
    if eps is None:
        eps = MICRO // max(1, n_e) ** 2 if n_e else MICRO // 2
    if eps <= 0 or (n_e and eps > MICRO / n_e**2):
        raise ValueError("eps must lie in (0, $1/|E|^2]")
    keywords = tuple(f"v{v}" for v in vertices)
    queries, links = [], []
    for u, v in edges:
        q = Query.from_slots(f"e{u}-{v}", [(MICRO, 1.0)])
        queries.append(q)
        links += [(f"v{u}", q.id), (f"v{v}", q.id)]
    for v in vertices:
        # slots listed highest bid first
        q = Query.from_slots(f"s{v}", [(MICRO, 1.0), (eps, 1.0)])
        queries.append(q)
        links.append((f"v{v}", q.id))
    budget = (len(vertices) - k_star) * eps + (n_e + k_star) * MICRO
    inst = Instance(keywords, queries, links, budget)
    witness = ReductionWitness("vertex-cover", k_star, float(n_e + len(vertices)), eps, tuple(vertices), tuple(edges))
    return inst, witness


def from_max_coverage(sets: Sequence[Iterable[int]], k_star: int, n: int | None = None) -> tuple[Instance, ReductionWitness]:
    """Weighted keyword instance whose optimum equals the best coverage by k* sets.

    Element queries weigh 1; each set has n^2 unit-ctr copies of a
    zero-weight query that make its keyword cost n^2 to switch on.
    """
    sets = [frozenset(s) for s in sets]
    if not sets:
        raise ValueError("empty set system")
    universe = sorted(set().union(*sets))
    n = max(universe, default=0) if n is None else n
    if any(e < 1 or e > n for e in universe):
        raise ValueError("elements must lie in [1, n]")
    if not 1 <= k_star <= len(sets):
        raise ValueError("k* must lie in [1, m]")
    n = max(n, 1)
    keywords = tuple(f"set{i}" for i in range(len(sets)))
    unit = Query.from_slots("_", [(MICRO, 1.0)])
    queries, links = [], []
    for e in range(1, n + 1):
        queries.append(Query(f"elem{e}", unit.landscape, 1.0, unit.slots))
        links += [(f"set{i}", f"elem{e}") for i, s in enumerate(sets) if e in s]
    for i in range(len(sets)):
        for c in range(n * n):
            qid = f"copy{i}.{c}"
            queries.append(Query(qid, unit.landscape, 0.0, unit.slots))
            links.append((f"set{i}", qid))
    inst = Instance(keywords, queries, links, k_star * n * n * MICRO + n * MICRO)
    return inst, ReductionWitness("max-coverage", k_star, 0.0, sets=tuple(sets))


def best_coverage(sets: Sequence[Iterable[int]], k_star: int) -> int:
    sets = [frozenset(s) for s in sets]
    return max(len(frozenset().union(*c)) for c in combinations(sets, min(k_star, len(sets))))


def min_vertex_cover(H) -> int:
    vertices, edges = _graph_parts(H)
    for k in range(len(vertices) + 1):
        for cover in combinations(vertices, k):
            c = set(cover)
            if all(u in c or v in c for u, v in edges):
                return k
    return len(vertices)


def _random_slots(rng: random.Random, max_slots: int, bid_levels, ctr_levels) -> list[tuple[int, float]]:
    k = rng.randint(1, max_slots)
    if bid_levels is None:
        bids = [100 * rng.randint(1, 50_000) for _ in range(k)]
    else:
        bids = [rng.choice(bid_levels) for _ in range(k)]
    if ctr_levels is None:
        ctrs = [rng.randint(1, 100) / 100 for _ in range(k)]
    else:
        ctrs = [rng.choice(ctr_levels) for _ in range(k)]
    return list(zip(sorted(bids, reverse=True), sorted(ctrs, reverse=True)))


def _random_edges(rng: random.Random, kws: list, qids: list, structure: str) -> list[tuple]:
    nk, nq = len(kws), len(qids)
    if structure == "general":
        edges = set()
        for q in qids:
            for k in rng.sample(kws, rng.randint(1, min(3, nk))):
                edges.add((k, q))
        return sorted(edges, key=lambda e: (kws.index(e[0]), qids.index(e[1])))
    if structure == "matching":
        return list(zip(kws, qids))
    if structure == "nested":
        order = qids[:]
        rng.shuffle(order)
        sizes = sorted(rng.randint(1, nq) for _ in kws)
        rng.shuffle(sizes)
        return [(k, q) for k, s in zip(kws, sizes) for q in order[:s]]
    if structure == "laminar":
        parent = [None] + [rng.choice([None] + list(range(i))) for i in range(1, nk)]
        home = {i: [] for i in range(nk)}
        for j, q in enumerate(qids):
            home[j % nk if j < nk else rng.randrange(nk)].append(q)
        sets = {i: list(home[i]) for i in range(nk)}
        for i in range(nk - 1, 0, -1):
            p = parent[i]
            while p is not None:
                sets[p] += home[i]
                p = parent[p]
        return [(kws[i], q) for i in range(nk) for q in sets[i]]
    if structure == "stars":
        edges, ki, qi = [], 0, 0
        while ki < nk and qi < nq:
            if rng.random() < 0.5:
                take = min(nq - qi, rng.randint(1, 3))
                edges += [(kws[ki], qids[qi + t]) for t in range(take)]
                ki, qi = ki + 1, qi + take
            else:
                take = min(nk - ki, rng.randint(1, 3))
                edges += [(kws[ki + t], qids[qi]) for t in range(take)]
                ki, qi = ki + take, qi + 1
        return edges
    raise ValueError(f"unknown structure {structure!r}; expected one of {STRUCTURES}")


def random_instance(
    seed: int,
    n_keywords: int,
    n_queries: int,
    max_slots: int = 3,
    structure: str = "general",
    bid_levels: Sequence[int] | None = None,
    ctr_levels: Sequence[float] | None = None,
) -> Instance:
    """Reproducible random instance with the requested keyword structure.

    Bids default to multiples of 100 micro-units and ctrs to two decimals,
    so every cost is an exact integer.  The budget is a random share of
    what bidding everything to the top would cost.
    """
    if n_keywords < 1 or n_queries < 1 or max_slots < 1:
        raise ValueError("sizes must be positive")
    rng = random.Random(seed)
    kws = [f"k{i}" for i in range(n_keywords)]
    qids = [f"q{j}" for j in range(n_queries)]
    queries = [Query.from_slots(q, _random_slots(rng, max_slots, bid_levels, ctr_levels)) for q in qids]
    edges = _random_edges(rng, kws, qids, structure)
    inst = Instance(tuple(kws), queries, edges)
    top = sum(int(q.landscape.costs[-1]) for q in inst.covered_queries)
    budget = rng.randint(0, top) if top else 0
    return Instance(inst.keywords, inst.queries, inst.edges, budget)


def four_slot_query(qid="q") -> Query:
    """A query with four competitors: $2.60/.5, $2.00/.45, $1.60/.25, $0.50/.2."""
    return Query.from_slots(qid, [(2_600_000, 0.5), (2_000_000, 0.45), (1_600_000, 0.25), (500_000, 0.2)])


def four_query_matching(budget: int | None = None) -> Instance:
    """Four single-outcome queries A-D (clicks, cost): (2, $1), (5, $0.50), (3, $2), (4, $1)."""
    outcomes = {"A": (1_000_000, 2.0), "B": (500_000, 5.0), "C": (2_000_000, 3.0), "D": (1_000_000, 4.0)}
    queries = [Query.from_points(q, [pt]) for q, pt in outcomes.items()]
    keywords = tuple(f"k{q}" for q in outcomes)
    return Instance(keywords, queries, [(f"k{q}", q) for q in outcomes], budget)
