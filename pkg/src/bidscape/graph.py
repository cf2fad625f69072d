"""Keyword-query interaction graphs and spend/traffic evaluation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Mapping

from .landscape import Landscape, SlotTable

BidVector = Mapping[Hashable, int]


class StructureError(ValueError):
    """The instance lacks the graph structure a solver requires."""


@dataclass(frozen=True, eq=False)
class Query:
    id: Hashable
    landscape: Landscape
    weight: float = 1.0
    slots: SlotTable | None = None

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError(f"query {self.id!r}: weight must be >= 0")

    @classmethod
    def from_slots(cls, id, positions, weight: float = 1.0) -> Query:
        slots = positions if isinstance(positions, SlotTable) else SlotTable.from_positions(positions)
        return cls(id, Landscape.from_slots(slots), weight, slots)

    @classmethod
    def from_points(cls, id, points, weight: float = 1.0) -> Query:
        return cls(id, Landscape.from_points(points), weight)


@dataclass(frozen=True, eq=False)
class Instance:
    keywords: tuple
    queries: tuple[Query, ...]
    edges: tuple[tuple[Hashable, Hashable], ...]
    budget: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "keywords", tuple(self.keywords))
        object.__setattr__(self, "queries", tuple(self.queries))
        object.__setattr__(self, "edges", tuple((k, q) for k, q in self.edges))
        if len(set(self.keywords)) != len(self.keywords):
            raise ValueError("duplicate keyword ids")
        qids = [q.id for q in self.queries]
        if len(set(qids)) != len(qids):
            raise ValueError("duplicate query ids")
        kset, qset = set(self.keywords), set(qids)
        dangling = [(k, q) for k, q in self.edges if k not in kset or q not in qset]
        if dangling:
            raise ValueError(f"edges reference unknown ids: {dangling}")
        if self.budget is not None and self.budget < 0:
            raise ValueError("budget must be >= 0")

    @cached_property
    def query_index(self) -> dict:
        return {q.id: i for i, q in enumerate(self.queries)}

    @cached_property
    def keyword_index(self) -> dict:
        return {k: i for i, k in enumerate(self.keywords)}

    @cached_property
    def query_keywords(self) -> dict:
        """query id -> tuple of adjacent keyword ids, in keyword order."""
        adj: dict = {q.id: set() for q in self.queries}
        for k, q in self.edges:
            adj[q].add(k)
        order = self.keyword_index
        return {q: tuple(sorted(ks, key=order.__getitem__)) for q, ks in adj.items()}

    @cached_property
    def keyword_queries(self) -> dict:
        """keyword id -> frozenset of adjacent query ids."""
        adj: dict = {k: set() for k in self.keywords}
        for k, q in self.edges:
            adj[k].add(q)
        return {k: frozenset(qs) for k, qs in adj.items()}

    @cached_property
    def covered_queries(self) -> tuple[Query, ...]:
        """Queries with at least one adjacent keyword, in instance order."""
        adj = self.query_keywords
        return tuple(q for q in self.queries if adj[q.id])

    def query(self, qid) -> Query:
        return self.queries[self.query_index[qid]]

    def uniform(self, bid: int) -> dict:
        return {k: bid for k in self.keywords}


@dataclass(frozen=True)
class MixedStrategy:
    atoms: tuple[tuple[Mapping, float], ...]

    def __post_init__(self):
        atoms = tuple((dict(v), float(w)) for v, w in self.atoms)
        if any(w < 0 for _, w in atoms):
            raise ValueError("weights must be >= 0")
        if atoms and abs(sum(w for _, w in atoms) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")
        if any(b < 0 for v, _ in atoms for b in v.values()):
            raise ValueError("bids must be >= 0")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def pure(cls, bids: BidVector) -> MixedStrategy:
        return cls(((bids, 1.0),))


@dataclass(frozen=True)
class Solution:
    """A strategy together with its expected spend and traffic."""

    strategy: MixedStrategy
    spend: float
    traffic: float

    @property
    def bids(self) -> dict:
        """The bid vector of a deterministic solution."""
        if len(self.strategy.atoms) != 1:
            raise ValueError("solution is randomized")
        return self.strategy.atoms[0][0]


def effective_bid(instance: Instance, bids: BidVector, query) -> int:
    try:
        adj = instance.query_keywords[query]
    except KeyError:
        raise KeyError(f"unknown query {query!r}") from None
    return max((bids.get(k, 0) for k in adj), default=0)


def evaluate(instance: Instance, bids: BidVector) -> tuple[int, float]:
    """(spend, weighted traffic) of a deterministic keyword bid vector."""
    spend, clicks = 0, []
    adj = instance.query_keywords
    for q in instance.queries:
        b = max((bids.get(k, 0) for k in adj[q.id]), default=0)
        if b == 0 and not adj[q.id]:
            continue
        c, k = q.landscape.cost_clicks_at(b)
        spend += c
        clicks.append(q.weight * k)
    # correctly rounded, so the result does not depend on query order
    return spend, math.fsum(clicks)


def evaluate_mixed(instance: Instance, strategy: MixedStrategy) -> tuple[float, float]:
    spend = traffic = 0.0
    for bids, w in strategy.atoms:
        s, t = evaluate(instance, bids)
        spend += w * s
        traffic += w * t
    return spend, traffic


@dataclass(frozen=True)
class StructureReport:
    matching: bool
    star_union: bool
    nested: bool
    laminar: bool
    isolated_queries: tuple = ()
    warnings: tuple[str, ...] = field(default=())


def _components(instance: Instance) -> list[tuple[set, set]]:
    seen_k: set = set()
    comps = []
    for k0 in instance.keywords:
        if k0 in seen_k:
            continue
        ks, qs, stack = {k0}, set(), [("k", k0)]
        seen_k.add(k0)
        while stack:
            side, node = stack.pop()
            if side == "k":
                for q in instance.keyword_queries[node]:
                    if q not in qs:
                        qs.add(q)
                        stack.append(("q", q))
            else:
                for k in instance.query_keywords[node]:
                    if k not in seen_k:
                        seen_k.add(k)
                        ks.add(k)
                        stack.append(("k", k))
        comps.append((ks, qs))
    return comps


def is_chain(sets: Iterable[frozenset]) -> bool:
    chain = sorted({s for s in sets if s}, key=len)
    return all(a < b for a, b in zip(chain, chain[1:]))


def is_laminar(sets: Iterable[frozenset]) -> bool:
    distinct = list({s for s in sets if s})
    for i, a in enumerate(distinct):
        for b in distinct[i + 1:]:
            if a & b and not (a <= b or b <= a):
                return False
    return True


def validate(instance: Instance) -> StructureReport:
    """Classify the keyword neighbourhood structure of ``instance``."""
    kdeg = {k: len(qs) for k, qs in instance.keyword_queries.items()}
    qdeg = {q: len(ks) for q, ks in instance.query_keywords.items()}
    matching = all(d <= 1 for d in kdeg.values()) and all(d <= 1 for d in qdeg.values())
    star_union = True
    for ks, qs in _components(instance):
        if len(ks) > 1 and len(qs) > 1:
            star_union = False
            break
    sets = list(instance.keyword_queries.values())
    isolated = tuple(q for q, d in qdeg.items() if d == 0)
    warnings = tuple(f"query {q!r} has no adjacent keyword" for q in isolated)
    return StructureReport(
        matching=matching,
        star_union=star_union,
        nested=is_chain(sets),
        laminar=is_laminar(sets),
        isolated_queries=isolated,
        warnings=warnings,
    )
