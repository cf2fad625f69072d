"""Greedy fractional knapsack over concave piecewise-linear curves."""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class Allocation:
    """Position reached on one hull.

    Vertex ``vertex`` is bought outright; ``extra_cost`` micro-units buy a
    ``fraction`` of the next piece.
    """

    vertex: int
    fraction: float = 0.0
    extra_cost: int = 0


def greedy_fill(hulls: Sequence[tuple[Sequence[int], Sequence[float]]], budget: int) -> list[Allocation]:
    """Buy hull pieces in increasing cost-per-click order until ``budget`` runs out.

    Each hull is ``(costs, clicks)`` of its vertices, starting at cost 0 and
    concave, so a hull's pieces get cheaper-per-click first and the greedy
    always buys a prefix of every hull.  At most one piece is bought
    fractionally.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    vertex = [0] * len(hulls)
    heap: list[tuple[float, int]] = []

    def push(h: int):
        xs, ys = hulls[h]
        v = vertex[h]
        if v + 1 < len(xs):
            heapq.heappush(heap, ((xs[v + 1] - xs[v]) / (ys[v + 1] - ys[v]), h))

    for h in range(len(hulls)):
        push(h)
    remaining = budget
    partial: tuple[int, float, int] | None = None
    while heap:
        _, h = heapq.heappop(heap)
        xs, _ = hulls[h]
        v = vertex[h]
        dc = int(xs[v + 1] - xs[v])
        if dc <= remaining:
            remaining -= dc
            vertex[h] = v + 1
            push(h)
            continue
        if remaining > 0:
            partial = (h, remaining / dc, remaining)
        break
    out = [Allocation(v) for v in vertex]
    if partial is not None:
        h, f, extra = partial
        out[h] = Allocation(vertex[h], f, extra)
    return out
