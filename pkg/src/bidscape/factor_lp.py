"""Factor-revealing LPs for uniform bidding with normalized clicks and budget.

The primal picks a click-price curve ``h`` on the grid ``{0, eps, ..., 1}``
of least area such that every two-bid uniform strategy reaching ``alpha``
clicks costs at least the budget.  Its dual is a distribution over such
strategies whose cost stays within budget against every curve of unit
area.  With C = U = 1, a strategy mixing click targets u < alpha <= v
with probabilities p1, p2 has p1 + p2 = 1 and p1*u + p2*v = alpha.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .simplex import LpProblem, LpSolution, SolverError, solve_lp

_REL = 1e-9


@dataclass(frozen=True)
class FactorGrid:
    eps: float
    alpha: float
    clicks: float = 1.0
    budget: float = 1.0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.eps <= 0 or self.eps >= self.clicks:
            raise ValueError("grid step must lie in (0, C)")
        n = self.clicks / self.eps
        if abs(n - round(n)) > 1e-9 * n:
            raise ValueError("grid step must divide C")

    @property
    def size(self) -> int:
        return round(self.clicks / self.eps)

    @cached_property
    def points(self) -> np.ndarray:
        return np.arange(self.size + 1) * (self.clicks / self.size)

    @cached_property
    def pairs(self) -> list[tuple[int, int]]:
        """Index pairs (u, v) with r_u <= alpha*C <= r_v."""
        target = self.alpha * self.clicks
        tol = _REL * self.clicks
        us = [i for i, r in enumerate(self.points) if r <= target + tol]
        vs = [i for i, r in enumerate(self.points) if r >= target - tol]
        return [(u, v) for u in us for v in vs]

    def probabilities(self, u: int, v: int) -> tuple[float, float]:
        """(p1, p2) putting mean ``alpha*C`` on targets r_u and r_v."""
        ru, rv = self.points[u], self.points[v]
        if u == v:
            return 1.0, 0.0
        target = self.alpha * self.clicks
        return (rv - target) / (rv - ru), (target - ru) / (rv - ru)

    def coefficients(self) -> np.ndarray:
        """Row per pair: expected cost of the pair's strategy as a linear form in h."""
        A = np.zeros((len(self.pairs), self.size + 1))
        r = self.points
        for k, (u, v) in enumerate(self.pairs):
            p1, p2 = self.probabilities(u, v)
            A[k, u] += p1 * r[u]
            A[k, v] += p2 * r[v]
        return A


def build_primal(grid: FactorGrid) -> LpProblem:
    """min sum eps*h_r  s.t.  p1*u*h_u + p2*v*h_v >= U for every pair, h >= 0."""
    A = grid.coefficients()
    c = np.full(grid.size + 1, grid.eps)
    return LpProblem(c, A, (">=",) * len(A), np.full(len(A), grid.budget))


def build_dual(grid: FactorGrid, normalized: bool = False) -> LpProblem:
    """LP dual of :func:`build_primal`, written as a minimization.

    Variables are pair weights w >= 0; each grid point r carries the row
    sum_pairs coef(r) * w <= eps.  The plain dual maximizes U * sum(w);
    ``normalized`` instead fixes sum(w) = 1 and has a zero objective, the
    feasibility polytope that exists when the primal optimum equals U.
    """
    A = grid.coefficients().T
    used = np.flatnonzero(np.abs(A).sum(axis=1) > 0)
    A = A[used]
    n = A.shape[1]
    senses = ["<="] * len(A)
    b = [grid.eps] * len(A)
    if normalized:
        A = np.vstack([A, np.ones(n)])
        senses.append("=")
        b.append(1.0)
        c = np.zeros(n)
    else:
        c = np.full(n, -grid.budget)
    return LpProblem(c, A, tuple(senses), np.array(b))


@dataclass(frozen=True, eq=False)
class FactorResult:
    """Primal curve ``h`` and dual pair weights ``w`` of one solved grid."""

    grid: FactorGrid
    objective: float
    dual_objective: float
    h: np.ndarray
    w: np.ndarray
    iterations: int


def solve_factor(grid: FactorGrid) -> FactorResult:
    """Solve the dual (few rows) and read the primal curve off its multipliers."""
    lp = build_dual(grid)
    sol = solve_lp(lp)
    if not sol.optimal:
        raise SolverError(f"factor LP dual ended with status {sol.status}")
    h = np.zeros(grid.size + 1)
    used = np.flatnonzero(np.abs(grid.coefficients().T).sum(axis=1) > 0)
    # row multipliers of "<=" rows in a minimization are <= 0
    h[used] = np.maximum(-sol.duals, 0.0)
    primal = build_primal(grid)
    if primal.residuals(h).max() > 1e-7 * max(1.0, grid.budget):
        raise SolverError("recovered primal curve violates its constraints")
    return FactorResult(grid, float(primal.c @ h), -sol.objective, h, sol.x, sol.iterations)


def primal_objective(eps: float, alpha: float) -> float:
    return solve_factor(FactorGrid(eps, alpha)).objective


def search_alpha(eps: float, step: float = 1e-3, tol: float = 1e-9) -> float:
    """Largest alpha on a ``step`` grid whose primal optimum is still >= U - tol.

    Above it some curve of area below U defeats every uniform strategy
    aiming for alpha clicks.  The objective falls as alpha grows, so
    bisection over the grid indices finds the threshold.
    """
    if not 0 < eps <= 0.25:
        raise ValueError("grid step must lie in (0, 0.25]")
    lo, hi = 1, int(round(1 / step)) - 1
    if primal_objective(eps, lo * step) < 1 - tol:
        return 0.0
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if primal_objective(eps, mid * step) >= 1 - tol:
            lo = mid
        else:
            hi = mid - 1
    return round(lo * step, 12)


def dual_to_strategy(result: FactorResult) -> list[tuple[float, float]]:
    """Distribution over click targets r/C obtained by splitting each pair's weight by p1, p2.

    Weights are normalized to sum 1; the result plugs into
    :func:`bidscape.clickprice.click_target_mixture`.
    """
    grid = result.grid
    total = float(result.w.sum())
    if total <= 0:
        raise ValueError("dual solution carries no weight")
    mass = np.zeros(grid.size + 1)
    for (u, v), w in zip(grid.pairs, result.w):
        if w <= 0:
            continue
        p1, p2 = grid.probabilities(u, v)
        mass[u] += w * p1
        mass[v] += w * p2
    mass /= total
    return [(float(grid.points[i] / grid.clicks), float(m)) for i, m in enumerate(mass) if m > 1e-12]


def mixture_cost(targets, curve) -> float:
    """Expected cost of reaching each target r at per-click price curve(r)."""
    return math.fsum(p * r * float(curve(r)) for r, p in targets)
