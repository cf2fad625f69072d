"""Dense two-phase tableau simplex for small linear programs.

Problems are ``min c.x`` subject to rows ``A_i . x  (>=, <=, =)  b_i`` and
``x >= 0``.  Entering columns are chosen by the most negative reduced
cost; after a run of degenerate pivots the solver switches to Bland's
smallest-index rule, which cannot cycle.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7
MAX_ITER = 100_000
_DEGENERATE_RUN = 50


class SolverError(RuntimeError):
    """The LP could not be solved to optimality."""


@dataclass(frozen=True, eq=False)
class LpProblem:
    c: np.ndarray
    A: np.ndarray
    senses: tuple[str, ...]
    b: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.float64)
        A = np.asarray(self.A, dtype=np.float64).reshape(-1, len(c))
        b = np.asarray(self.b, dtype=np.float64)
        senses = tuple(self.senses)
        if A.shape[0] != len(b) or len(senses) != len(b):
            raise ValueError("A, senses and b disagree on the number of rows")
        if not (np.isfinite(c).all() and np.isfinite(A).all() and np.isfinite(b).all()):
            raise ValueError("LP data must be finite")
        if any(s not in (">=", "<=", "=") for s in senses):
            raise ValueError("senses must be '>=', '<=' or '='")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "senses", senses)

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape

    def residuals(self, x) -> np.ndarray:
        """Constraint violation per row (0 when satisfied)."""
        ax = self.A @ np.asarray(x, dtype=np.float64)
        out = np.zeros(len(self.b))
        for i, s in enumerate(self.senses):
            gap = ax[i] - self.b[i]
            out[i] = max(0.0, -gap) if s == ">=" else max(0.0, gap) if s == "<=" else abs(gap)
        return out


@dataclass(frozen=True, eq=False)
class LpSolution:
    """``duals`` holds one multiplier per row, signed so that ``b . duals`` is the objective."""

    x: np.ndarray
    objective: float
    status: str
    duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _pivot(T: np.ndarray, row: int, col: int):
    T[row] /= T[row, col]
    colv = T[:, col].copy()
    colv[row] = 0.0
    T -= np.outer(colv, T[row])


def _run(T: np.ndarray, basis: list[int], n_cols: int, iters: int, max_iter: int) -> tuple[str, int]:
    """Optimize the tableau's last row over columns ``< n_cols``."""
    m = T.shape[0] - 1
    degenerate = 0
    while True:
        if iters >= max_iter:
            return "iteration_limit", iters
        cost = T[-1, :n_cols]
        if degenerate >= _DEGENERATE_RUN:
            neg = np.flatnonzero(cost < -PIVOT_TOL)
            if not len(neg):
                return "optimal", iters
            col = int(neg[0])
        else:
            col = int(np.argmin(cost))
            if cost[col] >= -PIVOT_TOL:
                return "optimal", iters
        colv = T[:m, col]
        ok = colv > PIVOT_TOL
        if not ok.any():
            return "unbounded", iters
        ratios = np.full(m, np.inf)
        ratios[ok] = T[:m, -1][ok] / colv[ok]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + PIVOT_TOL * max(1.0, abs(best)))
        row = int(min(ties, key=lambda r: basis[r]))
        degenerate = degenerate + 1 if best <= PIVOT_TOL else 0
        _pivot(T, row, col)
        basis[row] = col
        iters += 1


def solve_lp(lp: LpProblem, max_iter: int = MAX_ITER) -> LpSolution:
    c, A, b = lp.c, lp.A.copy(), lp.b.copy()
    m, n = A.shape
    senses = list(lp.senses)
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1
    swap = {">=": "<=", "<=": ">=", "=": "="}
    senses = [swap[s] if f else s for s, f in zip(senses, flip)]

    slack_cols = [i for i, s in enumerate(senses) if s != "="]
    n_slack = len(slack_cols)
    art_rows = [i for i, s in enumerate(senses) if s != "<="]
    n_art = len(art_rows)
    width = n + n_slack + n_art
    M = np.zeros((m, width))
    M[:, :n] = A
    for j, i in enumerate(slack_cols):
        M[i, n + j] = 1.0 if senses[i] == "<=" else -1.0
    basis = [0] * m
    for j, i in enumerate(slack_cols):
        if senses[i] == "<=":
            basis[i] = n + j
    for j, i in enumerate(art_rows):
        M[i, n + n_slack + j] = 1.0
        basis[i] = n + n_slack + j

    T = np.zeros((m + 1, width + 1))
    T[:m, :width] = M
    T[:m, -1] = b
    iters = 0
    if n_art:
        T[-1, n + n_slack : width] = 1.0
        for i in art_rows:
            T[-1] -= T[i]
        status, iters = _run(T, basis, width, iters, max_iter)
        if status == "iteration_limit":
            return LpSolution(np.zeros(n), float("nan"), status, iterations=iters)
        if -T[-1, -1] > FEAS_TOL * max(1.0, np.abs(b).max(initial=0.0)):
            return LpSolution(np.zeros(n), float("nan"), "infeasible", iterations=iters)
        # drive remaining artificials out of the basis
        for r in range(m):
            if basis[r] >= n + n_slack:
                cand = np.flatnonzero(np.abs(T[r, : n + n_slack]) > PIVOT_TOL)
                if len(cand):
                    _pivot(T, r, int(cand[0]))
                    basis[r] = int(cand[0])
    real = n + n_slack
    full_c = np.zeros(width)
    full_c[:n] = c
    T[-1] = 0.0
    T[-1, :width] = full_c
    for r in range(m):
        if full_c[basis[r]]:
            T[-1] -= full_c[basis[r]] * T[r]
    # artificial columns stay out of the second phase
    status, iters = _run(T, basis, real, iters, max_iter)
    if status != "optimal":
        return LpSolution(np.zeros(n), float("nan"), status, iterations=iters)
    z = np.zeros(width)
    for r in range(m):
        z[basis[r]] = T[r, -1]
    x = np.maximum(z[:n], 0.0)
    B = M[:, basis]
    try:
        y = np.linalg.solve(B.T, full_c[basis])
    except np.linalg.LinAlgError:
        y = np.linalg.lstsq(B.T, full_c[basis], rcond=None)[0]
    y[flip] *= -1
    return LpSolution(x, float(c @ x), "optimal", y, iters)


def lp_from_rows(c: Sequence[float], rows: Sequence[tuple[Sequence[float], str, float]]) -> LpProblem:
    """Build an :class:`LpProblem` from ``(coefficients, sense, rhs)`` rows."""
    c = np.asarray(c, dtype=np.float64)
    A = np.array([r[0] for r in rows], dtype=np.float64).reshape(len(rows), len(c))
    return LpProblem(c, A, tuple(r[1] for r in rows), np.array([r[2] for r in rows], dtype=np.float64))
