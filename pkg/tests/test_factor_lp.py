import math

import numpy as np
import pytest

from bidscape.clickprice import worst_case_curve
from bidscape.factor_lp import (
    FactorGrid,
    build_dual,
    build_primal,
    dual_to_strategy,
    mixture_cost,
    primal_objective,
    search_alpha,
    solve_factor,
)
from bidscape.simplex import LpProblem, lp_from_rows, solve_lp

scipy_optimize = pytest.importorskip("scipy.optimize")


def _scipy(lp: LpProblem):
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for row, s, b in zip(lp.A, lp.senses, lp.b):
        if s == "<=":
            A_ub.append(row), b_ub.append(b)
        elif s == ">=":
            A_ub.append(-row), b_ub.append(-b)
        else:
            A_eq.append(row), b_eq.append(b)
    res = scipy_optimize.linprog(
        lp.c, A_ub=np.array(A_ub) if A_ub else None, b_ub=b_ub or None,
        A_eq=np.array(A_eq) if A_eq else None, b_eq=b_eq or None, bounds=(0, None), method="highs",
    )
    return res


def test_simplex_small():
    # max x + y  s.t.  x + 2y <= 4, 3x + y <= 6
    lp = lp_from_rows([-1, -1], [([1, 2], "<=", 4), ([3, 1], "<=", 6)])
    sol = solve_lp(lp)
    assert sol.optimal
    assert sol.x == pytest.approx([1.6, 1.2])
    assert sol.objective == pytest.approx(-2.8)
    assert lp.b @ sol.duals == pytest.approx(sol.objective)


def test_simplex_statuses():
    assert solve_lp(lp_from_rows([1], [([1], ">=", 2), ([1], "<=", 1)])).status == "infeasible"
    assert solve_lp(lp_from_rows([-1], [([1], ">=", 1)])).status == "unbounded"
    sol = solve_lp(lp_from_rows([1, 1], [([1, 1], "=", 3), ([1, -1], ">=", 1)]))
    assert sol.optimal and sol.objective == pytest.approx(3)


@pytest.mark.parametrize("seed", range(30))
def test_simplex_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(2, 7), rng.integers(2, 7)
    A = rng.integers(-3, 5, size=(m, n)).astype(float)
    senses = tuple(rng.choice(["<=", ">=", "="], size=m, p=[0.6, 0.3, 0.1]))
    b = rng.integers(0, 10, size=m).astype(float)
    c = rng.integers(-4, 5, size=n).astype(float)
    lp = LpProblem(c, A, senses, b)
    ours, ref = solve_lp(lp), _scipy(lp)
    if ref.status == 0:
        assert ours.optimal
        assert ours.objective == pytest.approx(ref.fun, abs=1e-7)
        assert lp.residuals(ours.x).max() <= 1e-7
    elif ref.status == 2:
        # scipy mislabels some unbounded problems as infeasible
        assert ours.status in ("infeasible", "unbounded")
    elif ref.status == 3:
        assert ours.status == "unbounded"


def test_probabilities():
    grid = FactorGrid(0.1, 0.55)
    for u, v in grid.pairs:
        p1, p2 = grid.probabilities(u, v)
        ru, rv = grid.points[u], grid.points[v]
        assert p1 + p2 == pytest.approx(1)
        assert p1 * ru + p2 * rv == pytest.approx(0.55)
        assert min(p1, p2) >= 0


def test_coarse_grid_structure():
    grid = FactorGrid(0.5, 0.5)
    assert list(grid.points) == [0, 0.5, 1.0]
    assert grid.pairs == [(0, 1), (0, 2), (1, 1), (1, 2)]
    assert grid.probabilities(1, 1) == (1.0, 0.0)
    assert grid.probabilities(0, 2) == (0.5, 0.5)
    with pytest.raises(ValueError):
        FactorGrid(0.3, 0.5)
    with pytest.raises(ValueError):
        FactorGrid(0.1, 1.0)


@pytest.mark.parametrize("eps, alpha", [(0.25, 0.5), (0.1, 0.6), (0.05, 1 - 1 / math.e), (0.05, 0.7)])
def test_primal_and_dual_match_scipy(eps, alpha):
    grid = FactorGrid(eps, alpha)
    res = solve_factor(grid)
    ref = _scipy(build_primal(grid))
    assert ref.status == 0
    assert res.objective == pytest.approx(ref.fun, abs=1e-8)
    assert res.dual_objective == pytest.approx(res.objective, abs=1e-8)
    assert build_primal(grid).residuals(res.h).max() <= 1e-7


def test_normalized_dual_feasible_at_threshold():
    grid = FactorGrid(0.05, 0.6)
    assert solve_factor(grid).objective >= 1
    assert solve_lp(build_dual(grid, normalized=True)).optimal
    grid = FactorGrid(0.05, 0.75)
    assert solve_factor(grid).objective < 1
    assert solve_lp(build_dual(grid, normalized=True)).status == "infeasible"


def test_objective_decreases_in_alpha():
    vals = [primal_objective(0.05, a) for a in (0.5, 0.6, 0.65, 0.7)]
    assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))


def test_dual_mixture_is_a_distribution():
    res = solve_factor(FactorGrid(0.05, 0.63))
    targets = dual_to_strategy(res)
    assert sum(p for _, p in targets) == pytest.approx(1)
    assert all(0 <= r <= 1 for r, _ in targets)
    assert sum(r * p for r, p in targets) == pytest.approx(0.63)


def test_dual_mixture_cost_against_discrete_worst_curve():
    # rescale the worst-case curve so its grid area is exactly one budget
    eps = 0.02
    grid = FactorGrid(eps, search_alpha(eps))
    targets = dual_to_strategy(solve_factor(grid))
    pts = grid.points
    raw = worst_case_curve(pts)
    scale = 1.0 / (eps * raw.sum())
    table = dict(zip(np.round(pts, 12), raw * scale))
    cost = mixture_cost(targets, lambda r: table[round(r, 12)])
    assert cost <= 1 + 1e-7


@pytest.mark.parametrize("eps", [1 / 20, 1 / 50, 1 / 100])
def test_alpha_near_one_minus_inv_e(eps):
    alpha = search_alpha(eps)
    assert abs(alpha - (1 - 1 / math.e)) <= 3 * eps
    assert alpha >= 1 - 1 / math.e - 1e-3


def test_search_alpha_rejects_bad_step():
    with pytest.raises(ValueError):
        search_alpha(0.5)
