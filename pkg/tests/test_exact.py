import random

import pytest

from bidscape.exact import (
    BudgetSweep,
    GridOverflowError,
    binarize_laminar,
    laminar_sweep,
    randomize_over_budgets,
    solve_laminar_dp,
    solve_laminar_randomized,
    solve_matching,
    solve_nested_dp,
    solve_union_of_stars,
    star_transform,
)
from bidscape.graph import Instance, Query, StructureError, evaluate, evaluate_mixed, validate
from bidscape.instances import four_query_matching, random_instance
from bidscape.oracle import GridSpec, brute_force_deterministic, brute_force_randomized
from bidscape.uniform import best_uniform
from suites import BUDGETS, GRID, random_laminar

M = 1_000_000


def test_matching_four_queries():
    inst = four_query_matching()
    sol = solve_matching(inst, 2 * M)
    assert sol.traffic == pytest.approx(10)
    assert sol.spend == pytest.approx(2 * M)
    assert len(sol.strategy.atoms) == 2
    assert solve_matching(inst, 4_500_000).traffic == pytest.approx(14)
    assert solve_matching(inst, 0).traffic == 0


def test_matching_rejects_shared_query():
    # two keywords on one query is a star, not a matching
    q = Query.from_slots("q", [(M, 0.5)])
    inst = Instance(["a", "b"], [q], [("a", "q"), ("b", "q")])
    with pytest.raises(StructureError):
        solve_matching(inst, M)
    assert solve_union_of_stars(inst, M).traffic == pytest.approx(0.5)


def test_keyword_star_collapses_to_aggregate():
    qs = [Query.from_slots("x", [(M, 0.5)]), Query.from_slots("y", [(2 * M, 0.5)])]
    inst = Instance(["k"], qs, [("k", "x"), ("k", "y")])
    t = star_transform(inst)
    assert [q.id for q in t.queries] == [("star", "k")]
    for b in (0, M, 2 * M):
        sol = solve_union_of_stars(inst, b)
        assert sol.traffic == pytest.approx(best_uniform(inst, b).traffic)
    crossing = Instance(["a", "b"], qs, [("a", "x"), ("a", "y"), ("b", "y")])
    with pytest.raises(StructureError):
        star_transform(crossing)


def test_nested_small():
    qs = [Query.from_slots("q1", [(M, 1.0)]), Query.from_slots("q2", [(2 * M, 1.0)])]
    inst = Instance(["outer", "inner"], qs, [("outer", "q1"), ("outer", "q2"), ("inner", "q1")])
    grid = GridSpec((M, 2 * M), M)
    # $1 only buys q1 through the inner keyword
    sol = solve_nested_dp(inst, M, grid)
    assert sol.bids == {"outer": 0, "inner": M} and sol.traffic == 1
    sol = solve_nested_dp(inst, 4 * M, grid)
    assert sol.traffic == 2 and sol.spend == 3 * M
    with pytest.raises(StructureError):
        solve_nested_dp(Instance(["a", "b"], qs, [("a", "q1"), ("b", "q2")]), M, grid)


def test_binarize_adds_dummies():
    qs = [Query.from_slots(f"q{i}", [(M, 1.0)]) for i in range(4)]
    flat = Instance([f"k{i}" for i in range(3)], qs, [(f"k{i}", f"q{i}") for i in range(3)])
    b = binarize_laminar(flat)
    extra = [k for k in b.keywords if k not in flat.keywords]
    assert extra == ["~dummy0"]
    assert validate(b).laminar


def test_binarize_is_noop_when_binary():
    qs = [Query.from_slots(f"q{i}", [(M, 1.0)]) for i in range(2)]
    inst = Instance(["a", "b"], qs, [("a", "q0"), ("b", "q1")])
    assert binarize_laminar(inst) is inst


def test_budget_sweep_mix():
    sweep = BudgetSweep((0, 1, 2, 3), (0, 1, 3, 3.5))
    mix = randomize_over_budgets(sweep, 1.5)
    assert mix.weights == ((0, pytest.approx(0.25)), (2, pytest.approx(0.75)))
    assert mix.traffic == pytest.approx(2.25) and mix.spend == pytest.approx(1.5)
    with pytest.raises(ValueError):
        BudgetSweep((0, 0), (1, 2))
    with pytest.raises(ValueError):
        BudgetSweep((0, 1), (2, 1))


def test_grid_overflow_guard():
    inst = random_instance(3, 3, 4, structure="laminar")
    with pytest.raises(GridOverflowError):
        solve_laminar_dp(inst, 10**12, GridSpec(tuple(range(1, 2001)), 1))


def test_laminar_sweep_matches_pointwise_solves():
    rng = random.Random(11)
    for _ in range(10):
        inst = random_laminar(rng)
        sweep = laminar_sweep(inst, BUDGETS[-1], GRID)
        for b, t, bids in zip(sweep.budgets, sweep.traffic, sweep.solutions):
            assert solve_laminar_dp(inst, b, GRID).traffic == pytest.approx(t)
            spend, traffic = evaluate(inst, bids)
            assert spend <= b and traffic == pytest.approx(t)


def test_randomized_laminar_dominates_deterministic():
    rng = random.Random(5)
    for _ in range(10):
        inst = random_laminar(rng)
        for b in BUDGETS:
            det = solve_laminar_dp(inst, b, GRID)
            rnd = solve_laminar_randomized(inst, b, GRID)
            assert rnd.traffic >= det.traffic - 1e-9
            assert rnd.spend <= b + 1e-6
            assert evaluate_mixed(inst, rnd.strategy) == pytest.approx((rnd.spend, rnd.traffic))
            assert rnd.traffic == pytest.approx(brute_force_randomized(inst, b, GRID).traffic)
            assert det.traffic == pytest.approx(brute_force_deterministic(inst, b, GRID).traffic)


def test_negative_budget():
    with pytest.raises(ValueError):
        solve_nested_dp(Instance(["k"], [Query.from_slots("q", [(M, 1.0)])], [("k", "q")]), -1, GRID)
