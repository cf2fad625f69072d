import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bidscape.clickprice import (
    ClickPriceCurve,
    Step,
    build_curve,
    click_target_mixture,
    e_targets,
    half_strategy,
    target_click_atom,
    omega_bound,
    one_minus_inv_e_strategy,
    worst_case_curve,
)
from bidscape.graph import Instance, Query
from bidscape.instances import four_query_matching, random_instance

M = 1_000_000


def test_omega_on_four_queries():
    inst = four_query_matching()
    full = omega_bound(inst, 4_500_000)
    assert full.clicks == pytest.approx(14) and full.spend == 4_500_000
    part = omega_bound(inst, 2 * M)
    assert part.clicks == pytest.approx(10) and part.spend == 2 * M
    # A is the query split by the greedy fill
    split = [s for s in part.shares if s.extra_cost]
    assert [s.query for s in split] == ["A"]
    assert split[0].extra_clicks == pytest.approx(1.0)


def test_curve_steps():
    curve = build_curve(omega_bound(four_query_matching(), 4_500_000))
    assert [s.height for s in curve.steps] == pytest.approx([0.1e6, 0.25e6, 0.5e6, 2e6 / 3])
    assert curve.total_clicks == pytest.approx(14)
    assert curve.area == 4_500_000
    assert curve.height_at(7) == pytest.approx(250_000)
    assert curve.height_at(5) == pytest.approx(100_000)
    assert curve.height_at(0) == 0
    assert curve.bid_at(7) == 250_000
    with pytest.raises(ValueError):
        curve.height_at(15)


def test_curve_rejects_decreasing_heights():
    with pytest.raises(ValueError):
        ClickPriceCurve((Step(1.0, 10, 10), Step(1.0, 5, 5)))


def test_half_strategy_on_four_queries():
    inst = four_query_matching()
    s = half_strategy(inst, 4_500_000)
    assert s.kind == "single-bid"
    assert s.atoms == ((0, pytest.approx(2 / 9)), (250_000, pytest.approx(7 / 9)))
    assert s.traffic == pytest.approx(7)
    assert s.spend <= 4_500_000


def test_target_click_atom_reaches_target():
    inst = four_query_matching()
    curve = build_curve(omega_bound(inst, 4_500_000))
    bid, w = target_click_atom(curve, inst, 7)
    assert bid == 250_000 and w * 9 >= 7
    assert target_click_atom(curve, inst, 0) == (0, 0.0)


def test_e_strategy_on_four_queries():
    inst = four_query_matching()
    s = one_minus_inv_e_strategy(inst, 4_500_000, atoms=64)
    # 64 atoms lose a little to discretization against 14 * (1 - 1/e)
    assert s.traffic >= 8.68
    assert s.spend <= 4_500_000 + 1e-6
    with pytest.raises(ValueError):
        one_minus_inv_e_strategy(inst, 4_500_000, atoms=1)


def test_e_targets():
    t = e_targets(4)
    assert sum(p for _, p in t) == pytest.approx(1)
    assert t[0][0] == pytest.approx(1 / math.e)
    assert all(a < b for (a, _), (b, _) in zip(t, t[1:]))


def test_zero_click_instance():
    q = Query.from_slots("q", [(M, 0.5)])
    inst = Instance(["k"], [q], [("k", "q")])
    assert omega_bound(inst, 0).clicks == 0
    s = one_minus_inv_e_strategy(inst, 0, atoms=8)
    assert s.traffic == 0 and s.spend == 0
    assert half_strategy(inst, 0).traffic == 0
    assert click_target_mixture(inst, 0, [(1.0, 1.0)]).traffic == 0


def test_worst_case_curve():
    assert worst_case_curve(0.2) == 0
    assert worst_case_curve(1.0) == pytest.approx((math.e - 1) / (math.e - 2))
    assert worst_case_curve(1 / math.e + 1e-12) == pytest.approx(0, abs=1e-9)
    mid = (np.arange(2_000_000) + 0.5) / 2_000_000
    assert worst_case_curve(mid).mean() == pytest.approx(1.0, abs=1e-6)
    # every single-bid strategy on this curve gets at most 1 - 1/e of the clicks
    rs = np.linspace(1 / math.e, 1, 999)
    won = np.minimum(rs, 1 / np.maximum(worst_case_curve(rs), 1e-300))
    assert won.max() <= 1 - 1 / math.e + 1e-9
    with pytest.raises(ValueError):
        worst_case_curve(1.5)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 6 * M))
def test_curve_area_equals_omega_spend(seed, budget):
    inst = random_instance(seed, 3, 5)
    omega = omega_bound(inst, budget)
    curve = build_curve(omega)
    assert curve.area == omega.spend <= budget
    assert curve.total_clicks == pytest.approx(omega.clicks)
    s = half_strategy(inst, budget)
    assert s.traffic >= omega.clicks / 2 - 1e-9
    assert s.spend <= budget + 1e-6
