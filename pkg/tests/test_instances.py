import networkx as nx
import numpy as np
import pytest

from bidscape.exact import solve_matching
from bidscape.graph import evaluate, validate
from bidscape.instances import (
    CurveSpec,
    best_coverage,
    build_tight_instance,
    from_max_coverage,
    from_vertex_cover,
    min_vertex_cover,
    random_instance,
    tight_grid_points,
    tight_single_bid_instance,
)
from bidscape.landscape import to_micro
from bidscape.oracle import GridSpec, brute_force_deterministic
from bidscape.serialize import dumps, loads, same_instance
from bidscape.uniform import best_single_bid, best_uniform

M = 1_000_000


def _linear(r):
    return 2.0 * np.asarray(r)


def test_curve_spec_validation():
    with pytest.raises(ValueError):
        CurveSpec(lambda r: 1 - np.asarray(r), budget=0.5)
    with pytest.raises(ValueError):
        CurveSpec(_linear, budget=2.0)
    CurveSpec(_linear, budget=1.0)


def test_tight_instance_follows_curve():
    spec = CurveSpec(_linear, budget=1.0, slack=1e-3)
    inst = build_tight_instance(spec)
    assert validate(inst).matching
    assert inst.budget == to_micro(1.001)
    r, prices = tight_grid_points(inst)
    assert r[-1] == pytest.approx(1.0)
    assert np.all(np.diff(prices) >= 0)
    ctrs = np.diff(np.concatenate(([0.0], r)))
    for i in (0, len(r) // 3, len(r) // 2, len(r) - 1):
        spend, traffic = evaluate(inst, inst.uniform(int(prices[i])))
        assert traffic == pytest.approx(r[i])
        assert spend == int(np.floor(ctrs[: i + 1] * prices[i] + 1e-6).sum())
        assert spend <= r[i] * prices[i]
    # bidding f(r_i) on q_i buys everything
    bids = {f"k{i + 1}": int(p) for i, p in enumerate(prices)}
    spend, traffic = evaluate(inst, bids)
    assert spend <= inst.budget and traffic == pytest.approx(1.0)


def test_tight_constant_curve():
    inst = build_tight_instance(CurveSpec(lambda r: np.ones_like(np.asarray(r, dtype=float)), budget=1.0))
    best = best_uniform(inst, inst.budget)
    assert best.traffic == pytest.approx(1.0, abs=2e-3)


def test_single_bid_instance():
    inst, opt = tight_single_bid_instance(0.5, 0.01)
    assert opt == 1.0
    assert inst.budget == to_micro(1.0) + to_micro(0.005)
    assert solve_matching(inst, inst.budget).traffic == pytest.approx(opt)
    ratio = best_single_bid(inst, inst.budget).traffic / opt
    assert ratio <= 0.5 + 0.01
    with pytest.raises(ValueError):
        tight_single_bid_instance(0.5, 3.0)


def _vc_opt(inst):
    bids = sorted({b for q in inst.queries for b in q.landscape.bids if b > 0})
    return brute_force_deterministic(inst, inst.budget, GridSpec(tuple(bids), 1)).traffic


def test_vertex_cover_triangle():
    tri = nx.cycle_graph(3)
    assert min_vertex_cover(tri) == 2
    yes, w = from_vertex_cover(tri, 2)
    no, _ = from_vertex_cover(tri, 1)
    assert w.threshold == 6 and w.eps == M // 9
    assert _vc_opt(yes) >= w.threshold - 1e-9
    assert _vc_opt(no) < w.threshold - 1e-9


def test_vertex_cover_single_edge():
    inst, w = from_vertex_cover(([0, 1], [(0, 1)]), 1)
    assert [q.id for q in inst.queries] == ["e0-1", "s0", "s1"]
    assert inst.budget == w.eps + 2 * M
    assert _vc_opt(inst) >= w.threshold - 1e-9


@pytest.mark.parametrize("bad", [([0, 1], [(0, 0)]), ([0, 1], [(0, 1), (1, 0)]), ([0, 0], [])])
def test_vertex_cover_rejects_malformed(bad):
    with pytest.raises(ValueError):
        from_vertex_cover(bad, 1)


def test_max_coverage():
    sets = [{1, 2}, {2, 3}, {3}]
    assert best_coverage(sets, 1) == 2 and best_coverage(sets, 2) == 3
    inst, w = from_max_coverage(sets, 2)
    assert len(inst.queries) == 3 + 3 * 9
    assert inst.budget == (2 * 9 + 3) * M
    grid = GridSpec((M,), M)
    assert brute_force_deterministic(inst, inst.budget, grid).traffic == pytest.approx(3)
    inst1, _ = from_max_coverage(sets, 1)
    assert brute_force_deterministic(inst1, inst1.budget, grid).traffic == pytest.approx(2)
    with pytest.raises(ValueError):
        from_max_coverage([{0}], 1)


@pytest.mark.parametrize("structure", ["general", "matching", "nested", "laminar", "stars"])
def test_random_structures(structure):
    for seed in range(20):
        inst = random_instance(seed, 4, 6, structure=structure)
        r = validate(inst)
        assert {"matching": r.matching, "nested": r.nested, "laminar": r.laminar,
                "stars": r.star_union, "general": True}[structure]
        assert 0 <= inst.budget
        assert same_instance(loads(dumps(inst)), inst)


def test_random_is_deterministic():
    a, b = random_instance(42, 3, 5), random_instance(42, 3, 5)
    assert a.edges == b.edges and a.budget == b.budget
    assert [q.slots.positions for q in a.queries] == [q.slots.positions for q in b.queries]
    with pytest.raises(ValueError):
        random_instance(0, 2, 2, structure="tree")
