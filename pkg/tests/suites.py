"""Small structured instance suites shared by the exactness tests."""
import itertools
import random

from bidscape.graph import Instance, Query, validate
from bidscape.oracle import GridSpec

BID_LEVELS = (1_000_000, 2_000_000, 3_000_000)
CTR_LEVELS = (0.5, 1.0)
UNIT = 500_000
GRID = GridSpec(BID_LEVELS, UNIT)
BUDGETS = tuple(u * UNIT for u in range(7))


def level_query(rng: random.Random, qid: str) -> Query:
    k = rng.randint(1, 2)
    bids = sorted((rng.choice(BID_LEVELS) for _ in range(k)), reverse=True)
    ctrs = sorted((rng.choice(CTR_LEVELS) for _ in range(k)), reverse=True)
    return Query.from_slots(qid, list(zip(bids, ctrs)))


def _instance(rng, n_queries, neighbourhoods):
    qids = [f"q{j}" for j in range(n_queries)]
    kws = [f"k{i}" for i in range(len(neighbourhoods))]
    queries = [level_query(rng, q) for q in qids]
    edges = [(kws[i], qids[j]) for i, hood in enumerate(neighbourhoods) for j in sorted(hood)]
    return Instance(kws, queries, edges)


def matching_structures():
    for n in (1, 2, 3):
        for extra in (0, 1):
            # n matched pairs, optionally one isolated query
            yield n + extra, [{i} for i in range(n)]


def nested_structures():
    for n_kw in (1, 2, 3):
        for n_q in (1, 2, 3):
            for sizes in itertools.product(range(1, n_q + 1), repeat=n_kw):
                yield n_q, [set(range(s)) for s in sizes]


def laminar_structures():
    seen = set()
    for n_kw in (1, 2, 3):
        for n_q in (2, 3, 4):
            subsets = [frozenset(c) for r in range(1, n_q + 1) for c in itertools.combinations(range(n_q), r)]
            for fam in itertools.combinations(subsets, n_kw):
                if all(a <= b or b <= a or not (a & b) for a, b in itertools.combinations(fam, 2)):
                    if any(not (a <= b or b <= a) for a, b in itertools.combinations(fam, 2)):
                        key = (n_q, fam)
                        if key not in seen:
                            seen.add(key)
                            yield n_q, [set(s) for s in fam]


def suite(kind: str, landscapes_per_structure: int, seed: int = 0):
    """(instance, budget) pairs: every structure x every budget x sampled landscapes."""
    structures = {"matching": matching_structures, "nested": nested_structures, "laminar": laminar_structures}[kind]
    rng = random.Random(seed)
    for n_q, hoods in structures():
        for _ in range(landscapes_per_structure):
            inst = _instance(rng, n_q, hoods)
            for b in BUDGETS:
                yield inst, b


def random_laminar(rng: random.Random, max_keywords: int = 4, max_queries: int = 5) -> Instance:
    """Random laminar instance on the level grid; top-level sets are often more than two."""
    from bidscape.instances import random_instance

    while True:
        inst = random_instance(
            rng.randrange(10**9), rng.randint(2, max_keywords), rng.randint(2, max_queries), 2, "laminar",
            bid_levels=BID_LEVELS, ctr_levels=CTR_LEVELS,
        )
        if validate(inst).laminar:
            return inst
