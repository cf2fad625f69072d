"""Instance JSON: read, write and compare.

Schema::

    {"keywords": [id, ...],
     "queries": [{"id": id, "weight": 1.0,
                  "slots": [{"bid": micro_int, "ctr": float}, ...]}, ...],
     "edges": [[keyword_id, query_id], ...],
     "budget": micro_int}

A query may give ``"points": [{"cost": micro_int, "clicks": float}, ...]``
instead of ``"slots"`` when its outcomes are known but its auction is
not.  Ids are strings or integers; JSON lists decode to tuples.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .graph import Instance, Query
from .landscape import SlotTable


class SchemaError(ValueError):
    """The document does not follow the instance schema."""


def _encode_id(x):
    if isinstance(x, tuple):
        return [_encode_id(v) for v in x]
    if isinstance(x, (str, int)) and not isinstance(x, bool):
        return x
    raise SchemaError(f"id {x!r} is not a string, integer or tuple")


def _decode_id(x):
    if isinstance(x, list):
        return tuple(_decode_id(v) for v in x)
    if isinstance(x, (str, int)) and not isinstance(x, bool):
        return x
    raise SchemaError(f"id {x!r} is not a string, integer or list")


def to_dict(instance: Instance) -> dict:
    queries = []
    for q in instance.queries:
        entry = {"id": _encode_id(q.id), "weight": float(q.weight)}
        if q.slots is not None:
            entry["slots"] = [{"bid": b, "ctr": a} for b, a in q.slots.positions]
        else:
            ls = q.landscape
            entry["points"] = [
                {"cost": int(c), "clicks": float(k)} for c, k in zip(ls.costs, ls.clicks) if k > 0
            ]
        queries.append(entry)
    doc = {
        "keywords": [_encode_id(k) for k in instance.keywords],
        "queries": queries,
        "edges": [[_encode_id(k), _encode_id(q)] for k, q in instance.edges],
    }
    if instance.budget is not None:
        doc["budget"] = int(instance.budget)
    return doc


def _int(x, what: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise SchemaError(f"{what} must be an integer number of micro-units, got {x!r}")
    return x


def from_dict(doc: dict) -> Instance:
    try:
        keywords = tuple(_decode_id(k) for k in doc["keywords"])
        queries = []
        for entry in doc["queries"]:
            qid = _decode_id(entry["id"])
            weight = float(entry.get("weight", 1.0))
            if "slots" in entry:
                bids = [_int(s["bid"], "slot bid") for s in entry["slots"]]
                ctrs = [float(s["ctr"]) for s in entry["slots"]]
                queries.append(Query.from_slots(qid, SlotTable(bids, ctrs), weight))
            elif "points" in entry:
                pts = [(_int(p["cost"], "point cost"), float(p["clicks"])) for p in entry["points"]]
                queries.append(Query.from_points(qid, pts, weight))
            else:
                raise SchemaError(f"query {qid!r} has neither slots nor points")
        edges = [(_decode_id(k), _decode_id(q)) for k, q in doc["edges"]]
        budget = doc.get("budget")
        budget = None if budget is None else _int(budget, "budget")
    except (KeyError, TypeError) as e:
        raise SchemaError(f"malformed instance document: {e!r}") from e
    return Instance(keywords, queries, edges, budget)


def dumps(instance: Instance) -> str:
    return json.dumps(to_dict(instance), indent=1) + "\n"


def loads(text: str) -> Instance:
    return from_dict(json.loads(text))


def load(path) -> Instance:
    return loads(Path(path).read_text())


def dump(instance: Instance, path) -> None:
    Path(path).write_text(dumps(instance))


def same_instance(a: Instance, b: Instance) -> bool:
    """Structural equality: ids, edges, budget, weights and landscapes."""
    if (a.keywords, a.edges, a.budget) != (b.keywords, b.edges, b.budget):
        return False
    if len(a.queries) != len(b.queries):
        return False
    for p, q in zip(a.queries, b.queries):
        if p.id != q.id or p.weight != q.weight:
            return False
        if (p.slots is None) != (q.slots is None):
            return False
        if p.slots is not None and p.slots.positions != q.slots.positions:
            return False
        for x, y in ((p.landscape.bids, q.landscape.bids), (p.landscape.costs, q.landscape.costs),
                     (p.landscape.clicks, q.landscape.clicks)):
            if not np.array_equal(x, y):
                return False
    return True
