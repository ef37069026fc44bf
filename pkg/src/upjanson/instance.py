"""Instance files and instance generators.

An instance file is a JSON document::

    {
      "n": 6,
      "p": [0.5, 0.5, 0.5, 0.5, 0.5, 0.5],
      "events": [
        {"minsets": [[0, 1, 3]], "weight": 1},
        ...
      ],
      "dependency": "support"
    }

``dependency`` is ``"support"`` (default), ``"exact"`` or an explicit list
of 0-based event index pairs.  Coordinates are 0-based.  Floats are written
with 17 significant digits so that files round-trip exactly.
"""
from __future__ import annotations

import itertools
import json
import math
from collections.abc import Sequence
from typing import Any

import numpy as np

from .dependency import (
    EXACT_REFINED,
    SUPPORT,
    USER,
    DependencyRelation,
    build_support_relation,
    refine_exact,
)
from .model import EventFamily, ModelError, ProductSpace, UpSet, canonicalize, mask_of
from .prob import DEFAULT_MAX_EXACT_SUPPORT

__all__ = [
    "InstanceError",
    "GRAPHS",
    "KINDS",
    "parse_instance",
    "serialize_instance",
    "dumps",
    "generate",
    "subgraph_count",
    "threshold_family",
    "random_monotone_dnf",
    "edge_index",
]


class InstanceError(ValueError):
    """Malformed instance text; the message names the offending field."""


# ---------------------------------------------------------------------------
# serialization


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    out = format(x, ".17g")
    return out


def _scalar(v: Any) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _fmt_float(float(v))
    if isinstance(v, str):
        return json.dumps(v)
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _is_flat(v: Any) -> bool:
    if isinstance(v, dict):
        return all(not isinstance(x, (dict, list, tuple)) or _is_flat_list(x) for x in v.values())
    return _is_flat_list(v)


def _is_flat_list(v: Any) -> bool:
    if not isinstance(v, (list, tuple)):
        return False
    return all(
        not isinstance(x, (dict, list, tuple)) or (isinstance(x, (list, tuple)) and _is_flat_list(x))
        for x in v
    )


def _inline(v: Any) -> str:
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_inline(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_inline(x) for x in v) + "]"
    return _scalar(v)


def dumps(obj: Any, indent: int = 0) -> str:
    """JSON text with stable key order and 17-digit floats.

    Flat containers go on one line; nested ones get one item per line.
    """
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj or (indent > 0 and _is_flat(obj)):
            return _inline(obj)
        items = [f"{pad}{json.dumps(k)}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj or _is_flat_list(obj):
            return _inline(obj)
        items = [f"{pad}{dumps(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    return _scalar(obj)


def _dependency_field(family: EventFamily):
    rel = family.dependency
    if rel is None or rel.mode == SUPPORT:
        return "support"
    if rel.mode == EXACT_REFINED:
        return "exact"
    return [list(p) for p in rel.sorted_pairs()]


def serialize_instance(family: EventFamily) -> str:
    doc = {
        "n": family.space.n,
        "p": list(family.space.p),
        "events": [
            {"minsets": ev.minset_indices(), "weight": c}
            for ev, c in zip(family.events, family.weights)
        ],
        "dependency": _dependency_field(family),
    }
    return dumps(doc) + "\n"


# ---------------------------------------------------------------------------
# parsing


def _number(v: Any, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InstanceError(f"{where}: expected a number, got {v!r}")
    return float(v)


def _index(v: Any, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise InstanceError(f"{where}: expected an integer index, got {v!r}")
    return v


def parse_instance(
    text: str,
    *,
    dependency: str | None = None,
    max_support: int = DEFAULT_MAX_EXACT_SUPPORT,
) -> EventFamily:
    """Parse instance text into a family with its dependency relation applied.

    ``dependency`` overrides the file's mode (``"support"`` or ``"exact"``).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise InstanceError("top level: expected an object")
    unknown = set(doc) - {"n", "p", "events", "dependency"}
    if unknown:
        raise InstanceError(f"top level: unknown field(s) {sorted(unknown)}")
    if "n" not in doc:
        raise InstanceError("n: missing")
    n = _index(doc["n"], "n")
    if n < 0:
        raise InstanceError(f"n: must be nonnegative, got {n}")
    p = doc.get("p")
    if not isinstance(p, list):
        raise InstanceError("p: expected an array of probabilities")
    if len(p) != n:
        raise InstanceError(f"p: has {len(p)} entries, n = {n}")
    probs = []
    for x, v in enumerate(p):
        q = _number(v, f"p[{x}]")
        if not 0.0 <= q <= 1.0:
            raise InstanceError(f"p[{x}]: probability {q!r} outside [0, 1]")
        probs.append(q)
    space = ProductSpace(probs)

    raw_events = doc.get("events", [])
    if not isinstance(raw_events, list):
        raise InstanceError("events: expected an array")
    events, weights = [], []
    for e, rec in enumerate(raw_events):
        where = f"events[{e}]"
        if not isinstance(rec, dict):
            raise InstanceError(f"{where}: expected an object")
        extra = set(rec) - {"minsets", "weight"}
        if extra:
            raise InstanceError(f"{where}: unknown field(s) {sorted(extra)}")
        ms = rec.get("minsets")
        if not isinstance(ms, list):
            raise InstanceError(f"{where}.minsets: expected an array of index arrays")
        masks = []
        for m, sub in enumerate(ms):
            if not isinstance(sub, list):
                raise InstanceError(f"{where}.minsets[{m}]: expected an array of indices")
            idx = [_index(v, f"{where}.minsets[{m}]") for v in sub]
            for v in idx:
                if not 0 <= v < n:
                    raise InstanceError(f"{where}.minsets[{m}]: index {v} out of range for n = {n}")
            masks.append(mask_of(idx))
        events.append(canonicalize(masks, n))
        c = _number(rec.get("weight", 1), f"{where}.weight")
        if not c > 0 or math.isinf(c):
            raise InstanceError(f"{where}.weight: must be positive and finite, got {c!r}")
        weights.append(c)

    family = EventFamily(space, tuple(events), tuple(weights))
    mode = doc.get("dependency", "support") if dependency is None else dependency
    if mode == "support":
        rel = build_support_relation(family)
    elif mode == "exact":
        rel = refine_exact(build_support_relation(family), family, max_support=max_support)
    elif isinstance(mode, list):
        pairs = []
        for q, pair in enumerate(mode):
            where = f"dependency[{q}]"
            if not isinstance(pair, list) or len(pair) != 2:
                raise InstanceError(f"{where}: expected a pair [i, j]")
            i, j = (_index(v, where) for v in pair)
            if not (0 <= i < family.k and 0 <= j < family.k):
                raise InstanceError(f"{where}: event index out of range for k = {family.k}")
            if i == j:
                raise InstanceError(f"{where}: an event cannot be related to itself")
            pairs.append((i, j))
        rel = DependencyRelation.from_pairs(family.k, pairs, USER)
    else:
        raise InstanceError(f'dependency: expected "support", "exact" or an array of pairs, got {mode!r}')
    return family.with_dependency(rel)


# ---------------------------------------------------------------------------
# generators

GRAPHS: dict[str, tuple[tuple[int, int], ...]] = {
    "edge": ((0, 1),),
    "path2": ((0, 1), (1, 2)),
    "path3": ((0, 1), (1, 2), (2, 3)),
    "triangle": ((0, 1), (0, 2), (1, 2)),
    "star3": ((0, 1), (0, 2), (0, 3)),
    "cycle4": ((0, 1), (1, 2), (2, 3), (0, 3)),
    "K4": ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)),
}

KINDS = ("subgraph-count", "threshold", "random-monotone-dnf")


def edge_index(n: int) -> dict[tuple[int, int], int]:
    """Coordinate of each edge ``(u, v)``, ``u < v``, of ``K_n`` in lexicographic order."""
    return {e: x for x, e in enumerate(itertools.combinations(range(n), 2))}


def _probabilities(p, count: int, rng: np.random.Generator) -> list[float]:
    if isinstance(p, (int, float)):
        return [float(p)] * count
    p = list(p)
    if len(p) == count and count != 2:
        return [float(v) for v in p]
    if len(p) == 2:
        lo, hi = float(p[0]), float(p[1])
        if not 0.0 <= lo <= hi <= 1.0:
            raise ValueError(f"probability range {p} must satisfy 0 <= lo <= hi <= 1")
        return [float(v) for v in rng.uniform(lo, hi, size=count)]
    raise ValueError(f"p must be a number, a [lo, hi] range or {count} values")


def subgraph_count(graph, n: int, p=0.5, seed: int = 0) -> EventFamily:
    """One principal event per copy of ``graph`` in ``K_n``; coordinates are edges of ``K_n``."""
    edges = GRAPHS[graph] if isinstance(graph, str) else tuple(tuple(e) for e in graph)
    if not edges:
        raise ValueError("graph has no edges")
    verts = sorted({v for e in edges for v in e})
    if len(verts) > n:
        raise ValueError(f"graph on {len(verts)} vertices has no copy in K_{n}")
    index = edge_index(n)
    copies = set()
    for image in itertools.permutations(range(n), len(verts)):
        f = dict(zip(verts, image))
        copies.add(mask_of(index[min(f[u], f[v]), max(f[u], f[v])] for u, v in edges))
    coords = len(index)
    events = tuple(UpSet(coords, (m,)) for m in sorted(copies, key=lambda m: (m.bit_count(), m)))
    rng = np.random.default_rng(seed)
    return EventFamily(ProductSpace(_probabilities(p, coords, rng)), events)


def threshold_family(
    n: int,
    k: int = 1,
    r: int = 3,
    threshold: int | None = None,
    p=0.5,
    coords: Sequence[Sequence[int]] | None = None,
    seed: int = 0,
) -> EventFamily:
    """Events "at least ``threshold`` of these ``r`` coordinates are 1".

    Coordinate sets are given in ``coords`` or drawn at random; the default
    threshold is a strict majority.
    """
    if threshold is None:
        threshold = r // 2 + 1
    if not 1 <= threshold <= r <= n:
        raise ValueError(f"need 1 <= threshold <= r <= n, got threshold={threshold}, r={r}, n={n}")
    rng = np.random.default_rng(seed)
    if coords is None:
        coords = [sorted(int(v) for v in rng.choice(n, size=r, replace=False)) for _ in range(k)]
    events = []
    for cs in coords:
        if len(cs) != r:
            raise ValueError(f"coordinate set {list(cs)} does not have r={r} elements")
        events.append(canonicalize(itertools.combinations(cs, threshold), n))
    return EventFamily(ProductSpace(_probabilities(p, n, rng)), tuple(events))


def random_monotone_dnf(
    n: int,
    k: int,
    minsets: tuple[int, int] = (1, 3),
    size: tuple[int, int] = (1, 3),
    p=(0.05, 0.95),
    weights: tuple[float, float] | None = None,
    seed: int = 0,
) -> EventFamily:
    """``k`` random up-sets, each the union of a random number of random principal events."""
    lo_m, hi_m = minsets
    lo_s, hi_s = size
    if not (1 <= lo_m <= hi_m and 1 <= lo_s <= hi_s <= n):
        raise ValueError(f"infeasible ranges minsets={minsets}, size={size} for n={n}")
    rng = np.random.default_rng(seed)
    probs = _probabilities(p, n, rng)
    events = []
    for _ in range(k):
        count = int(rng.integers(lo_m, hi_m + 1))
        ms = [
            rng.choice(n, size=int(rng.integers(lo_s, hi_s + 1)), replace=False).tolist()
            for _ in range(count)
        ]
        events.append(canonicalize(ms, n))
    c = None
    if weights is not None:
        lo_w, hi_w = weights
        if not 0 < lo_w <= hi_w:
            raise ValueError(f"weight range {weights} must be positive")
        c = tuple(float(v) for v in rng.uniform(lo_w, hi_w, size=k))
    return EventFamily(ProductSpace(probs), tuple(events), c)


def generate(kind: str, params: dict | None = None, seed: int = 0) -> EventFamily:
    """Dispatch to a generator by name; deterministic given ``seed``."""
    params = dict(params or {})
    try:
        if kind == "subgraph-count":
            return subgraph_count(seed=seed, **params)
        if kind == "threshold":
            return threshold_family(seed=seed, **params)
        if kind == "random-monotone-dnf":
            return random_monotone_dnf(seed=seed, **params)
    except (TypeError, KeyError, ModelError) as exc:
        raise ValueError(f"{kind}: bad parameters ({exc})") from None
    raise ValueError(f"unknown family kind {kind!r}; expected one of {', '.join(KINDS)}")
