"""Product spaces, monotone events and families of events.

A monotone (increasing) event on ``{0,1}^n`` is stored as its canonical
monotone DNF: the antichain of minimal coordinate sets whose all-ones
assignment forces the event.  Each min-set is an ``int`` bitmask, so subset
tests are a single ``&``.

Two encodings are reserved:

* ``minsets == ()`` is the impossible event;
* ``minsets == (0,)`` (the empty min-set) is the sure event.
"""
from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Union

if TYPE_CHECKING:
    from .dependency import DependencyRelation

__all__ = [
    "ProductSpace",
    "UpSet",
    "EventFamily",
    "ModelError",
    "canonicalize",
    "intersect",
    "unite",
    "restrict",
    "mask_of",
    "indices_of",
]

MinsetLike = Union[int, Iterable[int]]


class ModelError(ValueError):
    """Invalid space, event or family."""


def mask_of(indices: Iterable[int]) -> int:
    mask = 0
    for idx in indices:
        idx = int(idx)
        if idx < 0:
            raise ModelError(f"negative coordinate index {idx}")
        mask |= 1 << idx
    return mask


def indices_of(mask: int) -> tuple[int, ...]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return tuple(out)


def _sort_key(mask: int) -> tuple[int, int]:
    return (mask.bit_count(), mask)


@dataclass(frozen=True)
class ProductSpace:
    """``{0,1}^n`` with independent coordinates, ``Pr(omega_x = 1) = p[x]``."""

    p: tuple[float, ...]

    def __init__(self, p: Sequence[float]):
        probs = tuple(float(v) for v in p)
        for x, v in enumerate(probs):
            if not (0.0 <= v <= 1.0) or math.isnan(v):
                raise ModelError(f"p[{x}] = {v!r} is outside [0, 1]")
        object.__setattr__(self, "p", probs)

    @classmethod
    def uniform(cls, n: int, p: float) -> ProductSpace:
        return cls([p] * n)

    @property
    def n(self) -> int:
        return len(self.p)


@dataclass(frozen=True)
class UpSet:
    """A monotone event in canonical antichain form.

    Build instances through :func:`canonicalize` (or :meth:`principal`);
    the constructor assumes its input is already canonical.
    """

    n: int
    minsets: tuple[int, ...]
    support: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        support = 0
        for m in self.minsets:
            support |= m
        object.__setattr__(self, "support", support)

    @classmethod
    def principal(cls, n: int, coords: Iterable[int]) -> UpSet:
        return canonicalize([coords], n)

    @classmethod
    def sure(cls, n: int) -> UpSet:
        return cls(n, (0,))

    @classmethod
    def impossible(cls, n: int) -> UpSet:
        return cls(n, ())

    @property
    def is_sure(self) -> bool:
        return self.minsets == (0,)

    @property
    def is_impossible(self) -> bool:
        return not self.minsets

    @property
    def is_principal(self) -> bool:
        return len(self.minsets) == 1

    @property
    def support_size(self) -> int:
        return self.support.bit_count()

    def support_indices(self) -> tuple[int, ...]:
        return indices_of(self.support)

    def minset_indices(self) -> list[list[int]]:
        return [list(indices_of(m)) for m in self.minsets]

    def contains(self, omega: int) -> bool:
        """Membership of the outcome whose 1-coordinates form the mask ``omega``."""
        return any(m & omega == m for m in self.minsets)

    __contains__ = contains

    def __and__(self, other: UpSet) -> UpSet:
        return intersect(self, other)

    def __or__(self, other: UpSet) -> UpSet:
        return unite(self, other)


def canonicalize(minsets: Iterable[MinsetLike], n: int) -> UpSet:
    """Reduce a collection of min-sets to its antichain of minimal elements.

    Each min-set may be given as an iterable of coordinate indices or as an
    ``int`` bitmask.
    """
    limit = 1 << n
    masks = set()
    for m in minsets:
        mask = int(m) if isinstance(m, int) else mask_of(m)
        if mask < 0:
            raise ModelError(f"negative min-set mask {mask}")
        if mask >= limit:
            bad = indices_of(mask)[-1]
            raise ModelError(f"coordinate index {bad} out of range for n={n}")
        masks.add(mask)
    return UpSet(n, _antichain(masks))


def _antichain(masks: Iterable[int]) -> tuple[int, ...]:
    kept: list[int] = []
    for m in sorted(masks, key=_sort_key):
        if not any(k & m == k for k in kept):
            kept.append(m)
    return tuple(kept)


def _same_space(a: UpSet, b: UpSet) -> None:
    if a.n != b.n:
        raise ModelError(f"events live on different spaces (n={a.n} vs n={b.n})")


def intersect(a: UpSet, b: UpSet) -> UpSet:
    _same_space(a, b)
    return UpSet(a.n, _antichain({x | y for x in a.minsets for y in b.minsets}))


def unite(a: UpSet, b: UpSet) -> UpSet:
    _same_space(a, b)
    return UpSet(a.n, _antichain(a.minsets + b.minsets))


def restrict(a: UpSet, coord: int, value: int) -> UpSet:
    """Cofactor of ``a`` with coordinate ``coord`` pinned to ``value``."""
    if not 0 <= coord < a.n:
        raise ModelError(f"coordinate {coord} out of range for n={a.n}")
    bit = 1 << coord
    if value:
        return UpSet(a.n, _antichain({m & ~bit for m in a.minsets}))
    return UpSet(a.n, tuple(m for m in a.minsets if not m & bit))


@dataclass(frozen=True)
class EventFamily:
    """Events ``A_1..A_k`` on a common product space, with positive weights.

    ``dependency`` is ``None`` for the default support-overlap relation.
    """

    space: ProductSpace
    events: tuple[UpSet, ...]
    weights: tuple[float, ...] = None  # type: ignore[assignment]
    dependency: DependencyRelation | None = None

    def __post_init__(self):
        events = tuple(self.events)
        object.__setattr__(self, "events", events)
        if self.weights is None:
            weights = (1.0,) * len(events)
        else:
            weights = tuple(float(c) for c in self.weights)
        if len(weights) != len(events):
            raise ModelError(f"{len(weights)} weights for {len(events)} events")
        for i, c in enumerate(weights):
            if not c > 0 or math.isinf(c):
                raise ModelError(f"weight c[{i}] = {c!r} must be a positive finite number")
        object.__setattr__(self, "weights", weights)
        for i, ev in enumerate(events):
            if ev.n != self.space.n:
                raise ModelError(f"event {i} lives on n={ev.n}, space has n={self.space.n}")
        if self.dependency is not None and self.dependency.k != len(events):
            raise ModelError(
                f"dependency relation is over {self.dependency.k} events, family has {len(events)}"
            )

    @property
    def k(self) -> int:
        return len(self.events)

    @property
    def weighted(self) -> bool:
        return any(c != 1.0 for c in self.weights)

    @property
    def support(self) -> int:
        s = 0
        for ev in self.events:
            s |= ev.support
        return s

    def with_weights(self, weights: Sequence[float]) -> EventFamily:
        return EventFamily(self.space, self.events, tuple(weights), self.dependency)

    def with_dependency(self, relation: DependencyRelation | None) -> EventFamily:
        return EventFamily(self.space, self.events, self.weights, relation)
