"""The dependency relation between events of a family.

Two events are related when they may be dependent.  The bounds are only
valid when every event is independent of the *set* of events it is not
related to, so relations are either sound by construction (disjoint
supports under product measure) or checked numerically.
"""
from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from .model import EventFamily
from .prob import (
    DEFAULT_MAX_EXACT_SUPPORT,
    EXACT,
    MONTE_CARLO,
    TooLargeForExact,
    event_prob,
    joint_pattern_law,
    pair_prob,
)

__all__ = [
    "SUPPORT",
    "EXACT_REFINED",
    "USER",
    "DependencyRelation",
    "ValidationEntry",
    "ValidationReport",
    "UnsoundRelation",
    "build_support_relation",
    "refine_exact",
    "validate_relation",
    "resolve_relation",
]

log = logging.getLogger(__name__)

SUPPORT = "support-overlap"
EXACT_REFINED = "exact-refined"
USER = "user-supplied"
_MODES = (SUPPORT, EXACT_REFINED, USER)

DEFAULT_VALIDATION_SAMPLES = 100_000


@dataclass(frozen=True)
class DependencyRelation:
    """Symmetric, irreflexive relation on event indices ``0..k-1``.

    ``pairs`` holds unordered pairs normalized to ``(i, j)`` with ``i < j``.
    """

    k: int
    pairs: frozenset = frozenset()
    mode: str = USER
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValueError(f"unknown relation mode {self.mode!r}")
        norm = set()
        for pair in self.pairs:
            i, j = (int(v) for v in pair)
            if i == j:
                raise ValueError(f"relation must be irreflexive, got pair ({i}, {j})")
            if not (0 <= i < self.k and 0 <= j < self.k):
                raise ValueError(f"pair ({i}, {j}) out of range for k={self.k}")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "pairs", frozenset(norm))
        nbrs: list[list[int]] = [[] for _ in range(self.k)]
        for i, j in norm:
            nbrs[i].append(j)
            nbrs[j].append(i)
        object.__setattr__(self, "_nbrs", tuple(tuple(sorted(v)) for v in nbrs))

    @classmethod
    def from_pairs(cls, k: int, pairs: Iterable[tuple[int, int]], mode: str = USER):
        return cls(k, frozenset(tuple(p) for p in pairs), mode)

    def related(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.pairs

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self._nbrs[i]

    def non_neighbors(self, i: int) -> tuple[int, ...]:
        near = set(self._nbrs[i])
        return tuple(j for j in range(self.k) if j != i and j not in near)

    def sorted_pairs(self) -> list[tuple[int, int]]:
        return sorted(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)


def build_support_relation(family: EventFamily) -> DependencyRelation:
    """Relate two events exactly when their supports share a coordinate."""
    ev = family.events
    pairs = {
        (i, j)
        for i in range(len(ev))
        for j in range(i + 1, len(ev))
        if ev[i].support & ev[j].support
    }
    return DependencyRelation(len(ev), frozenset(pairs), SUPPORT)


def refine_exact(
    rel: DependencyRelation,
    family: EventFamily,
    tol: float = 1e-12,
    *,
    max_support: int = DEFAULT_MAX_EXACT_SUPPORT,
) -> DependencyRelation:
    """Drop related pairs whose exact joint probability factorizes within ``tol``.

    Pairs whose joint support is past the cap are kept, with a warning.
    """
    memo: dict = {}
    space = family.space
    keep, warnings = set(), list(rel.warnings)
    for i, j in rel.sorted_pairs():
        a, b = family.events[i], family.events[j]
        try:
            joint = pair_prob(a, b, space, max_support=max_support, memo=memo).value
            pa = event_prob(a, space, max_support=max_support, memo=memo).value
            pb = event_prob(b, space, max_support=max_support, memo=memo).value
        except TooLargeForExact as exc:
            warnings.append(f"pair ({i}, {j}) kept: {exc}")
            log.warning("pair (%d, %d) kept: %s", i, j, exc)
            keep.add((i, j))
            continue
        if abs(joint - pa * pb) > tol:
            keep.add((i, j))
    return DependencyRelation(rel.k, frozenset(keep), EXACT_REFINED, tuple(warnings))


@dataclass(frozen=True)
class ValidationEntry:
    event: int
    non_neighbors: int
    subsets_checked: int
    worst_violation: float
    worst_subset: tuple[int, ...]
    allowed: float
    passed: bool
    method: str


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    worst_violation: float
    worst_event: int | None
    worst_subset: tuple[int, ...]
    tolerance: float
    method: str
    entries: tuple[ValidationEntry, ...]

    @property
    def failures(self) -> list[ValidationEntry]:
        return [e for e in self.entries if not e.passed]


class UnsoundRelation(ValueError):
    """A declared relation leaves some event dependent on its non-neighbors."""

    def __init__(self, report: ValidationReport):
        self.report = report
        super().__init__(
            f"dependency relation is unsound: event {report.worst_event} is not independent "
            f"of non-neighbors {list(report.worst_subset)} "
            f"(violation {report.worst_violation:.3g} > tolerance {report.tolerance:.3g})"
        )


def _superset_sums(dense: np.ndarray, b: int) -> np.ndarray:
    """``out[S] = sum of dense[P] over patterns P containing S``."""
    out = dense.copy()
    for bit in range(b):
        view = out.reshape(-1, 2, 1 << bit)
        view[:, 0, :] += view[:, 1, :]
    return out


def _check_event(i, nn, family, tol, max_support, mc_samples, seed, exhaustive_limit, n_random):
    events = [family.events[i]] + [family.events[j] for j in nn]
    try:
        law = joint_pattern_law(events, family.space, max_support=max_support)
    except TooLargeForExact:
        law = joint_pattern_law(
            events,
            family.space,
            max_support=max_support,
            mc_samples=mc_samples or DEFAULT_VALIDATION_SAMPLES,
            seed=seed + i,
        )
    b = len(events)
    if b - 1 <= exhaustive_limit:
        dense = np.zeros(1 << b)
        np.add.at(dense, law.codes[:, 0].astype(np.intp), law.probs)
        allp = _superset_sums(dense, b)
        t = np.arange(2, 1 << b, 2)  # nonempty subsets of non-neighbors, event i excluded
        joint, p_i, p_t = allp[t | 1], allp[1], allp[t]
        masks = t.tolist()
    else:
        rng = np.random.default_rng(seed + i)
        masks = []
        for _ in range(n_random):
            size = int(rng.integers(1, b))
            chosen = rng.choice(np.arange(1, b), size=size, replace=False)
            masks.append(int(sum(1 << int(c) for c in chosen)))
        p_i = law.prob_all(1)
        joint = np.array([law.prob_all(t | 1) for t in masks])
        p_t = np.array([law.prob_all(t) for t in masks])
    product = p_i * p_t
    viol = np.abs(joint - product)
    if law.exact:
        allowed = np.full(viol.shape, tol)
    else:
        n = law.samples
        allowed = tol + 4.0 * np.sqrt(
            (joint * (1 - joint) + product * (1 - product)) / n + 1.0 / n**2
        )
    excess = viol - allowed
    w = int(np.argmax(excess)) if excess.size else 0
    worst_mask = masks[w] if masks else 0
    subset = tuple(nn[c - 1] for c in range(1, b) if worst_mask >> c & 1)
    return ValidationEntry(
        event=i,
        non_neighbors=len(nn),
        subsets_checked=len(masks),
        worst_violation=float(viol[w]) if viol.size else 0.0,
        worst_subset=subset,
        allowed=float(allowed[w]) if viol.size else tol,
        passed=bool(np.all(viol <= allowed)),
        method=law.method,
    )


def validate_relation(
    rel: DependencyRelation,
    family: EventFamily,
    tol: float = 1e-12,
    *,
    max_support: int = DEFAULT_MAX_EXACT_SUPPORT,
    mc_samples: int | None = None,
    seed: int = 0,
    exhaustive_limit: int = 10,
    random_subsets: int = 200,
) -> ValidationReport:
    """Check that each event is independent of every intersection of its non-neighbors.

    All subsets are checked when an event has at most ``exhaustive_limit``
    non-neighbors, otherwise ``random_subsets`` seeded random ones.  Past
    the exact cap the joint law is sampled and the tolerance widens to four
    standard errors; such entries are marked ``monte-carlo``.
    """
    if rel.k != family.k:
        raise ValueError(f"relation over {rel.k} events, family has {family.k}")
    entries = []
    for i in range(family.k):
        nn = rel.non_neighbors(i)
        if not nn:
            entries.append(ValidationEntry(i, 0, 0, 0.0, (), tol, True, EXACT))
            continue
        entries.append(
            _check_event(
                i, nn, family, tol, max_support, mc_samples, seed, exhaustive_limit, random_subsets
            )
        )
    worst = max(entries, key=lambda e: e.worst_violation - e.allowed, default=None)
    failed = [e for e in entries if not e.passed]
    if failed:
        worst = max(failed, key=lambda e: e.worst_violation - e.allowed)
    method = MONTE_CARLO if any(e.method == MONTE_CARLO for e in entries) else EXACT
    return ValidationReport(
        passed=not failed,
        worst_violation=max((e.worst_violation for e in entries), default=0.0),
        worst_event=worst.event if worst is not None and worst.non_neighbors else None,
        worst_subset=worst.worst_subset if worst is not None else (),
        tolerance=tol,
        method=method,
        entries=tuple(entries),
    )


def resolve_relation(
    family: EventFamily,
    *,
    force: bool = False,
    tol: float = 1e-12,
    max_support: int = DEFAULT_MAX_EXACT_SUPPORT,
    mc_samples: int | None = None,
    seed: int = 0,
) -> tuple[DependencyRelation, ValidationReport | None]:
    """The relation to use for ``family``, validated unless sound by construction.

    Raises :class:`UnsoundRelation` when validation fails and ``force`` is false.
    """
    rel = family.dependency
    if rel is None or rel.mode == SUPPORT:
        return rel or build_support_relation(family), None
    report = validate_relation(
        rel, family, tol, max_support=max_support, mc_samples=mc_samples, seed=seed
    )
    if not report.passed and not force:
        raise UnsoundRelation(report)
    if not report.passed:
        log.warning("proceeding with an unsound relation: worst violation %.3g", report.worst_violation)
    return rel, report

