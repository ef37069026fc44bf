"""Ground truth by exhaustive enumeration.

Everything here is computed from the joint indicator law of the events,
obtained by enumerating every assignment of the coordinates they depend
on.  The checks mirror the inequalities the bounds rest on, so a failing
check points at the exact step (and event) that broke.
"""
from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .bounds import DEFAULT_T_FRACTIONS, BoundReport, build_report
from .dependency import DependencyRelation, ValidationReport, resolve_relation, validate_relation
from .model import EventFamily, ProductSpace, UpSet, intersect, unite
from .prob import (
    DEFAULT_MAX_EXACT_SUPPORT,
    EXACT,
    PatternLaw,
    exact_prob,
    joint_pattern_law,
)

__all__ = [
    "DEFAULT_S_GRID",
    "INEQUALITY_TOL",
    "ExactDistribution",
    "AimEntry",
    "AimReport",
    "Aim2Entry",
    "Aim2Report",
    "AxiomReport",
    "DominationCheck",
    "Verification",
    "enumerate_distribution",
    "exact_lower_tail",
    "check_aim",
    "check_aim2",
    "check_axioms",
    "default_orderings",
    "verify",
]

DEFAULT_S_GRID = (0.0, 0.1, 0.5, 1.0, 2.0, 5.0)
INEQUALITY_TOL = 1e-9
EQUALITY_TOL = 1e-12
_CLOSURE_ENUM_LIMIT = 20


@dataclass(frozen=True)
class ExactDistribution:
    """Law of ``X = sum_i c_i 1[A_i]``.

    ``atoms`` maps each attainable value to its probability, in increasing
    order of value.  Sampled distributions (``method == "monte-carlo"``)
    hold empirical frequencies over ``samples`` draws.
    """

    atoms: dict[float, float]
    coords: int
    method: str = EXACT
    samples: int = 0
    law: PatternLaw | None = field(default=None, repr=False, compare=False)

    @property
    def total(self) -> float:
        return math.fsum(self.atoms.values())

    @property
    def mean(self) -> float:
        return math.fsum(v * q for v, q in self.atoms.items())

    @property
    def pr_zero(self) -> float:
        return exact_lower_tail(self, 0.0)


def _law_for(family, max_support, mc_samples, seed):
    return joint_pattern_law(
        family.events, family.space, max_support=max_support, mc_samples=mc_samples, seed=seed
    )


def enumerate_distribution(
    family: EventFamily,
    *,
    max_support: int = DEFAULT_MAX_EXACT_SUPPORT,
    mc_samples: int | None = None,
    seed: int = 0,
) -> ExactDistribution:
    """Exact law of ``X`` over all ``2**m`` assignments of the ``m`` support coordinates.

    Past the cap this raises ``TooLargeForExact`` unless ``mc_samples`` is
    given, in which case the law is sampled.
    """
    law = _law_for(family, max_support, mc_samples, seed)
    w = np.asarray(family.weights, dtype=float)
    values = w @ law.indicators() if family.k else np.zeros(law.size)
    order = np.argsort(values, kind="stable")
    atoms: dict[float, float] = {}
    current, acc = None, 0.0
    for v, q in zip(values[order].tolist(), law.probs[order].tolist()):
        if current is not None and abs(v - current) <= 1e-9 * max(1.0, abs(current)):
            acc += q
            continue
        if current is not None:
            atoms[current] = acc
        current, acc = v, q
    if current is not None:
        atoms[current] = acc
    return ExactDistribution(atoms, law.coords, law.method, law.samples, law)


def exact_lower_tail(dist: ExactDistribution, threshold: float) -> float:
    """``Pr(X <= threshold)``, with a ``1e-12`` allowance on the comparison."""
    return math.fsum(q for v, q in dist.atoms.items() if v <= threshold + EQUALITY_TOL)


def _resolve(family, rel):
    if rel is None:
        rel, _ = resolve_relation(family, force=True)
    return rel


@dataclass(frozen=True)
class AimEntry:
    event: int
    position: int
    r: float
    rhs: float
    slack: float
    skipped: bool
    passed: bool


@dataclass(frozen=True)
class AimReport:
    ordering: tuple[int, ...]
    entries: tuple[AimEntry, ...]
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def worst_slack(self) -> float:
        return min((e.slack for e in self.entries if not e.skipped), default=0.0)


def check_aim(
    family: EventFamily,
    rel: DependencyRelation | None = None,
    ordering: Sequence[int] | None = None,
    *,
    tol: float = INEQUALITY_TOL,
    law: PatternLaw | None = None,
    max_support: int = DEFAULT_MAX_EXACT_SUPPORT,
) -> AimReport:
    """Check ``r_i >= Pr(A_i) - sum_{j before i, j ~ i} Pr(A_i & A_j)`` along an ordering.

    ``r_i`` is the probability of ``A_i`` given that no earlier event
    occurred; events whose conditioning set has probability zero are
    skipped.
    """
    rel = _resolve(family, rel)
    order = tuple(range(family.k)) if ordering is None else tuple(int(v) for v in ordering)
    if sorted(order) != list(range(family.k)):
        raise ValueError(f"ordering {order} is not a permutation of 0..{family.k - 1}")
    if law is None:
        law = _law_for(family, max_support, None, 0)
    entries = []
    prefix = 0
    seen: list[int] = []
    for pos, i in enumerate(order):
        bit = 1 << i
        p_none = law.prob_none(prefix)
        p_i = law.prob_all(bit)
        rhs = p_i - sum(law.prob_all(bit | 1 << j) for j in seen if rel.related(i, j))
        if p_none <= 0.0:
            entries.append(AimEntry(i, pos, math.nan, rhs, 0.0, True, True))
        else:
            on = law.has_none(prefix) & law.has_all(bit)
            r = float(law.probs[on].sum()) / p_none
            slack = r - rhs
            entries.append(AimEntry(i, pos, r, rhs, slack, False, slack >= -tol))
        prefix |= bit
        seen.append(i)
    return AimReport(order, tuple(entries), tol)


@dataclass(frozen=True)
class Aim2Entry:
    event: int
    s: float
    lhs: float
    rhs: float
    slack: float
    passed: bool


@dataclass(frozen=True)
class Aim2Report:
    entries: tuple[Aim2Entry, ...]
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def worst_slack(self) -> float:
        return min((e.slack for e in self.entries), default=0.0)


def check_aim2(
    family: EventFamily,
    rel: DependencyRelation | None = None,
    s_grid: Sequence[float] = DEFAULT_S_GRID,
    *,
    tol: float = INEQUALITY_TOL,
    law: PatternLaw | None = None,
    max_support: int = DEFAULT_MAX_EXACT_SUPPORT,
) -> Aim2Report:
    """Check ``E(J_i e^{-sX}) >= E(J_i e^{-sY_i}) E(e^{-sX})`` for each event and ``s``.

    ``J_i = c_i 1[A_i]`` and ``Y_i`` sums ``J_j`` over ``i`` and its neighbors.
    """
    rel = _resolve(family, rel)
    if law is None:
        law = _law_for(family, max_support, None, 0)
    ind = law.indicators()
    w = np.asarray(family.weights, dtype=float)
    J = w[:, None] * ind
    X = J.sum(axis=0) if family.k else np.zeros(law.size)
    entries = []
    for i in range(family.k):
        Y = J[(i,) + rel.neighbors(i), :].sum(axis=0)
        for s in s_grid:
            if s < 0:
                raise ValueError(f"s must be nonnegative, got {s!r}")
            ex = np.exp(-s * X)
            lhs = float(law.probs @ (J[i] * ex))
            rhs = float(law.probs @ (J[i] * np.exp(-s * Y))) * float(law.probs @ ex)
            slack = lhs - rhs
            entries.append(Aim2Entry(i, float(s), lhs, rhs, slack, slack >= -tol))
    return Aim2Report(tuple(entries), tol)


@dataclass(frozen=True)
class AxiomReport:
    harris_checks: int
    closure_checks: int
    identity_checks: int
    worst_harris_slack: float
    worst_identity_error: float
    failures: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.failures


def _is_canonical(a: UpSet) -> bool:
    ms = a.minsets
    if list(ms) != sorted(set(ms), key=lambda m: (m.bit_count(), m)):
        return False
    return not any(x != y and x & y == x for x in ms for y in ms)


def _closure_semantics_ok(a: UpSet, b: UpSet) -> bool:
    cap, cup = intersect(a, b), unite(a, b)
    uniform = ProductSpace.uniform(a.n, 0.5)
    law = joint_pattern_law([a, b, cap, cup], uniform, max_support=_CLOSURE_ENUM_LIMIT)
    ia, ib, ic, iu = (law.bits(j) for j in range(4))
    return bool(np.all(ic == (ia & ib)) and np.all(iu == (ia | ib)))


def check_axioms(
    space: ProductSpace,
    sample_events: Sequence[Sequence[UpSet]],
    *,
    tol: float = EQUALITY_TOL,
) -> AxiomReport:
    """Positive correlation, lattice closure and the three-event identity.

    Items of ``sample_events`` are pairs ``(A, B)`` or triples ``(A, B, C)``.
    Pairs get the correlation check plus closure (canonical results whose
    indicators are the AND/OR of the inputs).  Triples get
    ``Pr(A&(B&C)) + Pr(A&(B|C)) = Pr(A&B) + Pr(A&C)``, and when ``A`` is
    independent of ``B`` and of ``C``, independence of ``A`` from ``B&C``
    and ``B|C``.
    """
    memo: dict = {}

    def pr(ev: UpSet) -> float:
        return exact_prob(ev, space, memo=memo).value

    failures: list[str] = []
    harris = closure = identity = 0
    worst_h, worst_id = math.inf, 0.0
    for n_item, item in enumerate(sample_events):
        if len(item) == 2:
            a, b = item
            slack = pr(intersect(a, b)) - pr(a) * pr(b)
            harris += 1
            worst_h = min(worst_h, slack)
            if slack < -tol:
                failures.append(f"item {n_item}: Pr(A&B) - Pr(A)Pr(B) = {slack:.3g}")
            closure += 1
            cap, cup = intersect(a, b), unite(a, b)
            if not (_is_canonical(cap) and _is_canonical(cup)):
                failures.append(f"item {n_item}: intersection/union not canonical")
            elif (a.support | b.support).bit_count() <= _CLOSURE_ENUM_LIMIT and not _closure_semantics_ok(a, b):
                failures.append(f"item {n_item}: intersection/union indicators disagree with AND/OR")
        elif len(item) == 3:
            a, b, c = item
            left = pr(intersect(a, intersect(b, c))) + pr(intersect(a, unite(b, c)))
            right = pr(intersect(a, b)) + pr(intersect(a, c))
            err = abs(left - right)
            identity += 1
            worst_id = max(worst_id, err)
            if err > tol:
                failures.append(f"item {n_item}: three-event identity off by {err:.3g}")
            pa = pr(a)
            if abs(pr(intersect(a, b)) - pa * pr(b)) <= tol and abs(pr(intersect(a, c)) - pa * pr(c)) <= tol:
                for name, ev in (("B&C", intersect(b, c)), ("B|C", unite(b, c))):
                    gap = abs(pr(intersect(a, ev)) - pa * pr(ev))
                    worst_id = max(worst_id, gap)
                    if gap > 10 * tol:
                        failures.append(f"item {n_item}: A independent of B and C but not of {name} ({gap:.3g})")
        else:
            raise ValueError(f"item {n_item} has {len(item)} events; expected 2 or 3")
    return AxiomReport(
        harris_checks=harris,
        closure_checks=closure,
        identity_checks=identity,
        worst_harris_slack=0.0 if worst_h == math.inf else worst_h,
        worst_identity_error=worst_id,
        failures=tuple(failures),
    )


def default_orderings(k: int, seed: int = 0, extra: int = 5) -> list[tuple[int, ...]]:
    """The identity ordering plus ``extra`` seeded random permutations."""
    rng = np.random.default_rng(seed)
    out = [tuple(range(k))]
    out.extend(tuple(int(v) for v in rng.permutation(k)) for _ in range(extra))
    return out


@dataclass(frozen=True)
class DominationCheck:
    bound: str
    t: float | None
    bound_value: float
    exact_value: float
    slack: float
    allowed: float
    passed: bool


@dataclass(frozen=True)
class Verification:
    report: BoundReport
    distribution: ExactDistribution
    pr_zero: float
    lower_tails: tuple[float, ...]
    domination: tuple[DominationCheck, ...]
    aim: tuple[AimReport, ...]
    aim2: Aim2Report | None
    validation: ValidationReport
    statistical: bool

    @property
    def violations(self) -> list[DominationCheck]:
        return [d for d in self.domination if not d.passed]

    @property
    def passed(self) -> bool:
        return (
            not self.violations
            and all(a.passed for a in self.aim)
            and (self.aim2 is None or self.aim2.passed)
            and self.validation.passed
        )


def verify(
    family: EventFamily,
    rel: DependencyRelation | None = None,
    *,
    t_fractions: Sequence[float] = DEFAULT_T_FRACTIONS,
    s_grid: Sequence[float] = DEFAULT_S_GRID,
    tol: float = INEQUALITY_TOL,
    max_support: int = DEFAULT_MAX_EXACT_SUPPORT,
    mc_samples: int | None = None,
    seed: int = 0,
    orderings: Sequence[Sequence[int]] | None = None,
) -> Verification:
    """Compare every bound with the exact law of ``X`` and run the step checks.

    With ``mc_samples`` set and a support past the cap, the law is sampled:
    bound comparisons then allow three standard errors and the
    conditional-step checks are skipped.
    """
    if rel is None:
        rel = family.dependency
    if rel is None:
        rel, _ = resolve_relation(family)
    report = build_report(
        family, rel, t_fractions=t_fractions, max_support=max_support,
        mc_samples=mc_samples, seed=seed,
    )
    validation = validate_relation(
        rel, family, EQUALITY_TOL, max_support=max_support, mc_samples=mc_samples, seed=seed
    )
    dist = enumerate_distribution(family, max_support=max_support, mc_samples=mc_samples, seed=seed)
    statistical = not dist.law.exact
    n = dist.samples

    def allowance(q: float) -> float:
        return tol + (3.0 * math.sqrt(q * (1 - q) / n) if statistical else 0.0)

    s = report.summary
    pr0 = dist.pr_zero
    checks = []
    for bound_id, value in report.pr0.items():
        if bound_id == "lower-bound":
            slack = pr0 - value
        else:
            slack = value - pr0
        a = allowance(pr0)
        checks.append(DominationCheck(bound_id, None, value, pr0, slack, a, slack >= -a))
    tails = tuple(exact_lower_tail(dist, s.mu - t) for t in report.t_grid)
    for bound_id, values in report.tail.items():
        for t, value, q in zip(report.t_grid, values, tails):
            a = allowance(q)
            checks.append(DominationCheck(bound_id, t, value, q, value - q, a, value - q >= -a))

    aim: tuple[AimReport, ...] = ()
    aim2 = None
    if not statistical:
        if orderings is None:
            orderings = default_orderings(family.k, seed)
        aim = tuple(check_aim(family, rel, o, tol=tol, law=dist.law) for o in orderings)
        aim2 = check_aim2(family, rel, s_grid, tol=tol, law=dist.law)
    return Verification(
        report=report,
        distribution=dist,
        pr_zero=pr0,
        lower_tails=tails,
        domination=tuple(checks),
        aim=aim,
        aim2=aim2,
        validation=validation,
        statistical=statistical,
    )
