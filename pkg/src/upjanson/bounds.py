"""Lower-tail bounds for counts of monotone events.

``X = sum_i c_i 1[A_i]``.  Every upper bound here is a bound on either
``Pr(X = 0)`` or ``Pr(X <= mu - t)``; ``lower_bound`` bounds ``Pr(X = 0)``
from below.  Raw values may exceed 1 (the bound is then vacuous); the
report keeps both raw and clamped values.
"""
from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .dependency import DependencyRelation, ValidationReport, resolve_relation
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
    "DEFAULT_T_FRACTIONS",
    "PR0_BOUNDS",
    "TAIL_BOUNDS",
    "Summary",
    "BoundReport",
    "WeightedFamilyError",
    "phi",
    "summarize",
    "bound_i1",
    "bound_i2",
    "bound_i1a",
    "bound_i2a",
    "i2a_exponent",
    "bound_i2e",
    "lower_bound",
    "build_report",
]

DEFAULT_T_FRACTIONS = (0.25, 0.5, 0.75, 1.0)
PR0_BOUNDS = ("i1", "i1a", "i2a", "lower-bound")
TAIL_BOUNDS = ("i2-phi", "i2-quadratic", "i2e-phi", "i2e-quadratic")

_EXP_MAX = 709.0


class WeightedFamilyError(ValueError):
    """An unweighted-only bound was asked for on a weighted family."""


def _exp(x: float) -> float:
    return math.inf if x > _EXP_MAX else math.exp(x)


def _seed(seed: int, *ids: int) -> int:
    return int(np.random.SeedSequence([seed, *ids]).generate_state(1)[0])


def phi(x: float) -> float:
    """``(1+x) log(1+x) - x`` on ``[-1, inf)``, with ``phi(-1) = 1``."""
    if x < -1.0 or math.isnan(x):
        raise ValueError(f"phi is defined on [-1, inf), got {x!r}")
    if x == -1.0:
        return 1.0
    if abs(x) < 1e-8:
        return x * x / 2.0 - x**3 / 6.0
    return (1.0 + x) * math.log1p(x) - x


@dataclass(frozen=True)
class Summary:
    """Moments entering the bounds.

    ``delta`` is the unweighted sum over *ordered* related pairs;
    ``delta_bar`` is its weighted analogue including the diagonal terms.
    """

    mu: float
    delta: float
    eps: float
    delta_bar: float
    per_event: tuple[tuple[float, float], ...]
    method: str = EXACT
    relation_size: int = 0

    @property
    def probs(self) -> tuple[float, ...]:
        return tuple(pr for pr, _ in self.per_event)

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(c for _, c in self.per_event)

    @property
    def weighted(self) -> bool:
        return any(c != 1.0 for c in self.weights)

    def t_grid(self, fractions: Sequence[float] = DEFAULT_T_FRACTIONS) -> tuple[float, ...]:
        return tuple(self.mu * f for f in fractions)


def summarize(
    family: EventFamily,
    rel: DependencyRelation | None = None,
    *,
    max_support: int = DEFAULT_MAX_EXACT_SUPPORT,
    mc_samples: int | None = None,
    seed: int = 0,
) -> Summary:
    if rel is None:
        rel, _ = resolve_relation(family, max_support=max_support, mc_samples=mc_samples, seed=seed)
    memo: dict = {}
    space, events, c = family.space, family.events, family.weights
    methods = set()
    probs = []
    for i, ev in enumerate(events):
        pv = event_prob(ev, space, max_support=max_support, mc_samples=mc_samples,
                        seed=_seed(seed, i), memo=memo)
        methods.add(pv.method)
        probs.append(pv.value)
    joint: dict[tuple[int, int], float] = {}
    for i, j in rel.sorted_pairs():
        pv = pair_prob(events[i], events[j], space, max_support=max_support,
                       mc_samples=mc_samples, seed=_seed(seed, i, j), memo=memo)
        methods.add(pv.method)
        joint[i, j] = pv.value

    mu = 0.0
    diag = 0.0
    for pr, ci in zip(probs, c):
        mu += ci * pr
        diag += ci * ci * pr
    delta = 0.0
    off = 0.0
    for i in range(len(events)):
        for j in rel.neighbors(i):
            q = joint[min(i, j), max(i, j)]
            delta += q
            off += c[i] * c[j] * q
    return Summary(
        mu=mu,
        delta=delta,
        eps=max(probs, default=0.0),
        delta_bar=diag + off,
        per_event=tuple(zip(probs, c)),
        method=MONTE_CARLO if MONTE_CARLO in methods else EXACT,
        relation_size=len(rel),
    )


def _require_unweighted(s: Summary, name: str) -> None:
    if s.weighted:
        raise WeightedFamilyError(
            f"{name} is stated for unweighted counts; use bound_i2e or bound_i2a for weighted families"
        )


def _check_t(s: Summary, t: float) -> float:
    if t < 0 or t > s.mu * (1 + 1e-12) + 1e-300:
        raise ValueError(f"t = {t!r} outside [0, mu] = [0, {s.mu!r}]")
    return min(t, s.mu)


def bound_i1(s: Summary) -> float:
    """``Pr(X = 0) <= exp(-mu + delta/2)``."""
    _require_unweighted(s, "bound_i1")
    return _exp(-s.mu + s.delta / 2.0)


def _tail_forms(mu: float, denom: float, t: float) -> tuple[float, float]:
    if mu == 0.0 or t == 0.0:
        return 1.0, 1.0
    phi_form = math.exp(-phi(-t / mu) * mu * mu / denom)
    quadratic = math.exp(-t * t / (2.0 * denom))
    return phi_form, quadratic


def bound_i2(s: Summary, t: float) -> tuple[float, float]:
    """``(phi form, quadratic form)`` bounds on ``Pr(X <= mu - t)``."""
    _require_unweighted(s, "bound_i2")
    t = _check_t(s, t)
    return _tail_forms(s.mu, s.mu + s.delta, t)


def bound_i2e(s: Summary, t: float) -> tuple[float, float]:
    """Weighted version of :func:`bound_i2`, with ``delta_bar`` in place of ``mu + delta``."""
    t = _check_t(s, t)
    return _tail_forms(s.mu, s.delta_bar, t)


def bound_i1a(s: Summary) -> float:
    """``prod(1 - Pr(A_i)) * exp(delta / (2 (1 - eps)))``; 0 when some ``Pr(A_i) = 1``."""
    _require_unweighted(s, "bound_i1a")
    if s.eps >= 1.0:
        return 0.0
    log_prod = sum(math.log1p(-pr) for pr in s.probs)
    return _exp(log_prod + s.delta / (2.0 * (1.0 - s.eps)))


def lower_bound(s: Summary) -> float:
    out = 1.0
    for pr in s.probs:
        out *= 1.0 - pr
    return out


def i2a_exponent(
    family: EventFamily,
    rel: DependencyRelation | None = None,
    *,
    max_support: int = DEFAULT_MAX_EXACT_SUPPORT,
    mc_samples: int | None = None,
    seed: int = 0,
) -> tuple[float, str]:
    """``sum_i E(J_i / (J_i + sum_{j~i} J_j))`` and the method used.

    The ratio is taken as 0 off ``A_i``.  Each term is computed on the joint
    law of ``A_i`` and its neighbors.
    """
    if rel is None:
        rel, _ = resolve_relation(family, max_support=max_support, mc_samples=mc_samples, seed=seed)
    c = family.weights
    total, method = 0.0, EXACT
    for i in range(family.k):
        idx = (i,) + rel.neighbors(i)
        events = [family.events[j] for j in idx]
        try:
            law = joint_pattern_law(events, family.space, max_support=max_support)
        except TooLargeForExact:
            if not mc_samples:
                raise
            law = joint_pattern_law(events, family.space, max_support=max_support,
                                    mc_samples=mc_samples, seed=_seed(seed, i, 2**31))
            method = MONTE_CARLO
        ind = law.indicators()
        w = np.array([c[j] for j in idx])
        y = w @ ind
        on = ind[0] > 0
        ratio = np.zeros_like(y)
        ratio[on] = w[0] / y[on]
        total += float(law.probs @ ratio)
    return total, method


def bound_i2a(
    family: EventFamily,
    rel: DependencyRelation | None = None,
    *,
    max_support: int = DEFAULT_MAX_EXACT_SUPPORT,
    mc_samples: int | None = None,
    seed: int = 0,
) -> float:
    """``Pr(X = 0) <= exp(-sum_i E(J_i / Y_i))`` with ``Y_i`` the neighborhood sum."""
    value, _ = i2a_exponent(family, rel, max_support=max_support, mc_samples=mc_samples, seed=seed)
    return math.exp(-value)


@dataclass(frozen=True)
class BoundReport:
    """All bounds for one family.

    ``pr0`` maps bound ids to values for ``Pr(X = 0)``; ``tail`` maps ids to
    one value per entry of ``t_grid``.  Bounds that do not apply to the
    family (unweighted-only forms on weighted input) are absent.
    """

    summary: Summary
    t_fractions: tuple[float, ...]
    t_grid: tuple[float, ...]
    pr0: dict[str, float]
    tail: dict[str, tuple[float, ...]]
    methods: dict[str, str]
    relation: DependencyRelation
    validation: ValidationReport | None = None
    notes: tuple[str, ...] = field(default=())

    def clamped(self, bound_id: str):
        if bound_id in self.pr0:
            return min(1.0, max(0.0, self.pr0[bound_id]))
        return tuple(min(1.0, max(0.0, v)) for v in self.tail[bound_id])


def build_report(
    family: EventFamily,
    rel: DependencyRelation | None = None,
    *,
    t_fractions: Sequence[float] = DEFAULT_T_FRACTIONS,
    max_support: int = DEFAULT_MAX_EXACT_SUPPORT,
    mc_samples: int | None = None,
    seed: int = 0,
    force: bool = False,
) -> BoundReport:
    """Summary plus every applicable bound on the ``t`` grid.

    A user-supplied relation on ``family`` is validated first; see
    :func:`~upjanson.dependency.resolve_relation`.
    """
    validation = None
    if rel is None:
        rel, validation = resolve_relation(
            family, force=force, max_support=max_support, mc_samples=mc_samples, seed=seed
        )
    fracs = tuple(float(f) for f in t_fractions)
    for f in fracs:
        if not 0.0 <= f <= 1.0:
            raise ValueError(f"t fraction {f!r} outside [0, 1]")
    s = summarize(family, rel, max_support=max_support, mc_samples=mc_samples, seed=seed)
    grid = s.t_grid(fracs)
    exponent, i2a_method = i2a_exponent(
        family, rel, max_support=max_support, mc_samples=mc_samples, seed=seed
    )
    pr0: dict[str, float] = {}
    tail: dict[str, tuple[float, ...]] = {}
    notes = []
    if not s.weighted:
        pr0["i1"] = bound_i1(s)
        pr0["i1a"] = bound_i1a(s)
    else:
        notes.append("weighted family: i1, i1a and i2 omitted; i2a and i2e use weighted counts")
    pr0["i2a"] = math.exp(-exponent)
    pr0["lower-bound"] = lower_bound(s)
    if not s.weighted:
        forms = [bound_i2(s, t) for t in grid]
        tail["i2-phi"] = tuple(f[0] for f in forms)
        tail["i2-quadratic"] = tuple(f[1] for f in forms)
    forms = [bound_i2e(s, t) for t in grid]
    tail["i2e-phi"] = tuple(f[0] for f in forms)
    tail["i2e-quadratic"] = tuple(f[1] for f in forms)
    return BoundReport(
        summary=s,
        t_fractions=fracs,
        t_grid=grid,
        pr0=pr0,
        tail=tail,
        methods={"summary": s.method, "i2a": i2a_method},
        relation=rel,
        validation=validation,
        notes=tuple(notes),
    )
