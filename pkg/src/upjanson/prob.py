"""Probabilities of monotone events under product measure.

Exact values come from a memoized Shannon (cofactor) expansion of the
canonical DNF.  Joint laws of several events, needed by the oracle and by
some bounds, come from vectorized enumeration of the joint support, with
a seeded Monte Carlo sampler as the fallback for supports past the cap.
"""
from __future__ import annotations

import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import numpy as np

from .model import ProductSpace, UpSet, _antichain, indices_of, intersect

__all__ = [
    "DEFAULT_MAX_EXACT_SUPPORT",
    "ProbValue",
    "PatternLaw",
    "TooLargeForExact",
    "exact_prob",
    "pair_prob",
    "mc_prob",
    "event_prob",
    "joint_pattern_law",
]

DEFAULT_MAX_EXACT_SUPPORT = 25
EXACT = "exact"
MONTE_CARLO = "monte-carlo"

# rows per Monte Carlo chunk, and log2 of outcomes per enumeration block
_MC_CHUNK = 1 << 16
_BLOCK_BITS = 18


class TooLargeForExact(ValueError):
    """Raised when a support is past the exact-computation cap."""

    def __init__(self, support: int, cap: int, what: str = "event"):
        self.support = support
        self.cap = cap
        super().__init__(
            f"too-large-for-exact: {what} support has {support} coordinates, "
            f"max_exact_support is {cap} (raise the cap or enable Monte Carlo)"
        )


@dataclass(frozen=True)
class ProbValue:
    value: float
    method: str = EXACT
    stderr: float = 0.0

    def __post_init__(self):
        if not -1e-12 <= self.value <= 1 + 1e-12:
            raise ValueError(f"probability {self.value!r} outside [0, 1]")
        if self.method == EXACT and self.stderr != 0.0:
            raise ValueError("exact probabilities carry no standard error")

    def __float__(self) -> float:
        return self.value

    @property
    def exact(self) -> bool:
        return self.method == EXACT


def _product(mask: int, p: Sequence[float]) -> float:
    out = 1.0
    for x in indices_of(mask):
        out *= p[x]
    return out


def _components(minsets: tuple[int, ...]) -> list[tuple[int, ...]]:
    # groups of min-sets with pairwise disjoint supports across groups
    groups: list[tuple[int, list[int]]] = []
    for m in minsets:
        merged_support, merged = m, [m]
        rest = []
        for sup, members in groups:
            if sup & merged_support:
                merged_support |= sup
                merged.extend(members)
            else:
                rest.append((sup, members))
        rest.append((merged_support, merged))
        groups = rest
    return [tuple(sorted(members, key=lambda v: (v.bit_count(), v))) for _, members in groups]


def _branch_coordinate(minsets: tuple[int, ...]) -> int:
    counts: dict[int, int] = {}
    for m in minsets:
        for x in indices_of(m):
            counts[x] = counts.get(x, 0) + 1
    return min(counts, key=lambda x: (-counts[x], x))


def _shannon(minsets: tuple[int, ...], p: Sequence[float], memo: dict) -> float:
    if not minsets:
        return 0.0
    if minsets[0] == 0:
        return 1.0
    if len(minsets) == 1:
        return _product(minsets[0], p)
    hit = memo.get(minsets)
    if hit is not None:
        return hit
    parts = _components(minsets)
    if len(parts) > 1:
        miss = 1.0
        for part in parts:
            miss *= 1.0 - _shannon(part, p, memo)
        value = 1.0 - miss
    else:
        x = _branch_coordinate(minsets)
        bit = 1 << x
        one = _antichain({m & ~bit for m in minsets})
        zero = tuple(m for m in minsets if not m & bit)
        value = p[x] * _shannon(one, p, memo) + (1.0 - p[x]) * _shannon(zero, p, memo)
    memo[minsets] = value
    return value


def exact_prob(
    a: UpSet,
    space: ProductSpace,
    *,
    max_support: int = DEFAULT_MAX_EXACT_SUPPORT,
    memo: dict | None = None,
) -> ProbValue:
    """Exact ``Pr(a)``.

    ``memo`` may be shared between calls on the same space; keys are the
    canonical restricted DNFs.
    """
    if a.n != space.n:
        raise ValueError(f"event on n={a.n} evaluated on a space with n={space.n}")
    if a.support_size > max_support:
        raise TooLargeForExact(a.support_size, max_support)
    value = _shannon(a.minsets, space.p, {} if memo is None else memo)
    return ProbValue(min(1.0, max(0.0, value)))


def _sample_chunks(p_local: np.ndarray, samples: int, seed: int) -> Iterator[np.ndarray]:
    """Yield boolean outcome matrices (rows x coordinates), ``samples`` rows in total.

    Each chunk draws from its own child of ``SeedSequence(seed)``, so the
    stream depends only on ``(seed, samples)``.
    """
    n_chunks = -(-samples // _MC_CHUNK)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    for c, child in enumerate(children):
        rows = min(_MC_CHUNK, samples - c * _MC_CHUNK)
        rng = np.random.default_rng(child)
        yield rng.random((rows, p_local.size)) < p_local


def _local_columns(ev: UpSet, position: dict[int, int]) -> list[np.ndarray]:
    return [np.array([position[x] for x in indices_of(m)], dtype=np.intp) for m in ev.minsets]


def _indicator_from_bits(cols: list[np.ndarray], bits: np.ndarray) -> np.ndarray:
    out = np.zeros(bits.shape[0], dtype=bool)
    for c in cols:
        if c.size == 0:
            out[:] = True
            break
        out |= bits[:, c].all(axis=1)
    return out


def mc_prob(a: UpSet, space: ProductSpace, samples: int, seed: int) -> ProbValue:
    """Plain Monte Carlo estimate of ``Pr(a)`` with its binomial standard error."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    coords = a.support_indices()
    position = {x: j for j, x in enumerate(coords)}
    cols = _local_columns(a, position)
    p_local = np.array([space.p[x] for x in coords], dtype=float)
    hits = 0
    for bits in _sample_chunks(p_local, samples, seed):
        hits += int(_indicator_from_bits(cols, bits).sum())
    v = hits / samples
    return ProbValue(v, MONTE_CARLO, math.sqrt(v * (1.0 - v) / samples))


def event_prob(
    a: UpSet,
    space: ProductSpace,
    *,
    max_support: int = DEFAULT_MAX_EXACT_SUPPORT,
    mc_samples: int | None = None,
    seed: int = 0,
    memo: dict | None = None,
) -> ProbValue:
    """Exact when the support fits under the cap, otherwise Monte Carlo if allowed."""
    if a.support_size <= max_support:
        return exact_prob(a, space, max_support=max_support, memo=memo)
    if mc_samples:
        return mc_prob(a, space, mc_samples, seed)
    raise TooLargeForExact(a.support_size, max_support)


def pair_prob(
    a: UpSet,
    b: UpSet,
    space: ProductSpace,
    *,
    max_support: int = DEFAULT_MAX_EXACT_SUPPORT,
    mc_samples: int | None = None,
    seed: int = 0,
    memo: dict | None = None,
) -> ProbValue:
    """``Pr(a & b)``; factorizes when the supports are disjoint."""
    kw = dict(max_support=max_support, mc_samples=mc_samples, seed=seed, memo=memo)
    if not a.support & b.support:
        pa, pb = event_prob(a, space, **kw), event_prob(b, space, **kw)
        if pa.exact and pb.exact:
            return ProbValue(pa.value * pb.value)
        err = math.hypot(pb.value * pa.stderr, pa.value * pb.stderr)
        return ProbValue(pa.value * pb.value, MONTE_CARLO, err)
    joint = intersect(a, b)
    if joint.support_size > max_support and not mc_samples:
        raise TooLargeForExact(joint.support_size, max_support, "joint")
    return event_prob(joint, space, **kw)


@dataclass(frozen=True)
class PatternLaw:
    """Joint law of the indicators of a list of events.

    Row ``r`` of ``codes`` is a pattern packed into 64-bit words: bit
    ``j % 64`` of word ``j // 64`` is set iff event ``j`` occurs.
    ``probs[r]`` is the probability of that exact pattern.  Sampled laws
    hold empirical frequencies over ``samples`` draws.
    """

    codes: np.ndarray
    probs: np.ndarray
    k: int
    coords: int
    method: str = EXACT
    samples: int = 0

    @property
    def exact(self) -> bool:
        return self.method == EXACT

    @property
    def size(self) -> int:
        return self.probs.size

    def bits(self, j: int) -> np.ndarray:
        word = self.codes[:, j // 64]
        return ((word >> np.uint64(j % 64)) & np.uint64(1)).astype(bool)

    def indicators(self) -> np.ndarray:
        """``(k, patterns)`` 0/1 float matrix."""
        if self.k == 0:
            return np.zeros((0, self.size))
        return np.stack([self.bits(j) for j in range(self.k)]).astype(float)

    def has_all(self, mask: int) -> np.ndarray:
        """Patterns in which every event of ``mask`` occurs."""
        out = np.ones(self.size, dtype=bool)
        for w, m in enumerate(_split(mask, self.codes.shape[1])):
            if m:
                u = np.uint64(m)
                out &= (self.codes[:, w] & u) == u
        return out

    def has_none(self, mask: int) -> np.ndarray:
        out = np.ones(self.size, dtype=bool)
        for w, m in enumerate(_split(mask, self.codes.shape[1])):
            if m:
                out &= (self.codes[:, w] & np.uint64(m)) == 0
        return out

    def prob_all(self, mask: int) -> float:
        """Probability that every event in ``mask`` occurs."""
        return float(self.probs[self.has_all(mask)].sum())

    def prob_none(self, mask: int) -> float:
        return float(self.probs[self.has_none(mask)].sum())


def _split(mask: int, words: int) -> list[int]:
    return [(mask >> (64 * w)) & 0xFFFFFFFFFFFFFFFF for w in range(words)]


def _merge(acc: dict[tuple, float], codes: np.ndarray, weights: np.ndarray) -> None:
    if codes.shape[1] == 1:
        uniq, inv = np.unique(codes[:, 0], return_inverse=True)
        keys = [(c,) for c in uniq.tolist()]
    else:
        order = np.lexsort(codes.T[::-1])
        ranked = codes[order]
        starts = np.ones(ranked.shape[0], dtype=bool)
        starts[1:] = np.any(ranked[1:] != ranked[:-1], axis=1)
        inv = np.empty(ranked.shape[0], dtype=np.intp)
        inv[order] = np.cumsum(starts) - 1
        keys = list(map(tuple, ranked[starts].tolist()))
    sums = np.bincount(inv.ravel(), weights=weights, minlength=len(keys))
    for c, w in zip(keys, sums.tolist()):
        acc[c] = acc.get(c, 0.0) + w


def _pack(indicators: list[np.ndarray], rows: int, words: int) -> np.ndarray:
    codes = np.zeros((rows, words), dtype=np.uint64)
    for j, ind in enumerate(indicators):
        codes[:, j // 64] |= ind.astype(np.uint64) << np.uint64(j % 64)
    return codes


def joint_pattern_law(
    events: Sequence[UpSet],
    space: ProductSpace,
    *,
    max_support: int = DEFAULT_MAX_EXACT_SUPPORT,
    mc_samples: int | None = None,
    seed: int = 0,
) -> PatternLaw:
    """Law of the indicator pattern of ``events`` by enumerating their joint support.

    Blocks of ``2**18`` consecutive assignments are processed in order and
    merged in a fixed order, so results are reproducible bit for bit.
    """
    k = len(events)
    words = max(1, -(-k // 64))
    support = 0
    for ev in events:
        support |= ev.support
    coords = indices_of(support)
    m = len(coords)
    position = {x: j for j, x in enumerate(coords)}
    acc: dict[tuple, float] = {}

    if m > max_support:
        if not mc_samples:
            raise TooLargeForExact(m, max_support, "joint")
        cols = [_local_columns(ev, position) for ev in events]
        p_local = np.array([space.p[x] for x in coords], dtype=float)
        for bits in _sample_chunks(p_local, mc_samples, seed):
            inds = [_indicator_from_bits(c, bits) for c in cols]
            codes = _pack(inds, bits.shape[0], words)
            _merge(acc, codes, np.full(bits.shape[0], 1.0 / mc_samples))
        method, samples = MONTE_CARLO, mc_samples
    else:
        local = [
            [sum(1 << position[x] for x in indices_of(mm)) for mm in ev.minsets] for ev in events
        ]
        low_bits = min(m, _BLOCK_BITS)
        omega_low = np.arange(1 << low_bits, dtype=np.uint64)
        w_low = np.ones(1 << low_bits)
        for j in range(low_bits):
            px = space.p[coords[j]]
            w_low *= np.where((omega_low >> np.uint64(j)) & np.uint64(1), px, 1.0 - px)
        for high in range(1 << (m - low_bits)):
            w_high = 1.0
            for j in range(low_bits, m):
                px = space.p[coords[j]]
                w_high *= px if (high >> (j - low_bits)) & 1 else 1.0 - px
            if w_high == 0.0:
                continue
            omega = omega_low | np.uint64(high << low_bits)
            inds = []
            for masks in local:
                ind = np.zeros(omega.size, dtype=bool)
                for lm in masks:
                    u = np.uint64(lm)
                    ind |= (omega & u) == u
                inds.append(ind)
            _merge(acc, _pack(inds, omega.size, words), w_low * w_high)
        method, samples = EXACT, 0

    keys = sorted(acc)
    return PatternLaw(
        codes=np.array(keys, dtype=np.uint64).reshape(len(keys), words),
        probs=np.array([acc[c] for c in keys], dtype=float),
        k=k,
        coords=m,
        method=method,
        samples=samples,
    )
