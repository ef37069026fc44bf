import itertools
import math

import numpy as np
import pytest
from hypothesis import strategies as st

from upjanson.instance import random_monotone_dnf, subgraph_count
from upjanson.model import ProductSpace, canonicalize


def brute_outcomes(family_or_events, space):
    """Yield (probability, {event index: occurs}) over every assignment of the joint support.

    Pure-Python loop over ``itertools.product``; shares nothing with the
    numpy enumeration engine beyond reading the min-set lists.
    """
    events = family_or_events
    coords = sorted({x for ev in events for m in ev.minset_indices() for x in m})
    lists = [ev.minset_indices() for ev in events]
    for bits in itertools.product((0, 1), repeat=len(coords)):
        omega = dict(zip(coords, bits))
        weight = 1.0
        for x, b in omega.items():
            weight *= space.p[x] if b else 1.0 - space.p[x]
        occurs = [any(all(omega[x] for x in m) for m in ms) for ms in lists]
        yield weight, occurs


def brute_prob(ev, space):
    return math.fsum(w for w, occ in brute_outcomes([ev], space) if occ[0])


def brute_law_of_x(family):
    law = {}
    for w, occ in brute_outcomes(family.events, family.space):
        x = sum(c for c, o in zip(family.weights, occ) if o)
        key = round(x, 9)
        law[key] = law.get(key, 0.0) + w
    return law


def k4_family():
    return subgraph_count("triangle", 4, 0.5)


@pytest.fixture
def k4():
    return k4_family()


@pytest.fixture
def majority3():
    return canonicalize([[0, 1], [0, 2], [1, 2]], 3)


def random_upset(rng, n, max_minsets=4, max_size=4):
    count = int(rng.integers(1, max_minsets + 1))
    return canonicalize(
        [rng.choice(n, size=int(rng.integers(1, min(max_size, n) + 1)), replace=False).tolist()
         for _ in range(count)],
        n,
    )


def random_family(seed, max_n=18, max_k=8, weighted=False):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, max_n + 1))
    k = int(rng.integers(1, max_k + 1))
    return random_monotone_dnf(
        n, k, minsets=(1, 4), size=(1, min(4, n)), p=(0.02, 0.98),
        weights=(0.2, 4.0) if weighted else None, seed=seed,
    )


@st.composite
def upsets(draw, n=None, max_minsets=5):
    if n is None:
        n = draw(st.integers(1, 10))
    sets = draw(st.lists(st.sets(st.integers(0, n - 1), max_size=n), max_size=max_minsets))
    return canonicalize(sets, n)


@st.composite
def spaces(draw, n):
    return ProductSpace(draw(st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n)))

