import math

import numpy as np
import pytest

from conftest import brute_law_of_x, brute_outcomes, k4_family, random_family, random_upset
from upjanson.bounds import summarize
from upjanson.dependency import DependencyRelation, build_support_relation
from upjanson.model import EventFamily, ProductSpace, canonicalize
from upjanson.oracle import (
    check_aim,
    check_aim2,
    check_axioms,
    default_orderings,
    enumerate_distribution,
    exact_lower_tail,
    verify,
)
from upjanson.prob import TooLargeForExact


class TestDistribution:
    def test_k4(self):
        dist = enumerate_distribution(k4_family())
        assert list(dist.atoms) == [0, 1, 2, 4]
        # three triangles of K4 cover all six edges, forcing the fourth
        for value, expect in zip(dist.atoms.values(), (41 / 64, 16 / 64, 6 / 64, 1 / 64)):
            assert value == pytest.approx(expect, abs=1e-15)
        assert dist.coords == 6

    def test_single_bernoulli(self):
        fam = EventFamily(ProductSpace([0.3]), (canonicalize([[0]], 1),))
        dist = enumerate_distribution(fam)
        assert dist.atoms == pytest.approx({0.0: 0.7, 1.0: 0.3})

    def test_empty_family(self):
        dist = enumerate_distribution(EventFamily(ProductSpace([0.5, 0.5]), ()))
        assert dist.atoms == {0.0: 1.0}

    def test_matches_brute_force(self):
        for seed in range(25):
            fam = random_family(seed, max_n=12, weighted=bool(seed % 2))
            dist = enumerate_distribution(fam)
            law = brute_law_of_x(fam)
            got = {round(v, 9): q for v, q in dist.atoms.items()}
            assert set(got) == {v for v, q in law.items() if q > 0 or v in got}
            for v, q in law.items():
                assert got.get(v, 0.0) == pytest.approx(q, abs=1e-12)

    def test_total_and_mean(self):
        for seed in range(25):
            fam = random_family(seed, weighted=bool(seed % 2))
            dist = enumerate_distribution(fam)
            assert dist.total == pytest.approx(1.0, abs=1e-12)
            assert dist.mean == pytest.approx(summarize(fam).mu, abs=1e-9)

    def test_too_large(self):
        fam = EventFamily(ProductSpace.uniform(30, 0.5), (canonicalize([list(range(30))], 30),))
        with pytest.raises(TooLargeForExact):
            enumerate_distribution(fam)
        dist = enumerate_distribution(fam, mc_samples=1000)
        assert dist.method == "monte-carlo" and dist.samples == 1000


class TestLowerTail:
    def test_k4(self):
        dist = enumerate_distribution(k4_family())
        assert exact_lower_tail(dist, 0.0) == pytest.approx(41 / 64, abs=1e-15)
        assert exact_lower_tail(dist, 4.0) == pytest.approx(1.0, abs=1e-15)
        assert exact_lower_tail(dist, -1.0) == 0.0


class TestAim:
    def test_k4_first_event_equality(self):
        rep = check_aim(k4_family())
        first = rep.entries[0]
        assert first.r == pytest.approx(1 / 8) and first.rhs == pytest.approx(1 / 8)
        assert first.slack == pytest.approx(0.0, abs=1e-15)

    def test_k4_last_event(self):
        fam = k4_family()
        rep = check_aim(fam)
        last = rep.entries[3]
        assert last.rhs == pytest.approx(1 / 8 - 3 / 32, abs=1e-15)
        none_before = math.fsum(w for w, occ in brute_outcomes(fam.events, fam.space) if not any(occ[:3]))
        joint = math.fsum(w for w, occ in brute_outcomes(fam.events, fam.space)
                          if occ[3] and not any(occ[:3]))
        assert last.r == pytest.approx(joint / none_before, abs=1e-12)
        assert last.r >= 1 / 32
        assert rep.passed

    def test_independent_family_zero_slack(self):
        fam = EventFamily(ProductSpace([0.2, 0.6, 0.3]),
                          tuple(canonicalize([[x]], 3) for x in range(3)))
        rep = check_aim(fam)
        assert all(abs(e.slack) < 1e-15 for e in rep.entries)
        assert [e.r for e in rep.entries] == pytest.approx([0.2, 0.6, 0.3])

    def test_skips_null_conditioning(self):
        ev = canonicalize([[0]], 1)
        fam = EventFamily(ProductSpace([1.0]), (ev, ev))
        rep = check_aim(fam)
        assert rep.entries[1].skipped and rep.passed

    def test_bad_ordering(self):
        with pytest.raises(ValueError):
            check_aim(k4_family(), ordering=(0, 0, 1, 2))

    def test_orderings(self):
        orders = default_orderings(5, seed=1)
        assert len(orders) == 6 and orders[0] == (0, 1, 2, 3, 4)
        assert all(sorted(o) == list(range(5)) for o in orders)
        assert default_orderings(5, seed=1) == orders


class TestAim2:
    def test_s_zero_equality(self):
        rep = check_aim2(k4_family(), s_grid=(0.0,))
        for e in rep.entries:
            assert e.lhs == pytest.approx(e.rhs, abs=1e-15)
            assert e.lhs == pytest.approx(1 / 8)

    def test_k4_positive_slack(self):
        fam = k4_family()
        rep = check_aim2(fam, s_grid=(1.0,))
        assert rep.passed and all(e.slack > 0 for e in rep.entries)
        # brute-force both sides for event 0
        outs = list(brute_outcomes(fam.events, fam.space))
        lhs = math.fsum(w * occ[0] * math.exp(-sum(occ)) for w, occ in outs)
        ex = math.fsum(w * math.exp(-sum(occ)) for w, occ in outs)
        rhs = math.fsum(w * occ[0] * math.exp(-sum(occ)) for w, occ in outs)  # Y_0 = X in K4
        assert rep.entries[0].lhs == pytest.approx(lhs, abs=1e-12)
        assert rep.entries[0].rhs == pytest.approx(rhs * ex, abs=1e-12)

    def test_pairwise_independent_family(self):
        fam = EventFamily(ProductSpace([0.3, 0.5, 0.8, 0.4]),
                          (canonicalize([[0, 1]], 4), canonicalize([[2], [3]], 4)))
        rel = build_support_relation(fam)
        assert len(rel) == 0
        rep = check_aim2(fam, rel)
        outs = list(brute_outcomes(fam.events, fam.space))
        for e in rep.entries:
            i, s = e.event, e.s
            lhs = math.fsum(w * occ[i] * math.exp(-s * sum(occ)) for w, occ in outs)
            a = math.fsum(w * occ[i] * math.exp(-s * occ[i]) for w, occ in outs)
            b = math.fsum(w * math.exp(-s * sum(occ)) for w, occ in outs)
            assert e.lhs == pytest.approx(lhs, abs=1e-12)
            assert e.rhs == pytest.approx(a * b, abs=1e-12)
        assert rep.passed

    def test_weighted_uses_weights(self):
        fam = k4_family().with_weights([1.0, 2.0, 0.5, 3.0])
        rep = check_aim2(fam, s_grid=(0.0,))
        assert rep.entries[1].lhs == pytest.approx(2.0 / 8)
        assert check_aim2(fam).passed

    def test_negative_s(self):
        with pytest.raises(ValueError):
            check_aim2(k4_family(), s_grid=(-1.0,))


class TestAxioms:
    def test_shared_coordinate_strictly_positive(self):
        sp = ProductSpace([0.4, 0.7, 0.5])
        a, b = canonicalize([[0, 1]], 3), canonicalize([[1, 2]], 3)
        rep = check_axioms(sp, [(a, b)])
        assert rep.passed and rep.worst_harris_slack > 0

    def test_disjoint_equality(self):
        sp = ProductSpace([0.4, 0.7, 0.5])
        a, b = canonicalize([[0]], 3), canonicalize([[1, 2]], 3)
        rep = check_axioms(sp, [(a, b)])
        assert rep.passed and rep.worst_harris_slack == pytest.approx(0.0, abs=1e-16)

    def test_triples(self):
        rng = np.random.default_rng(4)
        for _ in range(60):
            n = int(rng.integers(3, 12))
            sp = ProductSpace(rng.uniform(0, 1, n))
            rep = check_axioms(sp, [tuple(random_upset(rng, n) for _ in range(3))])
            assert rep.passed and rep.identity_checks == 1

    def test_independent_triple(self):
        sp = ProductSpace([0.3, 0.6, 0.2, 0.9])
        a = canonicalize([[0]], 4)
        b, c = canonicalize([[1, 2]], 4), canonicalize([[2], [3]], 4)
        rep = check_axioms(sp, [(a, b, c)])
        assert rep.passed and rep.worst_identity_error < 1e-15

    def test_bad_item(self):
        with pytest.raises(ValueError):
            check_axioms(ProductSpace([0.5]), [(canonicalize([[0]], 1),)])


class TestVerify:
    def test_k4(self):
        ver = verify(k4_family())
        assert ver.passed and not ver.statistical
        assert ver.pr_zero == pytest.approx(41 / 64, abs=1e-15)
        assert len(ver.aim) == 6

    def test_adversarial_relation_fails(self):
        fam = k4_family()
        pairs = [p for p in build_support_relation(fam).sorted_pairs() if p != (0, 1)]
        ver = verify(fam.with_dependency(DependencyRelation.from_pairs(4, pairs)))
        assert not ver.validation.passed and not ver.passed

    def test_empty(self):
        ver = verify(EventFamily(ProductSpace([0.5]), ()))
        assert ver.passed and ver.pr_zero == 1.0

    def test_statistical_mode(self):
        n = 30
        evs = tuple(canonicalize([[x, (x + 1) % n]], n) for x in range(n))
        fam = EventFamily(ProductSpace.uniform(n, 0.2), evs)
        ver = verify(fam, max_support=20, mc_samples=20000)
        assert ver.statistical and ver.aim == () and ver.aim2 is None
        assert not ver.violations
