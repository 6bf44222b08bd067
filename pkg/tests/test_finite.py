from __future__ import annotations

import cmath
import itertools
import json
import math
import random
from fractions import Fraction as F
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdlab import finite as fo
from sdlab.cyclotomic import CyclotomicRing
from sdlab.errors import BudgetExceeded, InvalidParams, NotHomomorphism

GOLDEN = Path(__file__).parent / "golden"

Z5 = fo.FiniteGroupSpec([5])
Z4 = fo.FiniteGroupSpec([4])
Z2xZ3 = fo.FiniteGroupSpec([2, 3])
Z9 = fo.FiniteGroupSpec([9])
Z4xZ3 = fo.FiniteGroupSpec([4, 3])
SMALL = [Z5, Z4, Z2xZ3, Z9, Z4xZ3, fo.FiniteGroupSpec([2, 2]), fo.FiniteGroupSpec([2, 4])]

PM2 = [[1, 1], [1, -1]]


def uniform01(G):
    return fo.Dist(G, {0: F(1, 2), 1: F(1, 2)})


class TestCyclotomic:
    @pytest.mark.parametrize("L", [1, 2, 3, 4, 5, 6, 8, 9, 12, 36])
    def test_roots_sum_to_zero(self, L):
        ring = CyclotomicRing(L)
        total = ring.zero
        for k in range(L):
            total = ring.add(total, ring.zeta_power(k))
        assert total == (ring.one if L == 1 else ring.zero)

    @pytest.mark.parametrize("L", [3, 4, 5, 9, 12])
    def test_multiplication_matches_complex(self, L):
        ring = CyclotomicRing(L)
        rng = random.Random(L)
        for _ in range(20):
            a = tuple(rng.randint(-3, 3) for _ in range(ring.degree))
            b = tuple(rng.randint(-3, 3) for _ in range(ring.degree))
            assert ring.to_complex(ring.mul(a, b)) == pytest.approx(ring.to_complex(a) * ring.to_complex(b))

    def test_power_exponents_add(self):
        ring = CyclotomicRing(12)
        for a, b in itertools.product(range(12), repeat=2):
            assert ring.mul(ring.zeta_power(a), ring.zeta_power(b)) == ring.zeta_power(a + b)


class TestGroupSpec:
    def test_order_and_parse(self):
        G = fo.FiniteGroupSpec.parse("4,3")
        assert G == Z4xZ3 and G.order == 12 and len(G.elements) == 12

    def test_cap(self):
        with pytest.raises(BudgetExceeded):
            fo.FiniteGroupSpec([50, 50])

    def test_bad_modulus(self):
        with pytest.raises(InvalidParams):
            fo.FiniteGroupSpec([1])


class TestDist:
    def test_normalisation_enforced(self):
        with pytest.raises(InvalidParams):
            fo.Dist(Z5, {0: F(1, 2)})

    def test_json_roundtrip(self):
        d = fo.random_dist(Z4xZ3, 3, "dirichlet")
        assert fo.Dist.from_json(d.to_json()) == d


class TestCharFn:
    def test_haar_indicator(self):
        phi = fo.char_fn(Z5, fo.haar(Z5))
        assert phi[(0,)] == pytest.approx(1)
        assert all(abs(phi[y]) < 1e-12 for y in Z5.elements if y != (0,))

    def test_degenerate_is_character(self):
        phi = fo.char_fn(Z5, fo.degenerate(Z5, (2,)))
        for (y,) in Z5.elements:
            assert phi[(y,)] == pytest.approx(cmath.exp(4j * math.pi * y / 5))
            assert abs(phi[(y,)]) == pytest.approx(1)

    def test_half_mass_at_zero_z4(self):
        d = fo.mixture([F(1, 2), F(1, 2)], [fo.degenerate(Z4, (0,)), fo.haar(Z4)])
        t = fo.char_fn_exact(Z4, d)
        assert [t.rational(y) for y in Z4.elements] == [1, F(1, 2), F(1, 2), F(1, 2)]

    @settings(max_examples=50)
    @given(st.sampled_from(SMALL), st.integers(0, 10**6), st.sampled_from(fo.PROFILES))
    def test_normalised_hermitian_and_exact_matches_float(self, G, seed, profile):
        d = fo.random_dist(G, seed, profile)
        phi = fo.char_fn(G, d)
        t = fo.char_fn_exact(G, d)
        assert t.rational(G.zero) == 1
        for y in G.elements:
            assert phi[G.neg(y)] == pytest.approx(phi[y].conjugate(), abs=1e-12)
            assert t.to_complex(y) == pytest.approx(phi[y], abs=1e-12)

    @settings(max_examples=50)
    @given(st.sampled_from(SMALL), st.integers(0, 10**6))
    def test_fourier_inversion(self, G, seed):
        d = fo.random_dist(G, seed, "dirichlet")
        back = fo.inverse_transform(G, fo.char_fn(G, d))
        for x in G.elements:
            assert back[x] == pytest.approx(float(d.prob(x)), abs=1e-12)


class TestAnnihilator:
    @pytest.mark.parametrize("G", SMALL, ids=str)
    def test_trivial_subgroup(self, G):
        assert fo.annihilator(G, [G.zero]) == frozenset(G.elements)

    @pytest.mark.parametrize("G", SMALL, ids=str)
    def test_whole_group(self, G):
        gens = [tuple(int(i == k) for i in range(G.rank)) for k in range(G.rank)]
        assert fo.annihilator(G, gens) == {G.zero}

    def test_z4_two(self):
        assert fo.annihilator(Z4, [(2,)]) == {(0,), (2,)}

    @settings(max_examples=60)
    @given(st.sampled_from(SMALL), st.integers(0, 10**6))
    def test_order_and_duality(self, G, seed):
        rng = random.Random(seed)
        gens = [rng.choice(G.elements) for _ in range(rng.randint(1, 2))]
        H = fo.subgroup_generated(G, gens)
        A = fo.annihilator(G, gens)
        assert len(H) * len(A) == G.order
        assert fo.annihilator(G, A) == H


class TestAutomorphisms:
    def test_z5_two(self):
        assert fo.is_automorphism(Z5, fo.AutMatrix([[2]]))
        assert fo.adjoint(Z5, fo.AutMatrix([[2]])) == fo.AutMatrix([[2]])

    def test_z4_two(self):
        assert not fo.is_automorphism(Z4, fo.AutMatrix([[2]]))

    def test_z2xz3_diag(self):
        assert fo.is_automorphism(Z2xZ3, fo.AutMatrix([[1, 0], [0, 2]]))

    def test_not_homomorphism(self):
        with pytest.raises(NotHomomorphism):
            fo.is_automorphism(Z2xZ3, fo.AutMatrix([[1, 1], [0, 1]]))

    @settings(max_examples=40)
    @given(st.sampled_from(SMALL + [fo.FiniteGroupSpec([2, 4, 3])]), st.integers(0, 10**6))
    def test_pairing_identity(self, G, seed):
        A = fo.random_automorphism(G, random.Random(seed))
        assert fo.pairing_identity_holds(G, A)
        assert fo.is_automorphism(G, fo.adjoint(G, A))

    def test_cross_component_adjoint(self):
        # Z(2) -> Z(4), x -> 2x has adjoint Z(4) -> Z(2), y -> y
        G = fo.FiniteGroupSpec([2, 4])
        A = fo.AutMatrix([[0, 0], [2, 0]])
        assert fo.pairing_identity_holds(G, A)
        assert fo.adjoint(G, A) == fo.AutMatrix([[0, 1], [0, 0]])


class TestIndependence:
    def test_haar_pair_z5(self):
        assert fo.joint_independence_check(Z5, [fo.haar(Z5)] * 2, PM2)

    def test_uniform01_pair_dependent(self):
        d = uniform01(Z5)
        assert not fo.joint_independence_check(Z5, [d, d], PM2)
        # hand enumeration of the four atoms: (0,0) (1,4) (1,1) (2,0)
        joint = {((a + b) % 5, (a - b) % 5): F(1, 4) for a in (0, 1) for b in (0, 1)}
        p_l1_0 = sum(w for (l1, _), w in joint.items() if l1 == 0)
        p_l2_1 = sum(w for (_, l2), w in joint.items() if l2 == 1)
        assert joint.get((0, 1), 0) == 0 and p_l1_0 * p_l2_1 == F(1, 16)

    def test_degenerate_triple(self):
        ds = [fo.degenerate(Z4, (k,)) for k in (1, 2, 3)]
        assert fo.joint_independence_check(Z4, ds, fo.formiT(Z4))

    def test_haar_pair_z4_dependent(self):
        # L1 + L2 = 2 xi_1 takes only even values, so Haar forms over Z(4)
        # are not independent
        assert not fo.joint_independence_check(Z4, [fo.haar(Z4)] * 2, PM2)
        assert not fo.sd_equation_check(Z4, [fo.haar(Z4)] * 2, PM2, exact=True)

    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            fo.sd_equation_check(Z4xZ3, [fo.haar(Z4xZ3)] * 3, fo.formiT(Z4xZ3), cap=100)


class TestEquation:
    def test_haar_pair(self):
        assert fo.sd_equation_check(Z5, [fo.haar(Z5)] * 2, PM2)
        assert fo.sd_equation_check(Z5, [fo.haar(Z5)] * 2, PM2, exact=True)

    def test_uniform01_pair(self):
        d = uniform01(Z5)
        assert not fo.sd_equation_check(Z5, [d, d], PM2, exact=True)

    @settings(max_examples=100, deadline=None)
    @given(st.sampled_from([Z5, Z4, Z2xZ3, Z9]), st.sampled_from([2, 3]), st.integers(0, 10**6))
    def test_equivalence_with_independence(self, G, n, seed):
        rng = random.Random(seed)
        ds = [fo.random_dist(G, rng, rng.choice(fo.PROFILES)) for _ in range(n)]
        M = [[fo.random_automorphism(G, rng) for _ in range(n)] for _ in range(n)]
        assert fo.equivalence_test(G, ds, M).agree


class TestIdempotentClassify:
    def test_shifted_coset(self):
        c = fo.idempotent_classify(Z4, fo.haar(Z4, [(0,), (2,)], (1,)))
        assert c.is_shifted_idempotent and c.K == {(0,), (2,)} and c.x == (1,)

    def test_uniform01(self):
        assert not fo.idempotent_classify(Z5, uniform01(Z5)).is_shifted_idempotent

    def test_degenerate(self):
        c = fo.idempotent_classify(Z5, fo.degenerate(Z5, (3,)))
        assert c.is_shifted_idempotent and c.K == {(0,)} and c.x == (3,)

    @settings(max_examples=60)
    @given(st.sampled_from(SMALL), st.integers(0, 10**6))
    def test_coset_oracle(self, G, seed):
        d = fo.random_dist(G, seed, "sparse")
        supp = set(d.support)
        # oracle: some subgroup K and shift x reproduce the support and the law is uniform
        subgroups = {fo.subgroup_generated(G, [a, b]) for a in G.elements for b in G.elements}
        is_coset = any({G.add(d.support[0], k) for k in K} == supp for K in subgroups)
        uniform = len(set(d.table.values())) == 1
        assert fo.idempotent_classify(G, d).is_shifted_idempotent == (is_coset and uniform)


class TestRandomDist:
    def test_golden(self):
        d = fo.random_dist(Z5, 42, "sparse")
        expected = json.loads((GOLDEN / "random_dist_z5_seed42_sparse.json").read_text())
        assert d.to_json() == expected

    @given(st.sampled_from(SMALL), st.integers(0, 10**6), st.sampled_from(fo.PROFILES))
    def test_sums_to_one(self, G, seed, profile):
        d = fo.random_dist(G, seed, profile)
        assert sum(d.table.values()) == 1

    def test_seeds_differ(self):
        outs = {json.dumps(fo.random_dist(Z4xZ3, s, "dirichlet").to_json(), sort_keys=True) for s in range(100)}
        # 10^12 weight vectors; any collision among 100 seeds would signal a seeding bug
        assert len(outs) == 100

    def test_unknown_profile(self):
        with pytest.raises(InvalidParams):
            fo.random_dist(Z5, 0, "gamma")


class TestNonIdempotentDependence:
    def test_independent_instances_share_K(self):
        rng = random.Random(11)
        M = fo.formiT(Z4xZ3)
        found = 0
        for _ in range(150):
            if rng.random() < 0.5:
                K = fo.subgroup_generated(Z4xZ3, [rng.choice(Z4xZ3.elements)])
                ds = [fo.haar(Z4xZ3, K, rng.choice(Z4xZ3.elements)) for _ in range(3)]
            else:
                ds = [fo.random_dist(Z4xZ3, rng, "idempotent") for _ in range(3)]
            if fo.joint_independence_check(Z4xZ3, ds, M):
                found += 1
                classes = [fo.idempotent_classify(Z4xZ3, d) for d in ds]
                assert all(c.is_shifted_idempotent for c in classes)
                assert len({c.K for c in classes}) == 1
        assert found > 0
