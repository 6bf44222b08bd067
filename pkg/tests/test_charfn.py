from __future__ import annotations

import cmath
import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdlab.box import TestBox
from sdlab.charfn import (
    FiniteSupport,
    Gaussian,
    Idempotent,
    ModulusSquare,
    PhaseChar,
    Product,
    TwoLevelOnSubgroup,
    charfn_from_json,
    constant_one,
    evaluate,
    haar,
    hermitian_defects,
    invariance_subgroup,
    is_gauss_idem_modulus_on_box,
    is_idempotent_on_box,
    modulus_square,
    pd_check_cyclic,
    pd_check_finite_support,
    periodic_restriction,
    product,
)
from sdlab.constructions import def_mu
from sdlab.errors import DomainError, NotPeriodic, PreconditionViolated
from sdlab.solenoid import INF, Subgroup, SupernaturalSpec
from sdlab.values import ONE, ZERO, Approx, Exact, values_equal

TRIADIC = Subgroup(SupernaturalSpec(0, {3: INF}))  # {m/3^k}
INTEGERS = Subgroup.cyclic(1)
Q = SupernaturalSpec(INF)


def dft_oracle(values):
    """Direct O(n^2) normalised DFT, independent of numpy."""
    n = len(values)
    return [sum(v * cmath.exp(-2j * math.pi * j * k / n) for j, v in enumerate(values)) / n for k in range(n)]


def sample_fns():
    return [
        constant_one(),
        haar(),
        Idempotent(TRIADIC.times(2), PhaseChar(F(1, 3))),
        TwoLevelOnSubgroup(TRIADIC, 5, F(1, 2)),
        TwoLevelOnSubgroup(INTEGERS, 3, F(3, 4)),
        def_mu(1),
        def_mu(F(1, 3), F(1, 4)),
        Gaussian(0.3, PhaseChar(F(1, 5))),
        ModulusSquare(def_mu(2)),
        Product((TwoLevelOnSubgroup(TRIADIC, 2, F(1, 4)), Idempotent(TRIADIC, PhaseChar(F(1, 7))))),
    ]


class TestValues:
    def test_exact_product_and_angles(self):
        v = Exact(F(1, 2), F(3, 4)) * Exact(F(1, 3), F(1, 2))
        assert v == Exact(F(1, 6), F(1, 4))

    def test_zero_normalises_angle(self):
        assert Exact(0, F(1, 3)) == ZERO

    def test_negative_rational(self):
        assert Exact.rational(F(-1, 2)).to_complex() == pytest.approx(-0.5)

    def test_quarter_turns_exact(self):
        assert Exact.phase(F(1, 4)).to_complex() == 1j

    def test_mixed_compare_uses_tolerance(self):
        assert values_equal(Approx(0.5 + 1e-12j), Exact.rational(F(1, 2)))
        assert not values_equal(Exact.rational(F(1, 2)), Exact.rational(F(1, 3)))


class TestBoxes:
    def test_points_symmetric_with_zero(self):
        box = TestBox([1, F(1, 5)], 3)
        pts = set(box.points)
        assert 0 in pts and all(-y in pts for y in pts)
        assert len(box) == len(pts) == 37

    def test_json(self):
        box = TestBox([F(1, 3), F(1, 2)], 2)
        assert TestBox.from_json(box.to_json()) == box


class TestEval:
    def test_two_level_inner(self):
        f = TwoLevelOnSubgroup(TRIADIC, 5, F(1, 2))
        assert f(F(5, 3)) == ONE

    def test_two_level_off_H(self):
        f = TwoLevelOnSubgroup(TRIADIC, 5, F(1, 2))
        assert f(F(1, 2)) == ZERO
        assert f(F(1, 3)) == Exact.rational(F(1, 2))

    @pytest.mark.parametrize("f", sample_fns(), ids=lambda f: type(f).__name__)
    def test_normalised(self, f):
        assert values_equal(f(0), ONE)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            evaluate(def_mu(1), F(1, 2), SupernaturalSpec(0, {5: INF}))

    @pytest.mark.parametrize("f", sample_fns(), ids=lambda f: type(f).__name__)
    def test_hermitian_and_bounded_random_points(self, f):
        rng = random.Random(7)
        pts = [F(rng.randint(-60, 60), rng.choice([1, 2, 3, 5, 9, 27])) for _ in range(1000)]
        assert hermitian_defects(f, pts) == []

    def test_finite_support_rejects_asymmetry(self):
        with pytest.raises(ValueError):
            FiniteSupport({1: F(1, 2)})
        f = FiniteSupport({1: F(1, 2), -1: F(1, 2)})
        g = f.with_value(1, F(3, 5))
        assert hermitian_defects(g, [1]) == [1]

    @pytest.mark.parametrize("f", sample_fns(), ids=lambda f: type(f).__name__)
    def test_json_roundtrip(self, f):
        g = charfn_from_json(f.to_json())
        for y in TestBox([1, F(1, 3)], 2):
            assert values_equal(g(y), f(y))


class TestProduct:
    def test_singleton(self):
        f = def_mu(1)
        assert product([f]) is f

    def test_idempotent_square_doubles_phase(self):
        f = Idempotent(TRIADIC.times(2), PhaseChar(F(1, 3)))
        g = product([f, f])
        for y in TestBox([F(2, 3), 1], 3):
            expected = Exact.phase(F(2, 3) * y) if y in TRIADIC.times(2) else ZERO
            assert g(y) == expected

    def test_def_mu_square(self):
        f = def_mu(1)
        assert product([f, f])(1) == Exact.rational(F(1, 4))

    @settings(max_examples=100)
    @given(st.lists(st.sampled_from(range(10)), min_size=1, max_size=4), st.fractions(max_denominator=27))
    def test_pointwise(self, idx, y):
        fns = sample_fns()
        fs = [fns[i] for i in idx]
        expected = ONE
        for f in fs:
            expected = expected * f(y)
        assert values_equal(product(fs)(y), expected, 1e-12)


class TestModulusSquare:
    def test_idempotent_phase_dropped(self):
        f = Idempotent(TRIADIC, PhaseChar(F(1, 3)))
        g = modulus_square(f)
        assert isinstance(g, Idempotent) and g.phase.trivial

    def test_two_level_level_squared(self):
        g = modulus_square(TwoLevelOnSubgroup(TRIADIC, 2, F(1, 2)))
        assert isinstance(g, TwoLevelOnSubgroup) and g.level == F(1, 4)

    def test_gaussian_doubles(self):
        g = modulus_square(Gaussian(0.3, PhaseChar(F(1, 5))))
        assert g == Gaussian(0.6)

    @pytest.mark.parametrize("f", sample_fns(), ids=lambda f: type(f).__name__)
    def test_pointwise(self, f):
        g = modulus_square(f)
        for y in TestBox([1, F(1, 3)], 3):
            v = f(y)
            assert values_equal(g(y), v * v.conjugate(), 1e-12)


class TestInvariance:
    def test_idempotent_whole_box(self):
        f = Idempotent(TRIADIC)
        box = TestBox([F(1, 3), 1], 2)
        assert invariance_subgroup(f, box) == set(box.points)

    def test_def_mu_trivial(self):
        assert invariance_subgroup(def_mu(1), TestBox([1], 2)) == {0}

    def test_gaussian_trivial(self):
        assert invariance_subgroup(Gaussian(0.3), TestBox([1, F(1, 2)], 3)) == {0}

    def test_two_level_inner_group(self):
        f = TwoLevelOnSubgroup(INTEGERS, 3, F(1, 2))
        box = TestBox([1], 9)
        assert invariance_subgroup(f, box) == {y for y in box if y % 3 == 0}


class TestPositiveDefinite:
    def test_two_level_period_five(self):
        f = TwoLevelOnSubgroup(INTEGERS, 5, F(1, 2))
        assert pd_check_cyclic(f, 1, 5)
        spec = dft_oracle([1] + [0.5] * 4)
        assert spec[0].real == pytest.approx(0.6) and all(s.real == pytest.approx(0.1) for s in spec[1:])

    def test_constant_one(self):
        assert pd_check_cyclic(constant_one(), F(1, 3), 7)

    def test_level_two_fails(self):
        f = TwoLevelOnSubgroup(INTEGERS, 5, F(2), strict=False)
        assert not pd_check_cyclic(f, 1, 5)
        assert min(s.real for s in dft_oracle([1] + [2] * 4)) < 0

    @pytest.mark.parametrize("p", [2, 3, 5, 7, 11, 13])
    @pytest.mark.parametrize("c", [F(1, 4), F(1, 2), F(3, 4)])
    def test_lemma_two_level(self, p, c):
        f = TwoLevelOnSubgroup(TRIADIC, p, c)
        assert pd_check_cyclic(f, F(1, 3), p)
        values = [float(v.modulus) for v in periodic_restriction(f, F(1, 3), p)]
        assert min(s.real for s in dft_oracle(values)) >= -1e-12

    def test_not_periodic(self):
        with pytest.raises(NotPeriodic):
            pd_check_cyclic(def_mu(1), 1, 3)

    def test_finite_support(self):
        assert pd_check_finite_support(def_mu(1))
        assert not pd_check_finite_support(def_mu(1).with_value(1, F(3, 5)).with_value(-1, F(3, 5)))


class TestClassExclusions:
    def test_idempotent_true(self):
        assert is_idempotent_on_box(Idempotent(TRIADIC.times(2), PhaseChar(F(1, 3))), TestBox([F(1, 3), 1], 3))

    def test_two_level_false(self):
        assert not is_idempotent_on_box(TwoLevelOnSubgroup(TRIADIC, 2, F(1, 2)), TestBox([F(1, 3)], 3))

    def test_def_mu_false(self):
        assert not is_idempotent_on_box(def_mu(1), TestBox([1], 2))

    def test_gaussian_fit(self):
        assert is_gauss_idem_modulus_on_box(Gaussian(0.3), TestBox([1], 3))

    def test_two_level_not_gaussian(self):
        assert not is_gauss_idem_modulus_on_box(TwoLevelOnSubgroup(INTEGERS, 2, F(1, 2)), TestBox([1], 3))

    def test_def_mu_not_gaussian(self):
        assert not is_gauss_idem_modulus_on_box(def_mu(1), TestBox([1], 2))

    def test_precondition(self):
        with pytest.raises(PreconditionViolated):
            is_gauss_idem_modulus_on_box(haar(), TestBox([1], 2))
