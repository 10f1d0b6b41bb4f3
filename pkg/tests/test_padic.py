"""Exact-arithmetic substrate: norms, ultrametric, characters, balls."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from padicstoch.errors import DivisionByZero, PrecisionExhausted, PrimeMismatch
from padicstoch.padic import (
    Ball,
    PAdicNumber,
    UnitCharacter,
    char_chi,
    char_phase,
    frac_part,
    frac_part_fraction,
    mult_character,
)

PRIMES = [2, 3, 5]


def rationals(p):
    """Exact rationals with p-power denominators and moderate height."""
    return st.builds(
        Fraction,
        st.integers(min_value=-(10**6), max_value=10**6),
        st.sampled_from([p**k for k in range(0, 7)]),
    )


@st.composite
def padics(draw, p):
    return PAdicNumber.from_fraction(draw(rationals(p).filter(lambda r: r != 0)), p)


class TestArithmetic:
    def test_norm_of_twelve_base_two(self):
        assert PAdicNumber.from_int(12, 2).norm() == Fraction(1, 4)

    def test_field_inverse(self):
        x = PAdicNumber.from_int(2, 5)
        assert (x.inverse() * x) == PAdicNumber.one(5)

    def test_valuation_of_sum(self):
        s = PAdicNumber.from_int(9, 3) + PAdicNumber.from_int(18, 3)
        assert s.valuation == 3

    def test_valuation_law_exact(self):
        x = PAdicNumber.from_fraction(Fraction(12, 5), 2)
        y = PAdicNumber.from_fraction(Fraction(40, 3), 2)
        assert (x * y).valuation == x.valuation + y.valuation

    def test_prime_mismatch(self):
        with pytest.raises(PrimeMismatch):
            PAdicNumber.from_int(1, 2) + PAdicNumber.from_int(1, 3)

    def test_division_by_zero(self):
        with pytest.raises(DivisionByZero):
            PAdicNumber.zero(3).inverse()

    def test_precision_exhausted_on_deep_cancellation(self):
        w = 8
        x = PAdicNumber.from_int(1, 2, precision=w)
        y = PAdicNumber.from_int(1 + 2**w, 2, precision=w)
        assert x.unit == y.unit  # indistinguishable at precision w
        # ragged cancellation past the smaller validity window
        with pytest.raises(PrecisionExhausted):
            PAdicNumber(2, 0, 3, w) + PAdicNumber(2, 0, 2 ** (w + 1) - 3, w + 1)

    def test_exact_complements_cancel_to_zero(self):
        x = PAdicNumber.from_int(-6, 3)
        assert (x + PAdicNumber.from_int(6, 3)).is_zero

    def test_exact_self_subtraction_is_zero(self):
        x = PAdicNumber.from_fraction(Fraction(7, 4), 2)
        assert (x - x).is_zero

    @given(st.data())
    def test_ultrametric_inequality(self, data):
        p = data.draw(st.sampled_from(PRIMES))
        x = data.draw(padics(p))
        y = data.draw(padics(p))
        try:
            s = x + y
        except PrecisionExhausted:
            return
        assert s.norm() <= max(x.norm(), y.norm())
        if x.norm() != y.norm():
            assert s.norm() == max(x.norm(), y.norm())

    @given(st.data())
    def test_fraction_round_trip(self, data):
        p = data.draw(st.sampled_from(PRIMES))
        x = data.draw(padics(p))
        assert PAdicNumber.from_fraction(x.to_fraction(), p) == x

    @given(st.data())
    def test_literal_round_trip(self, data):
        p = data.draw(st.sampled_from(PRIMES))
        x = data.draw(padics(p))
        assert PAdicNumber.parse(x.literal()) == x

    def test_unit_digits_leading_nonzero(self):
        x = PAdicNumber.from_int(12, 2)
        digits = x.unit_digits
        assert digits[0] != 0 and len(digits) == x.precision


class TestFracPartAndCharacters:
    def test_frac_part_examples(self):
        assert frac_part(PAdicNumber.from_fraction(Fraction(7, 4), 2)) == Fraction(3, 4)
        assert frac_part(PAdicNumber.from_int(3, 5)) == 0
        assert frac_part(PAdicNumber.from_fraction(Fraction(1, 9), 3)) == Fraction(1, 9)

    def test_char_chi_examples(self):
        assert char_chi(PAdicNumber.from_fraction(Fraction(1, 2), 2)) == pytest.approx(-1)
        assert char_chi(PAdicNumber.from_int(2, 3)) == pytest.approx(1)
        assert char_chi(PAdicNumber.from_fraction(Fraction(1, 4), 2)) == pytest.approx(1j)

    @given(st.data())
    def test_char_homomorphism_exact_phase(self, data):
        p = data.draw(st.sampled_from(PRIMES))
        x = data.draw(padics(p))
        y = data.draw(padics(p))
        try:
            s = x + y
        except PrecisionExhausted:
            return
        lhs = char_phase(s)
        rhs = (char_phase(x) + char_phase(y)) % 1
        assert lhs == rhs

    @given(st.data())
    def test_frac_part_additive_mod_one(self, data):
        p = data.draw(st.sampled_from(PRIMES))
        r1 = data.draw(rationals(p))
        r2 = data.draw(rationals(p))
        lhs = frac_part_fraction(r1 + r2, p)
        rhs = (frac_part_fraction(r1, p) + frac_part_fraction(r2, p)) % 1
        assert lhs == rhs

    def test_mult_character_examples(self):
        p = 2
        assert mult_character(2, PAdicNumber.from_int(p, p)) == pytest.approx(1 / p)
        assert mult_character(3.7, PAdicNumber.zero(p)) == 0
        assert mult_character(1, PAdicNumber.from_int(17, 2)) == pytest.approx(1)

    @given(st.data())
    def test_mult_character_multiplicative(self, data):
        p = data.draw(st.sampled_from(PRIMES))
        a = data.draw(st.floats(min_value=0.25, max_value=4.0))
        k = data.draw(st.integers(min_value=0, max_value=p - 2))
        pi0 = UnitCharacter(p, k)
        x = data.draw(padics(p))
        y = data.draw(padics(p))
        lhs = mult_character(a, x * y, pi0)
        rhs = mult_character(a, x, pi0) * mult_character(a, y, pi0)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)

    def test_tame_character_is_root_of_unity(self):
        pi0 = UnitCharacter(5, 2)
        x = PAdicNumber.from_int(3, 5)
        v = pi0(x)
        assert abs(abs(v) - 1) < 1e-12
        assert abs(v ** ((5 - 1) // math.gcd(2, 4))) == pytest.approx(1)


class TestBulkInvariants:
    """The 10^4-random-pair sweeps, exact arithmetic throughout."""

    @staticmethod
    def _random_values(p, count, rng):
        nums = rng.integers(-(10**6), 10**6, size=count)
        dens = rng.integers(0, 7, size=count)
        out = []
        for n, k in zip(nums, dens):
            if n == 0:
                n = 1
            out.append(PAdicNumber.from_fraction(Fraction(int(n), p ** int(k)), p))
        return out

    def test_ten_thousand_pair_sweep(self):
        import numpy as np

        rng = np.random.default_rng(123)
        for p in PRIMES:
            xs = self._random_values(p, 10000, rng)
            ys = self._random_values(p, 10000, rng)
            for x, y in zip(xs, ys):
                try:
                    s = x + y
                except PrecisionExhausted:
                    continue
                assert s.norm() <= max(x.norm(), y.norm())
                if x.norm() != y.norm():
                    assert s.norm() == max(x.norm(), y.norm())
                assert char_phase(s) == (char_phase(x) + char_phase(y)) % 1

    def test_ten_thousand_mult_character_pairs(self):
        import numpy as np

        rng = np.random.default_rng(321)
        p = 3
        xs = self._random_values(p, 10000, rng)
        ys = self._random_values(p, 10000, rng)
        a = 1.7
        for x, y in zip(xs, ys):
            lhs = mult_character(a, x * y)
            rhs = mult_character(a, x) * mult_character(a, y)
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


class TestBalls:
    def test_disjoint_or_nested(self):
        mk = lambda n, k: Ball(PAdicNumber.from_int(n, 3), k)
        assert mk(0, -1).is_disjoint_from(mk(1, -1))
        assert mk(0, 1).is_nested_with(mk(3, 0))
        assert not mk(0, 0).is_disjoint_from(mk(9, -1))

    def test_every_point_is_a_center(self):
        c = PAdicNumber.from_int(4, 2)
        ball = Ball(c, -1)
        other_center = PAdicNumber.from_int(4 + 8, 2)
        assert ball.contains(other_center)
        shifted = Ball(other_center, -1)
        assert not shifted.is_disjoint_from(ball)

    def test_norm_constant_flag(self):
        assert Ball(PAdicNumber.from_int(1, 2), -2).norm_constant()
        assert not Ball(PAdicNumber.zero(2), 0).norm_constant()
