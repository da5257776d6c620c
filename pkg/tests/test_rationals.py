import pytest
from hypothesis import given, strategies as st

from prefdesign.rationals import MAX_MAGNITUDE, Rational, RationalOverflowError

small_ints = st.integers(min_value=-1000, max_value=1000)
positive_ints = st.integers(min_value=1, max_value=1000)


class TestConstruction:
    def test_lowest_terms(self):
        r = Rational(6, 8)
        assert (r.numerator, r.denominator) == (3, 4)

    def test_negative_denominator_normalizes(self):
        r = Rational(1, -2)
        assert (r.numerator, r.denominator) == (-1, 2)

    def test_zero(self):
        assert Rational(0, 5) == Rational(0)
        assert not Rational(0)

    def test_zero_denominator(self):
        with pytest.raises(ZeroDivisionError):
            Rational(1, 0)

    def test_overflow_detection(self):
        with pytest.raises(RationalOverflowError):
            Rational(MAX_MAGNITUDE, 1)
        with pytest.raises(RationalOverflowError):
            Rational(1, MAX_MAGNITUDE) * Rational(1, MAX_MAGNITUDE - 1)

    def test_immutable(self):
        r = Rational(1, 2)
        with pytest.raises(AttributeError):
            r.numerator = 3

    def test_non_integer_rejected(self):
        with pytest.raises(TypeError):
            Rational(0.5)  # type: ignore[arg-type]


class TestArithmetic:
    def test_basic(self):
        assert Rational(1, 2) + Rational(1, 3) == Rational(5, 6)
        assert Rational(1, 2) - Rational(1, 3) == Rational(1, 6)
        assert Rational(2, 3) * Rational(3, 4) == Rational(1, 2)
        assert Rational(1, 2) / Rational(1, 4) == Rational(2)

    def test_int_mixing(self):
        assert Rational(1, 2) + 1 == Rational(3, 2)
        assert 2 * Rational(1, 4) == Rational(1, 2)
        assert 1 - Rational(1, 4) == Rational(3, 4)

    def test_division_by_zero(self):
        with pytest.raises(ZeroDivisionError):
            Rational(1) / Rational(0)

    @given(small_ints, positive_ints, small_ints, positive_ints)
    def test_field_laws(self, a, b, c, d):
        x, y = Rational(a, b), Rational(c, d)
        assert x + y == y + x
        assert x * y == y * x
        assert x + Rational(0) == x
        assert x * Rational(1) == x
        assert (x - y) + y == x

    @given(small_ints, positive_ints)
    def test_float_conversion(self, a, b):
        assert float(Rational(a, b)) == pytest.approx(a / b)


class TestOrderingAndStrings:
    def test_comparisons(self):
        assert Rational(1, 3) < Rational(1, 2) <= Rational(2, 4)
        assert Rational(-1, 2) < Rational(0) < Rational(1, 1000)

    def test_string_round_trip(self):
        for text in ("3/4", "-7/2", "5", "0/9"):
            r = Rational.from_string(text)
            assert Rational.from_string(str(r)) == r

    def test_from_float_snaps_to_grid(self):
        assert Rational.from_float(0.5) == Rational(1, 2)
        assert Rational.from_float(float(1 / 3)) == Rational(1, 3)

    def test_hashable(self):
        assert len({Rational(1, 2), Rational(2, 4), Rational(1, 3)}) == 2
