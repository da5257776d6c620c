"""Exact rational arithmetic with bounded magnitude.

Lottery weights must be exact so that indifference and support equality
stay decidable; floats enter only when utilities are computed.  Numerators
and denominators are kept below 2**63 and every operation fails loudly
with :class:`RationalOverflowError` instead of silently growing, which
keeps weight denominators honest on desk-scale instances.
"""

from __future__ import annotations

import math
from fractions import Fraction

__all__ = ["Rational", "RationalOverflowError", "MAX_MAGNITUDE"]

MAX_MAGNITUDE = 1 << 63


class RationalOverflowError(ArithmeticError):
    """A rational operation exceeded the supported integer width."""


class Rational:
    """A rational number stored in lowest terms with denominator > 0."""

    __slots__ = ("numerator", "denominator")

    numerator: int
    denominator: int

    def __init__(self, numerator: int = 0, denominator: int = 1):
        if not isinstance(numerator, int) or not isinstance(denominator, int):
            raise TypeError("Rational expects integer numerator/denominator")
        if denominator == 0:
            raise ZeroDivisionError("Rational with zero denominator")
        if denominator < 0:
            numerator, denominator = -numerator, -denominator
        g = math.gcd(numerator, denominator)
        if g > 1:
            numerator //= g
            denominator //= g
        if abs(numerator) >= MAX_MAGNITUDE or denominator >= MAX_MAGNITUDE:
            raise RationalOverflowError(
                f"rational {numerator}/{denominator} exceeds 2**63 magnitude"
            )
        object.__setattr__(self, "numerator", numerator)
        object.__setattr__(self, "denominator", denominator)

    def __setattr__(self, name, value):  # immutable after construction
        raise AttributeError("Rational is immutable")

    # -- constructors -------------------------------------------------

    @classmethod
    def from_string(cls, text: str) -> "Rational":
        """Parse ``"num/den"`` or a bare integer string."""
        text = text.strip()
        if "/" in text:
            num, den = text.split("/", 1)
            return cls(int(num), int(den))
        return cls(int(text))

    @classmethod
    def from_float(cls, value: float, max_denominator: int = 10**6) -> "Rational":
        """Nearest rational with denominator <= max_denominator."""
        frac = Fraction(value).limit_denominator(max_denominator)
        return cls(frac.numerator, frac.denominator)

    # -- arithmetic ----------------------------------------------------

    @staticmethod
    def _coerce(other) -> "Rational":
        if isinstance(other, Rational):
            return other
        if isinstance(other, int):
            return Rational(other)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other) -> "Rational":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Rational(
            self.numerator * other.denominator + other.numerator * self.denominator,
            self.denominator * other.denominator,
        )

    __radd__ = __add__

    def __sub__(self, other) -> "Rational":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Rational(
            self.numerator * other.denominator - other.numerator * self.denominator,
            self.denominator * other.denominator,
        )

    def __rsub__(self, other) -> "Rational":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other) -> "Rational":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Rational(
            self.numerator * other.numerator, self.denominator * other.denominator
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Rational":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.numerator == 0:
            raise ZeroDivisionError("division by zero Rational")
        return Rational(
            self.numerator * other.denominator, self.denominator * other.numerator
        )

    def __rtruediv__(self, other) -> "Rational":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __neg__(self) -> "Rational":
        return Rational(-self.numerator, self.denominator)

    def __abs__(self) -> "Rational":
        return Rational(abs(self.numerator), self.denominator)

    # -- comparisons ---------------------------------------------------

    def _cmp(self, other) -> int:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented  # type: ignore[return-value]
        lhs = self.numerator * other.denominator
        rhs = other.numerator * self.denominator
        return (lhs > rhs) - (lhs < rhs)

    def __eq__(self, other) -> bool:
        if isinstance(other, Rational):
            return (
                self.numerator == other.numerator
                and self.denominator == other.denominator
            )
        if isinstance(other, int):
            return self.denominator == 1 and self.numerator == other
        return NotImplemented

    def __lt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c >= 0

    def __hash__(self):
        return hash((self.numerator, self.denominator))

    def __bool__(self):
        return self.numerator != 0

    # -- conversions ---------------------------------------------------

    def __float__(self) -> float:
        return self.numerator / self.denominator

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"

    def __repr__(self) -> str:
        return f"Rational({self.numerator}, {self.denominator})"


ZERO = Rational(0)
ONE = Rational(1)
