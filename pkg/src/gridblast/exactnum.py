"""Exact arithmetic for slopes and coordinates.

Rationals are ``fractions.Fraction``.  :class:`QuadraticValue` adds numbers of
the form ``(a + b*sqrt(d)) / c`` with exact comparison and floor — enough to
cover every eventually-periodic continued fraction, which is the family of
irrational slopes the rest of the package cares about.  Nothing in this module
touches floating point except the explicit ``float()`` conversions used for
display.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

BigRational = Fraction

ExactNumber = Union[int, Fraction, "QuadraticValue"]

__all__ = [
    "BigRational",
    "ExactNumber",
    "MixedRadicandError",
    "QuadraticValue",
    "compare_exact",
    "floor_exact",
    "parse_exact",
]


class MixedRadicandError(ValueError):
    """Comparing two irrationals over distinct radicands is unsupported."""


def _squarefree_split(n: int) -> tuple[int, int]:
    """Factor ``n = f*f*r`` with ``r`` squarefree, by trial division."""
    if n < 0:
        raise ValueError("radicand must be non-negative")
    f, r = 1, 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            f *= p ** (e // 2)
            if e % 2:
                r *= p
        p += 1 if p == 2 else 2
    return f, r * n


def _sign_of(a: int, b: int, d: int) -> int:
    """Exact sign of ``a + b*sqrt(d)`` for squarefree d, via integer squaring."""
    if b == 0 or d == 0:
        return (a > 0) - (a < 0)
    if a == 0:
        return (b > 0) - (b < 0)
    if a > 0 and b > 0:
        return 1
    if a < 0 and b < 0:
        return -1
    # Opposite signs: whichever of a^2 and b^2*d is larger decides.
    lhs, rhs = a * a, b * b * d
    if lhs == rhs:
        # Would mean sqrt(d) is rational; unreachable for squarefree d > 1.
        return 0
    if lhs > rhs:
        return 1 if a > 0 else -1
    return 1 if b > 0 else -1


class QuadraticValue:
    """The exact number ``(a + b*sqrt(d)) / c`` in normal form.

    Normal form: ``c > 0``, ``d`` squarefree, ``gcd(a, b, c) = 1``, and a
    vanishing radical part is stored as ``b = 0, d = 0`` so rational values
    have one representation.
    """

    __slots__ = ("a", "b", "d", "c")

    def __init__(self, a: int, b: int, d: int, c: int = 1):
        if c == 0:
            raise ZeroDivisionError("denominator must be nonzero")
        if d < 0:
            raise ValueError("radicand must be non-negative")
        if d:
            f, r = _squarefree_split(d)
            b, d = b * f, r
        if d == 1:
            a, b, d = a + b, 0, 0
        if b == 0:
            d = 0
        if d == 0:
            b = 0
        if c < 0:
            a, b, c = -a, -b, -c
        g = math.gcd(math.gcd(abs(a), abs(b)), c)
        if g > 1:
            a, b, c = a // g, b // g, c // g
        self.a, self.b, self.d, self.c = a, b, d, c

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_rational(cls, value) -> "QuadraticValue":
        f = Fraction(value)
        return cls(f.numerator, 0, 0, f.denominator)

    # -- views -------------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self.d == 0

    def as_fraction(self) -> Fraction:
        if self.d:
            raise ValueError(f"{self} is irrational")
        return Fraction(self.a, self.c)

    def sign(self) -> int:
        return _sign_of(self.a, self.b, self.d)

    # -- arithmetic --------------------------------------------------------

    @staticmethod
    def _make(a: int, b: int, d: int, c: int):
        v = QuadraticValue(a, b, d, c)
        return v.as_fraction() if v.d == 0 else v

    def _coerced(self, other):
        """Return (a, b, d, c) for other, or None if incompatible."""
        if isinstance(other, QuadraticValue):
            if self.d and other.d and self.d != other.d:
                raise MixedRadicandError(
                    f"cannot combine radicands {self.d} and {other.d}"
                )
            return other.a, other.b, other.d, other.c
        if isinstance(other, int):
            return other, 0, 0, 1
        if isinstance(other, Fraction):
            return other.numerator, 0, 0, other.denominator
        return None

    def __add__(self, other):
        o = self._coerced(other)
        if o is None:
            return NotImplemented
        a2, b2, d2, c2 = o
        d = self.d or d2
        return self._make(
            self.a * c2 + a2 * self.c, self.b * c2 + b2 * self.c, d, self.c * c2
        )

    __radd__ = __add__

    def __neg__(self):
        return QuadraticValue(-self.a, -self.b, self.d, self.c)

    def __sub__(self, other):
        o = self._coerced(other)
        if o is None:
            return NotImplemented
        a2, b2, d2, c2 = o
        d = self.d or d2
        return self._make(
            self.a * c2 - a2 * self.c, self.b * c2 - b2 * self.c, d, self.c * c2
        )

    def __rsub__(self, other):
        return -self + other

    def __mul__(self, other):
        o = self._coerced(other)
        if o is None:
            return NotImplemented
        a2, b2, d2, c2 = o
        d = self.d or d2
        return self._make(
            self.a * a2 + self.b * b2 * d,
            self.a * b2 + self.b * a2,
            d,
            self.c * c2,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerced(other)
        if o is None:
            return NotImplemented
        a2, b2, d2, c2 = o
        if b2 == 0:
            if a2 == 0:
                raise ZeroDivisionError("division by zero")
            return self._make(self.a * c2, self.b * c2, self.d, self.c * a2)
        # Rationalize: 1/(a2 + b2*sqrt(d)) = (a2 - b2*sqrt(d)) / (a2^2 - b2^2*d)
        norm = a2 * a2 - b2 * b2 * d2
        return (self * QuadraticValue(a2 * c2, -b2 * c2, d2, norm)) * Fraction(1)

    def __rtruediv__(self, other):
        o = self._coerced(other)
        if o is None:
            return NotImplemented
        a2, b2, d2, c2 = o
        return QuadraticValue(a2, b2, d2, c2) / self

    # -- comparison --------------------------------------------------------

    def _cmp(self, other) -> int:
        o = self._coerced(other)
        if o is None:
            raise TypeError(f"cannot compare QuadraticValue with {type(other)!r}")
        a2, b2, d2, c2 = o
        if self.d and d2 and self.d != d2:
            raise MixedRadicandError(
                f"cannot compare radicands {self.d} and {d2}"
            )
        d = self.d or d2
        return _sign_of(self.a * c2 - a2 * self.c, self.b * c2 - b2 * self.c, d)

    def __eq__(self, other):
        try:
            return self._cmp(other) == 0
        except TypeError:
            return NotImplemented

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __hash__(self):
        if self.d == 0:
            return hash(Fraction(self.a, self.c))
        return hash((self.a, self.b, self.d, self.c))

    # -- conversion / display ----------------------------------------------

    def __float__(self) -> float:
        return (self.a + self.b * math.sqrt(self.d)) / self.c

    def __repr__(self) -> str:
        return f"QuadraticValue({self.a}, {self.b}, {self.d}, {self.c})"

    def __str__(self) -> str:
        if self.d == 0:
            return str(Fraction(self.a, self.c))
        core = f"{self.a}"
        core += f"{'+' if self.b >= 0 else '-'}{abs(self.b)}*sqrt({self.d})"
        return f"({core})/{self.c}" if self.c != 1 else f"({core})"


def compare_exact(u: ExactNumber, v: ExactNumber) -> int:
    """Exact trichotomy: -1, 0, or 1 as u < v, u = v, u > v."""
    if not isinstance(u, QuadraticValue):
        u = QuadraticValue.from_rational(u)
    return u._cmp(v)


def floor_exact(v: ExactNumber) -> int:
    """Exact floor (toward minus infinity), no floating point involved."""
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction):
        return v.numerator // v.denominator
    a, b, d, c = v.a, v.b, v.d, v.c
    if d == 0:
        return a // c
    root = math.isqrt(b * b * d)
    # b*sqrt(d) lies in [root, root+1) for b > 0, in (-root-1, -root] otherwise,
    # so the first guess is within one of the true floor.
    n = (a + (root if b > 0 else -root - 1)) // c
    while _sign_of(a - (n + 1) * c, b, d) >= 0:
        n += 1
    while _sign_of(a - n * c, b, d) < 0:
        n -= 1
    return n


def parse_exact(text: str) -> ExactNumber:
    """Parse exact number syntax.

    Accepted forms: integers (``146``), fractions (``5/3``), decimal literals
    converted exactly (``3.01`` -> 301/100), mixed sums (``3+1/17``), and
    ``quad:a,b,d,c`` for (a + b*sqrt(d))/c.  Rational results are returned as
    ``Fraction``; genuinely irrational ones as :class:`QuadraticValue`.
    """
    s = text.strip()
    if not s:
        raise ValueError("empty number")
    if s.startswith("quad:"):
        parts = s[len("quad:"):].split(",")
        if len(parts) != 4:
            raise ValueError(f"quad: expects four integers, got {text!r}")
        try:
            a, b, d, c = (int(p.strip()) for p in parts)
        except ValueError as exc:
            raise ValueError(f"bad quad component in {text!r}") from exc
        v = QuadraticValue(a, b, d, c)
        return v.as_fraction() if v.is_rational else v
    if "+" in s[1:]:
        head, _, tail = s.partition("+") if not s.startswith(("+", "-")) else (
            s[0] + s[1:].partition("+")[0],
            "+",
            s[1:].partition("+")[2],
        )
        try:
            return Fraction(head) + Fraction(tail)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"bad mixed number {text!r}") from exc
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad number {text!r}") from exc
