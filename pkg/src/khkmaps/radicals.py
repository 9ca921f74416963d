"""Exact arithmetic in a single quadratic extension Q(sqrt(r)).

Base points such as (sqrt(h), 0) and auxiliary parameters such as
m = sqrt((eps^2+1)(2h+5)) live in Q(sqrt(r)) for rational h and eps.
Elements of one extension combine freely with ints and Fractions; mixing two
different extensions raises TypeError.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational as _RationalABC


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, _RationalABC):
        return Fraction(v.numerator, v.denominator)
    raise TypeError(f"not a rational: {v!r}")


def _isqrt_exact(n: int):
    if n < 0:
        return None
    s = math.isqrt(n)
    return s if s * s == n else None


def rational_sqrt(q) -> Fraction | None:
    """Exact square root of a nonnegative rational, or None if irrational."""
    q = _as_fraction(q)
    if q < 0:
        return None
    a = _isqrt_exact(q.numerator)
    b = _isqrt_exact(q.denominator)
    if a is None or b is None:
        return None
    return Fraction(a, b)


class QuadExt:
    """a + b*sqrt(r) with rational a, b and a fixed non-square rational r > 0."""

    __slots__ = ("a", "b", "r")

    def __init__(self, a, b, r):
        self.a = _as_fraction(a)
        self.b = _as_fraction(b)
        self.r = _as_fraction(r)

    @classmethod
    def sqrt(cls, q):
        """sqrt(q) as an exact number: a Fraction when q is a square."""
        q = _as_fraction(q)
        if q < 0:
            raise ValueError(f"negative radicand {q}")
        s = rational_sqrt(q)
        if s is not None:
            return s
        return cls(0, 1, q)

    # -- coercion -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, QuadExt):
            if other.r != self.r:
                if other.b == 0:
                    return QuadExt(other.a, 0, self.r)
                if self.b == 0:
                    return None
                raise TypeError(f"mixed radicals sqrt({self.r}) and sqrt({other.r})")
            return other
        if isinstance(other, (int, Fraction)) or isinstance(other, _RationalABC):
            return QuadExt(other, 0, self.r)
        return None

    def _simplify(self):
        return self.a if self.b == 0 else self

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        if isinstance(other, float):
            return float(self) + other
        o = self._coerce(other)
        if o is None:
            if isinstance(other, QuadExt):
                return other.__add__(self)
            return NotImplemented
        return QuadExt(self.a + o.a, self.b + o.b, self.r)._simplify()

    __radd__ = __add__

    def __neg__(self):
        return QuadExt(-self.a, -self.b, self.r)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, float):
            return float(self) * other
        o = self._coerce(other)
        if o is None:
            if isinstance(other, QuadExt):
                return other.__mul__(self)
            return NotImplemented
        return QuadExt(self.a * o.a + self.b * o.b * self.r,
                       self.a * o.b + self.b * o.a, self.r)._simplify()

    __rmul__ = __mul__

    def conjugate(self):
        return QuadExt(self.a, -self.b, self.r)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.r

    def inverse(self):
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt(r))")
        return QuadExt(self.a / n, -self.b / n, self.r)._simplify()

    def __truediv__(self, other):
        if isinstance(other, float):
            return float(self) / other
        o = self._coerce(other)
        if o is None:
            if isinstance(other, QuadExt):
                return self * other.inverse()
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        if isinstance(other, float):
            return other / float(self)
        return self.inverse() * other

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = Fraction(1)
        base = self
        while n:
            if n & 1:
                result = base * result
            base = base * base
            n >>= 1
        return result

    # -- comparison -----------------------------------------------------
    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with b^2 r
        d = self.a * self.a - self.b * self.b * self.r
        return sa if d > 0 else (sb if d < 0 else 0)

    def __eq__(self, other):
        if isinstance(other, float):
            return float(self) == other
        try:
            o = self._coerce(other)
        except TypeError:
            return False
        if o is None:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b, self.r))

    def _cmp(self, other):
        if isinstance(other, float):
            f = float(self)
            return (f > other) - (f < other)
        d = self - other
        if isinstance(d, QuadExt):
            return d.sign()
        return (d > 0) - (d < 0)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(float(self.r))

    def __repr__(self):
        return f"QuadExt({self.a}, {self.b}, {self.r})"

    def __str__(self):
        return f"({self.a}+{self.b}*sqrt({self.r}))"


def exact_sqrt(q):
    """Square root staying exact for rationals and falling back to floats."""
    if isinstance(q, (int, Fraction)):
        if q < 0:
            raise ValueError(f"negative radicand {q}")
        return QuadExt.sqrt(q)
    if isinstance(q, QuadExt):
        if q.b == 0:
            return QuadExt.sqrt(q.a)
        f = float(q)
        if f < 0:
            raise ValueError(f"negative radicand {q}")
        return math.sqrt(f)
    f = float(q)
    if f < 0:
        raise ValueError(f"negative radicand {q}")
    return math.sqrt(f)


def is_exact(v) -> bool:
    return isinstance(v, (int, Fraction, QuadExt))


def to_float(v) -> float:
    return float(v)
