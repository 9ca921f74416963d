"""Deterministic polynomial identity testing on integer grids.

A polynomial whose degree in x is at most dx and in y at most dy, and which
vanishes at every point of S x T with |S| = dx+1 and |T| = dy+1, is the zero
polynomial.  Compositions are never expanded: a LazyPoly only knows how to
evaluate itself at a point and carries per-variable degree bounds.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable

from .poly import Poly2
from .rational import RationalFn2, RationalMap2


class LazyPoly:
    """A polynomial given by an evaluation rule plus degree bounds."""

    __slots__ = ("_eval", "dx", "dy")

    def __init__(self, ev: Callable, dx: int, dy: int):
        self._eval = ev
        self.dx = dx
        self.dy = dy

    def value(self, pt, memo: dict | None = None):
        if memo is None:
            memo = {}
        k = id(self)
        if k not in memo:
            memo[k] = self._eval(pt, memo)
        return memo[k]

    @classmethod
    def of(cls, p: Poly2) -> "LazyPoly":
        return cls(lambda pt, memo: p.evaluate(pt[0], pt[1]), p.degx, p.degy)

    @classmethod
    def const(cls, c) -> "LazyPoly":
        return cls(lambda pt, memo: c, 0, 0)

    def __add__(self, other: "LazyPoly") -> "LazyPoly":
        other = _lz(other)
        return LazyPoly(lambda pt, m: self.value(pt, m) + other.value(pt, m),
                        max(self.dx, other.dx), max(self.dy, other.dy))

    def __sub__(self, other: "LazyPoly") -> "LazyPoly":
        other = _lz(other)
        return LazyPoly(lambda pt, m: self.value(pt, m) - other.value(pt, m),
                        max(self.dx, other.dx), max(self.dy, other.dy))

    def __mul__(self, other: "LazyPoly") -> "LazyPoly":
        other = _lz(other)
        return LazyPoly(lambda pt, m: self.value(pt, m) * other.value(pt, m),
                        self.dx + other.dx, self.dy + other.dy)

    def __neg__(self):
        return LazyPoly(lambda pt, m: -self.value(pt, m), self.dx, self.dy)

    def __pow__(self, n: int) -> "LazyPoly":
        return LazyPoly(lambda pt, m: self.value(pt, m) ** n, self.dx * n, self.dy * n)


def _lz(v) -> LazyPoly:
    if isinstance(v, LazyPoly):
        return v
    if isinstance(v, Poly2):
        return LazyPoly.of(v)
    return LazyPoly.const(v)


def homog_compose(p: Poly2, a: LazyPoly, b: LazyPoly, d: LazyPoly, k: int) -> LazyPoly:
    """Numerator of p(a/d, b/d) times d^k, with k >= deg p."""
    mx = max(a.dx, b.dx, d.dx)
    my = max(a.dy, b.dy, d.dy)
    return LazyPoly(lambda pt, m: p.evaluate_homogenized(a.value(pt, m), b.value(pt, m), d.value(pt, m), k),
                    k * mx, k * my)


class LazyMap:
    """A planar map (a/d, b/d) with polynomial a, b, d given lazily."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a: LazyPoly, b: LazyPoly, d: LazyPoly):
        self.a, self.b, self.d = a, b, d

    @classmethod
    def of(cls, m: RationalMap2) -> "LazyMap":
        n1, n2, d = m.common_form()
        return cls(LazyPoly.of(n1), LazyPoly.of(n2), LazyPoly.of(d))

    @classmethod
    def identity(cls) -> "LazyMap":
        return cls(LazyPoly.of(Poly2.x()), LazyPoly.of(Poly2.y()), LazyPoly.const(Fraction(1)))

    def then(self, outer: RationalMap2) -> "LazyMap":
        """outer o self."""
        n1, n2, d = outer.common_form()
        k = max(n1.degree, n2.degree, d.degree)
        return LazyMap(homog_compose(n1, self.a, self.b, self.d, k),
                       homog_compose(n2, self.a, self.b, self.d, k),
                       homog_compose(d, self.a, self.b, self.d, k))

    def pull_fn(self, h: RationalFn2) -> tuple[LazyPoly, LazyPoly]:
        """Numerator and denominator of h o self."""
        k = max(h.num.degree, h.den.degree)
        return (homog_compose(h.num, self.a, self.b, self.d, k),
                homog_compose(h.den, self.a, self.b, self.d, k))


def compose_power(m: RationalMap2, n: int) -> LazyMap:
    lm = LazyMap.identity()
    for _ in range(n):
        lm = lm.then(m)
    return lm


def grid_points(dx: int, dy: int, start: int = 1):
    for i in range(dx + 1):
        for j in range(dy + 1):
            yield Fraction(start + i), Fraction(start + j)


def find_nonzero(p: LazyPoly, start: int = 1, avoid: tuple = ()):
    """First grid point where p is nonzero, or None when p is identically zero.

    Points where any polynomial in `avoid` vanishes are skipped when a nonzero
    value is found there, so that returned witnesses sit inside the domain; the
    zero test itself always uses the full grid.
    """
    fallback = None
    for pt in grid_points(p.dx, p.dy, start):
        val = p.value(pt)
        if val != 0:
            if any(q.value(pt) == 0 for q in avoid):
                if fallback is None:
                    fallback = pt
                continue
            return pt
    if fallback is not None:
        # every nonzero grid value sat on an avoided curve; widen the search
        for s in range(start + 1, start + 50):
            for pt in ((Fraction(s + i), Fraction(s + 2 * i + 1)) for i in range(p.dx + 2)):
                if p.value(pt) != 0 and not any(q.value(pt) == 0 for q in avoid):
                    return pt
        return fallback
    return None


def is_identically_zero(p: LazyPoly) -> bool:
    return find_nonzero(p) is None


def rfn_identical(f: RationalFn2, g: RationalFn2) -> bool:
    """True iff f and g agree as rational functions."""
    diff = _lz(f.num) * _lz(g.den) - _lz(g.num) * _lz(f.den)
    return is_identically_zero(diff)


def maps_identical(f: RationalMap2, g: RationalMap2) -> bool:
    return rfn_identical(f.fx, g.fx) and rfn_identical(f.fy, g.fy)


def lazy_maps_identical(f: LazyMap, g: LazyMap) -> tuple[bool, object]:
    """Compare (f.a/f.d, f.b/f.d) with (g.a/g.d, g.b/g.d); returns (same, witness)."""
    e1 = f.a * g.d - g.a * f.d
    e2 = f.b * g.d - g.b * f.d
    avoid = (f.d, g.d)
    for e in (e1, e2):
        w = find_nonzero(e, avoid=avoid)
        if w is not None:
            return False, w
    return True, None
