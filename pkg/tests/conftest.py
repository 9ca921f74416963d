"""Shared oracle helpers.  sympy appears only here and in tests."""

from fractions import Fraction

import sympy as sp

from khkmaps.poly import Poly2

X, Y = sp.symbols("x y")


def to_sympy(p: Poly2):
    return sp.Add(*[sp.Rational(c.numerator, c.denominator) * X**i * Y**j for (i, j), c in p.terms.items()])


def rfn_to_sympy(f):
    return to_sympy(f.num) / to_sympy(f.den)


def from_sympy(e) -> Poly2:
    poly = sp.Poly(sp.expand(e), X, Y)
    return Poly2({m: Fraction(int(c.p), int(c.q)) for m, c in poly.terms()})
