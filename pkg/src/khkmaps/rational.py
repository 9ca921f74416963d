"""Bivariate rational functions and planar rational maps."""

from __future__ import annotations

from typing import Mapping

from .expr import Expr, expr_to_fraction_pair, parse_expr, poly_to_expr
from .poly import Poly2, poly_divide_exact, poly_gcd2


class PoleError(ZeroDivisionError):
    """Evaluation hit a zero of a denominator."""

    def __init__(self, msg: str, component: str | None = None, point=None):
        super().__init__(msg)
        self.component = component
        self.point = point


class RationalFn2:
    """num/den in x, y.  Exact instances are kept reduced with a monic
    denominator; float instances are stored as given."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly2, den: Poly2 | None = None, reduce: bool = True):
        if den is None:
            den = Poly2.one()
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if reduce and num.is_exact() and den.is_exact():
            num, den = _reduce(num, den)
        self.num = num
        self.den = den

    @classmethod
    def from_poly(cls, p: Poly2) -> "RationalFn2":
        return cls(p, Poly2.one(), reduce=False)

    @classmethod
    def const(cls, c) -> "RationalFn2":
        return cls(Poly2.const(c), Poly2.one(), reduce=False)

    def is_polynomial(self) -> bool:
        return self.den.is_const()

    def is_exact(self) -> bool:
        return self.num.is_exact() and self.den.is_exact()

    def evaluate(self, x, y):
        d = self.den.evaluate(x, y)
        if d == 0:
            raise PoleError(f"denominator vanishes at ({x}, {y})", point=(x, y))
        return self.num.evaluate(x, y) / d

    __call__ = evaluate

    def __add__(self, other):
        other = _lift(other)
        if self.den == other.den:
            return RationalFn2(self.num + other.num, self.den)
        return RationalFn2(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFn2(-self.num, self.den, reduce=False)

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) - self

    def __mul__(self, other):
        other = _lift(other)
        return RationalFn2(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _lift(other)
        if other.num.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFn2(self.num * other.den, self.den * other.num)

    def __pow__(self, n: int):
        if n < 0:
            return RationalFn2(self.den ** (-n), self.num ** (-n))
        return RationalFn2(self.num ** n, self.den ** n, reduce=False)

    def diff_x(self) -> "RationalFn2":
        return RationalFn2(self.num.diff_x() * self.den - self.num * self.den.diff_x(), self.den * self.den)

    def diff_y(self) -> "RationalFn2":
        return RationalFn2(self.num.diff_y() * self.den - self.num * self.den.diff_y(), self.den * self.den)

    def structurally_equal(self, other: "RationalFn2") -> bool:
        return self.num == other.num and self.den == other.den

    def to_expr(self, names=("x", "y")) -> Expr:
        n = poly_to_expr(self.num, names)
        if self.den == Poly2.one():
            return n
        return n / poly_to_expr(self.den, names)

    def __str__(self):
        if self.den == Poly2.one():
            return self.num.to_str()
        return f"({self.num.to_str()})/({self.den.to_str()})"

    def __repr__(self):
        return f"RationalFn2({self})"


def _lift(v) -> RationalFn2:
    if isinstance(v, RationalFn2):
        return v
    if isinstance(v, Poly2):
        return RationalFn2.from_poly(v)
    return RationalFn2.const(v)


def _reduce(num: Poly2, den: Poly2) -> tuple[Poly2, Poly2]:
    if num.is_zero():
        return Poly2(), Poly2.one()
    if den.is_const():
        c = den.const_value()
        return (num * (1 / c) if c != 1 else num), Poly2.one()
    g = poly_gcd2(num, den)
    if not g.is_const():
        num = poly_divide_exact(num, g)
        den = poly_divide_exact(den, g)
    _, lc = den.leading_term()
    if lc != 1:
        inv = 1 / lc
        num, den = num * inv, den * inv
    return num, den


def expr_to_rationalfn(e: Expr | str, env: Mapping[str, object] | None = None,
                       slots: tuple[str, str] = ("x", "y")) -> RationalFn2:
    """Reduced rational function equal to e.  Variables outside the two slots
    take their values from env."""
    if isinstance(e, str):
        e = parse_expr(e, allowed_vars=set(slots) | set(env or {}), allow_sqrt=True)
    num, den = expr_to_fraction_pair(e, env, slots)
    if den.is_zero():
        raise ZeroDivisionError("identically zero denominator")
    return RationalFn2(num, den)


class RationalMap2:
    """(x, y) -> (fx(x, y), fy(x, y))."""

    __slots__ = ("fx", "fy", "_common")

    def __init__(self, fx: RationalFn2, fy: RationalFn2):
        self.fx = fx
        self.fy = fy
        self._common = None

    @classmethod
    def identity(cls) -> "RationalMap2":
        return cls(RationalFn2.from_poly(Poly2.x()), RationalFn2.from_poly(Poly2.y()))

    @classmethod
    def from_exprs(cls, ex, ey, env=None, slots=("x", "y")) -> "RationalMap2":
        return cls(expr_to_rationalfn(ex, env, slots), expr_to_rationalfn(ey, env, slots))

    def components(self):
        return (self.fx, self.fy)

    def is_exact(self) -> bool:
        return self.fx.is_exact() and self.fy.is_exact()

    def common_form(self) -> tuple[Poly2, Poly2, Poly2]:
        """(n1, n2, d) with fx = n1/d and fy = n2/d, d the lcm of the denominators."""
        if self._common is None:
            d1, d2 = self.fx.den, self.fy.den
            if d1 == d2:
                self._common = (self.fx.num, self.fy.num, d1)
            elif d1.is_const() or d2.is_const() or not (d1.is_exact() and d2.is_exact()):
                self._common = (self.fx.num * d2, self.fy.num * d1, d1 * d2)
            else:
                g = poly_gcd2(d1, d2)
                c1 = poly_divide_exact(d2, g)
                c2 = poly_divide_exact(d1, g)
                self._common = (self.fx.num * c1, self.fy.num * c2, d1 * c1)
        return self._common

    def evaluate(self, x, y):
        dx = self.fx.den.evaluate(x, y)
        if dx == 0:
            raise PoleError(f"x-component denominator vanishes at ({x}, {y})", "x", (x, y))
        dy = self.fy.den.evaluate(x, y)
        if dy == 0:
            raise PoleError(f"y-component denominator vanishes at ({x}, {y})", "y", (x, y))
        return self.fx.num.evaluate(x, y) / dx, self.fy.num.evaluate(x, y) / dy

    __call__ = evaluate

    def float_evaluator(self):
        """A fast float-only callable (x, y) -> (x', y')."""
        n1, n2, d = (p.to_float() for p in self.common_form())
        t1 = list(n1.terms.items())
        t2 = list(n2.terms.items())
        td = list(d.terms.items())
        deg = max(n1.degree, n2.degree, d.degree)

        def f(x: float, y: float):
            xp = [1.0]
            yp = [1.0]
            for _ in range(deg):
                xp.append(xp[-1] * x)
                yp.append(yp[-1] * y)
            dv = sum(c * xp[i] * yp[j] for (i, j), c in td)
            if dv == 0.0:
                raise PoleError(f"denominator vanishes at ({x}, {y})", None, (x, y))
            a = sum(c * xp[i] * yp[j] for (i, j), c in t1)
            b = sum(c * xp[i] * yp[j] for (i, j), c in t2)
            return a / dv, b / dv

        return f

    def compose(self, inner: "RationalMap2") -> "RationalMap2":
        """Symbolic self o inner, reduced.  Intended for small maps."""
        a, b, d = inner.common_form()
        out = []
        for f in (self.fx, self.fy):
            k = max(f.num.degree, f.den.degree)
            out.append(RationalFn2(f.num.homogenized_compose(a, b, d, k),
                                   f.den.homogenized_compose(a, b, d, k)))
        return RationalMap2(*out)

    def compose_fn(self, h: RationalFn2) -> RationalFn2:
        """h o self, symbolic and reduced."""
        a, b, d = self.common_form()
        k = max(h.num.degree, h.den.degree)
        return RationalFn2(h.num.homogenized_compose(a, b, d, k), h.den.homogenized_compose(a, b, d, k))

    def jacobian(self):
        return ((self.fx.diff_x(), self.fx.diff_y()), (self.fy.diff_x(), self.fy.diff_y()))

    def to_exprs(self):
        return self.fx.to_expr(), self.fy.to_expr()

    def __str__(self):
        return f"({self.fx}, {self.fy})"

    def __repr__(self):
        return f"RationalMap2{self}"


def eval_map(m: RationalMap2, p):
    """Exact image of the point p; PoleError names the vanishing component."""
    return m.evaluate(*p)


def instantiate(src: str | Expr, env: Mapping[str, object]) -> RationalFn2:
    """A formula in x, y and parameters, with the parameters fixed."""
    if isinstance(src, str):
        src = parse_expr(src, allowed_vars={"x", "y"} | set(env), allow_sqrt=True)
    return expr_to_rationalfn(src, env)


__all__ = ["PoleError", "RationalFn2", "RationalMap2", "expr_to_rationalfn", "eval_map", "instantiate"]
