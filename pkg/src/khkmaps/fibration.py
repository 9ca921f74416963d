"""Pencils of invariant curves, conic classification and proper rational
parametrizations of the level curves."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable, Mapping

from .expr import Expr, evaluate, expr_to_fraction_pair, parse_expr, to_text
from .poly import Poly2
from .radicals import QuadExt, exact_sqrt, is_exact
from .rational import PoleError, RationalFn2


class ParametrizationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# pencils and conics
# ---------------------------------------------------------------------------

class CurvePencil:
    """Curves {F(x, y; h, eps) = 0} indexed by the level h."""

    def __init__(self, defining: Expr | str, description: str = ""):
        if isinstance(defining, str):
            defining = parse_expr(defining, {"x", "y", "h", "eps"})
        self.defining = defining
        self.description = description

    def instantiate(self, h, eps=None) -> Poly2:
        env = {"h": _ex(h)}
        if eps is not None:
            env["eps"] = _ex(eps)
        num, den = expr_to_fraction_pair(self.defining, env)
        if not den.is_const():
            raise ValueError("pencil must be polynomial in x and y")
        return num * (1 / den.const_value())

    def __repr__(self):
        return f"CurvePencil({to_text(self.defining)})"


def _ex(v):
    return Fraction(v) if isinstance(v, int) else v


PETRERA_SURIS_PENCIL = CurvePencil("(2-5*eps^2-2*eps^2*h)*x^2+2*x*y+y^2-6*x-4*y-2*h",
                                   "level curves of the map integral V of the petrera_suris system")
S1_PENCIL = CurvePencil("x^2+y^2-h*(1+2*y)", "circles H1 = h")
S2_PSEUDO_PENCIL = CurvePencil("x^2+y^2-h*(1+y)^2", "conics H2 = h")
S3_PENCIL = CurvePencil("9*(x^2+y^2)-24*x^2*y+16*x^4-h*(16*y-3)", "quartics H3 = h")


@dataclass(frozen=True)
class ConicClass:
    kind: str
    delta2: object = None  # determinant of the quadratic part
    delta3: object = None  # determinant of the full 3x3 matrix

    def __str__(self):
        return self.kind


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def classify_poly_conic(f: Poly2) -> ConicClass:
    if f.degree > 2:
        raise ValueError(f"degree {f.degree} curve is not a conic")
    t = f.terms
    g = lambda i, j: t.get((i, j), Fraction(0))  # noqa: E731
    a, b, c = g(2, 0), g(1, 1), g(0, 2)
    d, e, k = g(1, 0), g(0, 1), g(0, 0)
    if a == 0 and b == 0 and c == 0:
        if d == 0 and e == 0:
            return ConicClass("empty" if k != 0 else "degenerate_other")
        return ConicClass("line")
    b2, d2, e2 = b / 2, d / 2, e / 2
    delta2 = a * c - b2 * b2
    delta3 = a * (c * k - e2 * e2) - b2 * (b2 * k - e2 * d2) + d2 * (b2 * e2 - c * d2)
    s2, s3 = _sign(delta2), _sign(delta3)
    if s3 != 0:
        if s2 > 0:
            # real ellipse iff the constant side has the right sign
            return ConicClass("ellipse" if _sign(a) * s3 < 0 else "empty", delta2, delta3)
        if s2 == 0:
            return ConicClass("parabola", delta2, delta3)
        return ConicClass("hyperbola", delta2, delta3)
    if s2 > 0:
        return ConicClass("point", delta2, delta3)
    if s2 < 0:
        return ConicClass("two_lines", delta2, delta3)
    # parallel, coincident or imaginary lines
    kk = (a * k - d2 * d2) + (c * k - e2 * e2)
    sk = _sign(kk)
    if sk < 0:
        return ConicClass("two_lines", delta2, delta3)
    if sk == 0:
        return ConicClass("line", delta2, delta3)
    return ConicClass("empty", delta2, delta3)


def classify_conic(pencil: CurvePencil, h, eps=None) -> ConicClass:
    return classify_poly_conic(pencil.instantiate(h, eps))


# ---------------------------------------------------------------------------
# parametrizations
# ---------------------------------------------------------------------------

def _t_poly(coeffs) -> Poly2:
    """Univariate polynomial in t, stored in the x slot of a Poly2."""
    return Poly2({(i, 0): c for i, c in enumerate(coeffs)})


@dataclass
class CurveParametrization:
    """t -> (p1(t), p2(t)) on a curve, with an inverse (x, y) -> t.

    p1 and p2 are univariate rational functions kept as RationalFn2 in the
    first slot.  The inverse is any callable; `inverse_expr` holds a printable
    form when one exists.
    """
    p1: RationalFn2
    p2: RationalFn2
    inverse: Callable
    base_point: tuple
    curve: Poly2
    radical_defs: list = dc_field(default_factory=list)
    inverse_expr: str = ""
    label: str = ""

    def __call__(self, t):
        return self.point(t)

    def point(self, t):
        if isinstance(t, int):
            t = Fraction(t)
        return self.p1.evaluate(t, 0), self.p2.evaluate(t, 0)

    def invert(self, x, y):
        return self.inverse(x, y)

    def is_exact(self) -> bool:
        return self.p1.is_exact() and self.p2.is_exact() and self.curve.is_exact()

    def on_curve_residual(self, t) -> float:
        x, y = self.point(t)
        v = self.curve.evaluate(x, y)
        if is_exact(v) and v == 0:
            return 0.0
        scale = 1.0 + sum(abs(float(c)) * max(1.0, abs(float(x))) ** i * max(1.0, abs(float(y))) ** j
                          for (i, j), c in self.curve.terms.items())
        return abs(float(v)) / scale

    def check_on_curve(self, samples=None, tol: float = 1e-12) -> bool:
        for t in samples or _default_samples():
            try:
                r = self.on_curve_residual(t)
            except (PoleError, ZeroDivisionError):
                continue
            if r > tol:
                return False
        return True

    def check_round_trip(self, samples=None, tol: float = 1e-10) -> bool:
        for t in samples or _default_samples():
            try:
                x, y = self.point(t)
                back = self.inverse(x, y)
            except (PoleError, ZeroDivisionError):
                continue
            if is_exact(back) and is_exact(t):
                if back != t:
                    return False
            elif abs(float(back) - float(t)) > tol * (1 + abs(float(t))):
                return False
        return True


def _default_samples(n: int = 20):
    return [Fraction(k - 7, 3) + Fraction(1, 7) for k in range(n)]


def parametrize_by_lines(curve: Poly2, base, label: str = "") -> CurveParametrization:
    """Parametrize a conic by the pencil of lines through a point on it.

    With the base point moved to the origin the curve reads f1 + f2 = 0; the
    line v = t*u meets it again at u = -f1(1, t)/f2(1, t).
    """
    x0, y0 = (_ex(c) for c in base)
    if curve.degree != 2:
        raise ParametrizationError("parametrization by lines needs a conic")
    f0 = curve.evaluate(x0, y0)
    if (is_exact(f0) and f0 != 0) or (not is_exact(f0) and abs(float(f0)) > 1e-12):
        raise ParametrizationError(f"base point ({x0}, {y0}) is not on the curve")
    fx0 = curve.diff_x().evaluate(x0, y0)
    fy0 = curve.diff_y().evaluate(x0, y0)
    t = curve.terms
    A, B, C = (t.get(k, Fraction(0)) for k in ((2, 0), (1, 1), (0, 2)))
    f2 = _t_poly([A, B, C])
    f1 = _t_poly([fx0, fy0])
    if f2.is_zero():
        raise ParametrizationError("quadratic part vanishes along every line")
    tt = _t_poly([0, 1])
    p1 = RationalFn2(f2 * x0 - f1, f2)
    p2 = RationalFn2(f2 * y0 - tt * f1, f2)

    def inverse(x, y):
        dx = x - x0
        if dx == 0:
            raise PoleError("slope inverse undefined on the vertical line through the base point", None, (x, y))
        return (y - y0) / dx

    return CurveParametrization(p1, p2, inverse, (x0, y0), curve,
                                inverse_expr=f"(y - {y0})/(x - {x0})", label=label or "lines")


# ---------------------------------------------------------------------------
# inverse via a gcd over the function field of the curve
# ---------------------------------------------------------------------------

def _t_coeffs(p: RationalFn2):
    """Numerator and denominator coefficient lists in t (low degree first)."""
    def lst(q: Poly2):
        n = q.degx
        return [q.terms.get((i, 0), Fraction(0)) for i in range(n + 1)] if not q.is_zero() else []
    return lst(p.num), lst(p.den)


def inverse_by_gcd(param: CurveParametrization, tol: float = 1e-9) -> RationalFn2:
    """D0/D1 from gcd(x*P12 - P11, y*P22 - P21) = D1*t - D0 over the curve's
    function field.  Raises ParametrizationError when the gcd is not linear in t,
    which signals an improper parametrization."""
    n1, d1 = _t_coeffs(param.p1)
    n2, d2 = _t_coeffs(param.p2)
    X, Y = Poly2.x(), Poly2.y()
    L1 = max(len(n1), len(d1))
    L2 = max(len(n2), len(d2))
    get = lambda L, i: L[i] if i < len(L) else Fraction(0)  # noqa: E731
    r1 = [X * get(d1, i) - Poly2.const(get(n1, i)) for i in range(L1)]
    r2 = [Y * get(d2, i) - Poly2.const(get(n2, i)) for i in range(L2)]

    maxdeg = max(L1, L2)
    samples = []
    k = 0
    while len(samples) < 4 * maxdeg * maxdeg + 24 and k < 400:
        tk = Fraction(2 * k + 3, 5) - 7
        k += 1
        try:
            samples.append(param.point(tk))
        except (PoleError, ZeroDivisionError):
            continue

    def zero_on_curve(c: Poly2) -> bool:
        if c.is_zero():
            return True
        need = 2 * max(c.degree, 1) * maxdeg + 1
        for (x, y) in samples[:need]:
            v = c.evaluate(x, y)
            if is_exact(v):
                if v != 0:
                    return False
            elif abs(float(v)) > tol * (1 + sum(abs(float(q)) for q in c.terms.values())):
                return False
        return True

    def trim(p):
        p = list(p)
        while p and zero_on_curve(p[-1]):
            p.pop()
        return p

    a, b = trim(r1), trim(r2)
    if len(a) < len(b):
        a, b = b, a
    while True:
        if not b:
            g = a
            break
        if len(b) == 1:
            raise ParametrizationError("the gcd is constant in t")
        # pseudo-remainder of a by b in t
        lb = b[-1]
        r = list(a)
        while len(r) >= len(b):
            lr = r[-1]
            shift = len(r) - len(b)
            r = [c * lb for c in r]
            for i, c in enumerate(b):
                r[i + shift] = r[i + shift] - c * lr
            r = trim(r)
        a, b = b, r
    if len(g) != 2:
        raise ParametrizationError(f"gcd has degree {len(g) - 1} in t; the parametrization is not proper")
    b0, b1 = g
    return RationalFn2(-b0, b1)


# ---------------------------------------------------------------------------
# printed parametrizations shipped with the catalog systems
# ---------------------------------------------------------------------------

def _from_exprs(px: str, py: str, inv: str, env: Mapping[str, object], curve: Poly2, base, defs, label,
                names=("t", "h", "eps")) -> CurveParametrization:
    allowed = set(names) | set(env)
    ex = parse_expr(px, allowed, allow_sqrt=True)
    ey = parse_expr(py, allowed, allow_sqrt=True)
    einv = parse_expr(inv, allowed | {"x", "y"}, allow_sqrt=True)
    p1 = _univariate(ex, env)
    p2 = _univariate(ey, env)

    def inverse(x, y):
        try:
            return evaluate(einv, dict(env, x=x, y=y))
        except ZeroDivisionError as exc:
            raise PoleError(str(exc), None, (x, y)) from None

    return CurveParametrization(p1, p2, inverse, base, curve, list(defs), inv, label)


def _univariate(e: Expr, env) -> RationalFn2:
    try:
        n, d = expr_to_fraction_pair(e, env, slots=("t", "_unused"))
    except TypeError:
        # two different radicals meet: fall back to floating coefficients
        n, d = expr_to_fraction_pair(e, {k: float(v) for k, v in env.items()}, slots=("t", "_unused"))
    return RationalFn2(n, d)


def _radical(v):
    """sqrt(v) exactly when v is rational, else in floating point."""
    if v < 0:
        raise ParametrizationError(f"radicand {v} is negative")
    return exact_sqrt(v)


def petrera_suris_param(eps, h) -> CurveParametrization:
    """Lines through (1, m+1) with m^2 = (eps^2+1)(2h+5)."""
    eps, h = _ex(eps), _ex(h)
    m = _radical((eps * eps + 1) * (2 * h + 5))
    env = {"eps": eps, "h": h, "m": m}
    den = "((eps^2+1)*t^2+(2*eps^2+2)*t-eps^2*m^2+2*eps^2+2)"
    px = f"((eps^2+1)*t^2-2*(eps^2+1)*(m-1)*t+eps^2*m^2-2*eps^2*m+2*eps^2-2*m+2)/{den}"
    py = f"-((eps^2+1)*(m-1)*t^2-2*((m^2+1)*eps^2+1)*t+(m+1)*(eps^2*m^2-2*eps^2-2))/{den}"
    inv = ("((eps^2*(m^2-2)-2)*x+(eps^2*(m-1)-1)*y+eps^2*(3-2*m)-m+3)"
           "/((eps^2*(m+1)+1)*x+(eps^2+1)*y-2*eps^2+m-2)")
    curve = PETRERA_SURIS_PENCIL.instantiate(h, eps)
    return _from_exprs(px, py, inv, env, curve, (Fraction(1), m + 1),
                       [("m", "m^2 = (eps^2+1)*(2*h+5)")], "petrera_suris P_h")


def s1_param(h, basin: str = "O1") -> CurveParametrization:
    """Circles of S1 around O1 (h >= 0) or O2 (h <= -1)."""
    h = _ex(h)
    curve = S1_PENCIL.instantiate(h)
    if basin == "O1":
        if h < 0:
            raise ParametrizationError("basin O1 needs h >= 0")
        s = _radical(h)
        env = {"h": h, "s": s}
        px = "s*(t^2+2*s*t-1)/(t^2+1)"
        py = "2*s*t*(s*t-1)/(t^2+1)"
        inv = "y/(x-s)"
        base = (s, Fraction(0))
        defs = [("s", "s^2 = h")]
    elif basin == "O2":
        if h > -1:
            raise ParametrizationError("basin O2 needs h <= -1")
        s = _radical(-h - 1)
        env = {"h": h, "s": s}
        px = "(s*t^2+(2*h+2)*t-s)/(t^2+1)"
        py = "((2*h+1)*t^2-2*s*t-1)/(t^2+1)"
        inv = "(y+1)/(x-s)"
        base = (s, Fraction(-1))
        defs = [("s", "s^2 = -h-1")]
    else:
        raise ParametrizationError(f"unknown basin {basin!r}")
    return _from_exprs(px, py, inv, env, curve, base, defs, f"S1 P_{basin}")


def s2_pseudo_param(h) -> CurveParametrization:
    """Conics x^2+y^2 = h(1+y)^2 through (sqrt(h), 0)."""
    h = _ex(h)
    if h <= 0:
        raise ParametrizationError("needs h > 0")
    s = _radical(h)
    env = {"h": h, "s": s}
    px = "-2*(h*t-s)/(-1+(h-1)*t^2)+s"
    py = "-2*t*(h*t-s)/(-1+(h-1)*t^2)"
    inv = "(s*x+(h-1)*y+h)/((h-1)*x+s*(h-1)*y+s*(h+1))"
    curve = S2_PSEUDO_PENCIL.instantiate(h)
    return _from_exprs(px, py, inv, env, curve, (s, Fraction(0)), [("s", "s^2 = h")], "S2 pseudo P_2h")


def parametrize_s3(h) -> CurveParametrization:
    """The quartic level curves of H3 through the substitution w = 4x^2 - 3y."""
    h = _ex(h)
    B = 64 * h - 27
    if B == 0:
        raise ParametrizationError("64h - 27 = 0 degenerates the parametrization")
    rad = B * h
    if rad < 0:
        raise ParametrizationError("(64h-27)h < 0: the radical A is imaginary")
    A = _radical(rad)
    env = {"h": h, "A": A, "B": B}
    px = "2*(8*h*t-3*A)/(-3*t^2+B)+3*A/B"
    py = ("(4*h*(256*h-81)*t^4-6*A*(128*h-27)*t^3+216*B*h*t^2-54*A*B*t+12*h*B^2)"
          "/(B*(-3*t^2+B)^2)")
    inv = ("(12*B*C*x^3+180*A*B*x^2+(-9*B*C*y+1024*h^2*B)*x-27*A*B*y+48*A*B*h)"
           "/(1728*x^3*A+3*B*E*x^2+(18*A*D-1296*A*y)*x-144*B*h*y+h*(256*h-27)*B)")
    env.update({"C": 64 * h + 27, "D": 128 * h - 27, "E": 128 * h + 27})
    curve = S3_PENCIL.instantiate(h)
    return _from_exprs(px, py, inv, env, curve, (3 * A / B, (4 * (3 * A / B) ** 2) / 3),
                       [("A", "A^2 = (64h-27)h"), ("B", "B = 64h-27")], "S3 P_3h")


def s3_slope_inverse(h):
    """t = (4x^2 - 3y)/(x - 3A/B), the slope through the base point of the conic."""
    h = _ex(h)
    B = 64 * h - 27
    x0 = 3 * _radical(B * h) / B

    def inverse(x, y):
        return (4 * x * x - 3 * y) / (x - x0)
    return inverse
