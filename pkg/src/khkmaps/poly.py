"""Bivariate polynomials over an exact field, plus the univariate helpers the
gcd needs.

Coefficients are Fractions by default; QuadExt coefficients work everywhere
except where a method says otherwise.  Floats are accepted for evaluation-only
polynomials (no gcd).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

from .radicals import QuadExt

Key = tuple[int, int]


def _is_exact_coeff(c) -> bool:
    return isinstance(c, (int, Fraction, QuadExt))


def _norm_coeff(c):
    if isinstance(c, int) and not isinstance(c, bool):
        return Fraction(c)
    return c


class Poly2:
    """Sparse polynomial in two variables: {(i, j): coeff} for coeff * x^i y^j."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: dict[Key, object] | None = None):
        clean = {}
        if terms:
            for k, c in terms.items():
                c = _norm_coeff(c)
                if c != 0:
                    clean[k] = c
        self.terms = clean
        self._hash = None

    # -- constructors ---------------------------------------------------
    @classmethod
    def const(cls, c) -> "Poly2":
        return cls({(0, 0): c})

    @classmethod
    def x(cls) -> "Poly2":
        return cls({(1, 0): 1})

    @classmethod
    def y(cls) -> "Poly2":
        return cls({(0, 1): 1})

    @classmethod
    def zero(cls) -> "Poly2":
        return cls()

    @classmethod
    def one(cls) -> "Poly2":
        return cls.const(1)

    # -- basic properties -----------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return all(k == (0, 0) for k in self.terms)

    def const_value(self):
        return self.terms.get((0, 0), Fraction(0))

    @property
    def degx(self) -> int:
        return max((i for i, _ in self.terms), default=0)

    @property
    def degy(self) -> int:
        return max((j for _, j in self.terms), default=0)

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.terms), default=0)

    def is_exact(self) -> bool:
        return all(_is_exact_coeff(c) for c in self.terms.values())

    def leading_term(self) -> tuple[Key, object]:
        """Leading term in lexicographic order with x > y."""
        k = max(self.terms)
        return k, self.terms[k]

    def __eq__(self, other):
        if not isinstance(other, Poly2):
            if _is_exact_coeff(other) or isinstance(other, float):
                return self == Poly2.const(other)
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    # -- arithmetic -----------------------------------------------------
    def _lift(self, other) -> "Poly2":
        if isinstance(other, Poly2):
            return other
        return Poly2.const(other)

    def __add__(self, other):
        other = self._lift(other)
        t = dict(self.terms)
        for k, c in other.terms.items():
            t[k] = t.get(k, 0) + c
        return Poly2(t)

    __radd__ = __add__

    def __neg__(self):
        return Poly2({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly2):
            if other == 0:
                return Poly2()
            return Poly2({k: c * other for k, c in self.terms.items()})
        t: dict[Key, object] = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                k = (i1 + i2, j1 + j2)
                t[k] = t.get(k, 0) + c1 * c2
        return Poly2(t)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly2":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly2.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, c) -> "Poly2":
        return self * c

    def diff_x(self) -> "Poly2":
        return Poly2({(i - 1, j): c * i for (i, j), c in self.terms.items() if i})

    def diff_y(self) -> "Poly2":
        return Poly2({(i, j - 1): c * j for (i, j), c in self.terms.items() if j})

    def map_coeffs(self, f) -> "Poly2":
        return Poly2({k: f(c) for k, c in self.terms.items()})

    def to_float(self) -> "Poly2":
        return self.map_coeffs(float)

    # -- evaluation -----------------------------------------------------
    def __call__(self, x, y):
        return self.evaluate(x, y)

    def evaluate(self, x, y):
        if not self.terms:
            return Fraction(0) if _is_exact_coeff(x) and _is_exact_coeff(y) else 0.0
        xp = _powers(x, self.degx)
        yp = _powers(y, self.degy)
        total = 0
        for (i, j), c in self.terms.items():
            total = total + c * xp[i] * yp[j]
        return total

    def evaluate_homogenized(self, a, b, d, k: int | None = None):
        """sum c_ij a^i b^j d^(k-i-j): the numerator of p(a/d, b/d) * d^k."""
        if k is None:
            k = self.degree
        if not self.terms:
            return 0
        ap = _powers(a, self.degx)
        bp = _powers(b, self.degy)
        dp = _powers(d, k)
        total = 0
        for (i, j), c in self.terms.items():
            total = total + c * ap[i] * bp[j] * dp[k - i - j]
        return total

    def evaluate_bihomogenized(self, a, da, b, db, kx: int, ky: int):
        """Numerator of p(a/da, b/db) * da^kx * db^ky."""
        if not self.terms:
            return 0
        ap = _powers(a, kx)
        dap = _powers(da, kx)
        bp = _powers(b, ky)
        dbp = _powers(db, ky)
        total = 0
        for (i, j), c in self.terms.items():
            total = total + c * ap[i] * dap[kx - i] * bp[j] * dbp[ky - j]
        return total

    def compose(self, p: "Poly2", q: "Poly2") -> "Poly2":
        """self(p(x,y), q(x,y)) as a polynomial."""
        pp = _powers(p, self.degx, one=Poly2.one())
        qp = _powers(q, self.degy, one=Poly2.one())
        total = Poly2()
        for (i, j), c in self.terms.items():
            total = total + (pp[i] * qp[j]) * c
        return total

    def homogenized_compose(self, a: "Poly2", b: "Poly2", d: "Poly2", k: int | None = None) -> "Poly2":
        if k is None:
            k = self.degree
        ap = _powers(a, self.degx, one=Poly2.one())
        bp = _powers(b, self.degy, one=Poly2.one())
        dp = _powers(d, k, one=Poly2.one())
        total = Poly2()
        for (i, j), c in self.terms.items():
            total = total + (ap[i] * bp[j] * dp[k - i - j]) * c
        return total

    # -- printing -------------------------------------------------------
    def to_str(self, names: tuple[str, str] = ("x", "y")) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (i, j) in sorted(self.terms, reverse=True):
            c = self.terms[(i, j)]
            mono = []
            if i:
                mono.append(names[0] if i == 1 else f"{names[0]}^{i}")
            if j:
                mono.append(names[1] if j == 1 else f"{names[1]}^{j}")
            cs = _coeff_str(c)
            neg = cs.startswith("-")
            if neg:
                cs = cs[1:]
            if mono:
                body = "*".join(mono) if cs == "1" else "*".join([cs] + mono)
            else:
                body = cs
            parts.append(("-" if neg else "+", body))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sgn, body in parts[1:]:
            out += f" {sgn} {body}"
        return out

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"Poly2({self.to_str()})"


def _coeff_str(c) -> str:
    if isinstance(c, Fraction):
        if c.denominator == 1:
            return str(c.numerator)
        if c.numerator < 0:
            return f"-({-c.numerator}/{c.denominator})"
        return f"({c.numerator}/{c.denominator})"
    if isinstance(c, QuadExt):
        return "(" + f"{_coeff_str(c.a)}+{_coeff_str(c.b)}*sqrt({_coeff_str(c.r)})" + ")"
    return repr(c)


def _powers(v, n: int, one=None):
    if one is None:
        one = Fraction(1) if _is_exact_coeff(v) else 1.0
    out = [one]
    for _ in range(n):
        out.append(out[-1] * v)
    return out


# ---------------------------------------------------------------------------
# univariate helpers over a field: polynomials as coefficient lists, low first
# ---------------------------------------------------------------------------

def u_trim(p: list) -> list:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def u_add(p: list, q: list) -> list:
    n = max(len(p), len(q))
    return u_trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def u_neg(p: list) -> list:
    return [-c for c in p]


def u_sub(p: list, q: list) -> list:
    return u_add(p, u_neg(q))


def u_mul(p: list, q: list) -> list:
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return u_trim(out)


def u_scale(p: list, c) -> list:
    return u_trim([a * c for a in p])


def u_divmod(p: list, q: list) -> tuple[list, list]:
    q = u_trim(q)
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    r = u_trim(p)
    dq = len(q) - 1
    lc = q[-1]
    quo = [Fraction(0)] * max(len(r) - dq, 0)
    while r and len(r) - 1 >= dq:
        k = len(r) - 1 - dq
        f = r[-1] / lc
        quo[k] = f
        for i, c in enumerate(q):
            r[i + k] = r[i + k] - f * c
        r = u_trim(r[:-1] if r[-1] == 0 else r)
    return u_trim(quo), r


def u_monic(p: list) -> list:
    p = u_trim(p)
    if not p:
        return p
    lc = p[-1]
    return [c / lc for c in p]


def u_gcd(p: list, q: list) -> list:
    a, b = u_trim(p), u_trim(q)
    while b:
        _, r = u_divmod(a, b)
        a, b = b, r
    return u_monic(a)


def u_eval(p: list, t):
    acc = 0
    for c in reversed(p):
        acc = acc * t + c
    return acc


def u_deriv(p: list) -> list:
    return u_trim([c * i for i, c in enumerate(p)][1:])


# ---------------------------------------------------------------------------
# bivariate gcd: recursive view K[y][x], primitive polynomial remainder sequence
# ---------------------------------------------------------------------------

def _to_rec(p: Poly2) -> dict[int, list]:
    """x-degree -> univariate coefficient list in y."""
    rec: dict[int, list] = {}
    for (i, j), c in p.terms.items():
        row = rec.setdefault(i, [])
        if len(row) <= j:
            row.extend([Fraction(0)] * (j + 1 - len(row)))
        row[j] = c
    return {i: u_trim(r) for i, r in rec.items() if u_trim(r)}


def _from_rec(rec: dict[int, list]) -> Poly2:
    t = {}
    for i, row in rec.items():
        for j, c in enumerate(row):
            if c != 0:
                t[(i, j)] = c
    return Poly2(t)


def _rec_deg(rec: dict[int, list]) -> int:
    return max(rec) if rec else -1


def _rec_content(rec: dict[int, list]) -> list:
    g: list = []
    for row in rec.values():
        g = u_gcd(g, row) if g else u_monic(row)
        if len(g) == 1:
            break
    return g


def _rec_div_content(rec: dict[int, list], c: list) -> dict[int, list]:
    out = {}
    for i, row in rec.items():
        q, r = u_divmod(row, c)
        if r:
            raise ArithmeticError("content does not divide")
        out[i] = q
    return out


def _rec_prem(a: dict[int, list], b: dict[int, list]) -> dict[int, list]:
    db = _rec_deg(b)
    lcb = b[db]
    r = dict(a)
    while r and _rec_deg(r) >= db:
        dr = _rec_deg(r)
        lcr = r[dr]
        shift = dr - db
        new: dict[int, list] = {}
        for i, row in r.items():
            new[i] = u_mul(row, lcb)
        for i, row in b.items():
            k = i + shift
            new[k] = u_sub(new.get(k, []), u_mul(row, lcr))
        r = {i: row for i, row in new.items() if row}
    return r


def _primitive(rec):
    if not rec:
        return rec, []
    c = _rec_content(rec)
    return _rec_div_content(rec, c), c


def poly_gcd2(p: Poly2, q: Poly2) -> Poly2:
    """Greatest common divisor of two bivariate polynomials over an exact field.

    The result is monic in lexicographic (x > y) order, so its leading
    coefficient is 1.
    """
    if p.is_zero() and q.is_zero():
        raise ValueError("gcd(0, 0) is undefined")
    if not (p.is_exact() and q.is_exact()):
        raise TypeError("gcd needs exact coefficients")
    if p.is_zero():
        return normalize_monic(q)
    if q.is_zero():
        return normalize_monic(p)
    a, ca = _primitive(_to_rec(p))
    b, cb = _primitive(_to_rec(q))
    content = u_gcd(ca, cb)
    if _rec_deg(a) < _rec_deg(b):
        a, b = b, a
    while b and _rec_deg(b) > 0:
        r = _rec_prem(a, b)
        a = b
        b, _ = _primitive(r)
    if b:
        # b is a nonzero polynomial in y only; with a primitive, the x-part is 1
        g = {0: [Fraction(1)]}
    else:
        g = a
    g, _ = _primitive(g)
    result = _from_rec(g) * _from_rec({0: content})
    return normalize_monic(result)


def normalize_monic(p: Poly2) -> Poly2:
    if p.is_zero():
        return p
    _, lc = p.leading_term()
    return p * (1 / lc) if lc != 1 else p


def poly_divide_exact(p: Poly2, q: Poly2) -> Poly2:
    """p / q when q divides p; raises ArithmeticError otherwise."""
    if q.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    quo = Poly2()
    r = p
    (qi, qj), qc = q.leading_term()
    while not r.is_zero():
        (ri, rj), rc = r.leading_term()
        if ri < qi or rj < qj:
            raise ArithmeticError("polynomial does not divide exactly")
        m = Poly2({(ri - qi, rj - qj): rc / qc})
        quo = quo + m
        r = r - m * q
    return quo


def poly_from_terms(items: Iterable[tuple[int, int, object]]) -> Poly2:
    t: dict[Key, object] = {}
    for i, j, c in items:
        t[(i, j)] = t.get((i, j), 0) + c
    return Poly2(t)
