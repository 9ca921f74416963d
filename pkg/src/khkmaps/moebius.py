"""Moebius transformations of the extended real line.

Points of R u {inf} are handled projectively as pairs (t1, t0) standing for
t1/t0, so infinity is (1, 0) and fitting and iteration never divide by zero.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .radicals import exact_sqrt, is_exact
from .rational import PoleError, RationalMap2

INF = float("inf")


class MoebiusError(ValueError):
    pass


class CurveNotPreservedError(MoebiusError):
    pass


def _is_inf(t) -> bool:
    return isinstance(t, float) and math.isinf(t)


def _homog(t):
    if _is_inf(t):
        return (Fraction(1), Fraction(0))
    if isinstance(t, tuple):
        return t
    if isinstance(t, int):
        t = Fraction(t)
    return (t, Fraction(1) if is_exact(t) else 1.0)


def _dehomog(p):
    t1, t0 = p
    if t0 == 0:
        return INF
    return t1 / t0


class MoebiusTransform:
    """t -> (a t + b)/(c t + d), stored with c = 1 (or a = 1 when c = 0)."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d, normalize: bool = True):
        a, b, c, d = (Fraction(v) if isinstance(v, int) else v for v in (a, b, c, d))
        if a * d - b * c == 0:
            raise MoebiusError("singular Moebius matrix (ad - bc = 0)")
        if normalize:
            s = c if c != 0 else a
            if s != 1:
                a, b, c, d = a / s, b / s, c / s, d / s
        self.a, self.b, self.c, self.d = a, b, c, d

    @classmethod
    def identity(cls) -> "MoebiusTransform":
        return cls(1, 0, 0, 1)

    def coefficients(self):
        return self.a, self.b, self.c, self.d

    def is_exact(self) -> bool:
        return all(is_exact(v) for v in self.coefficients())

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    @property
    def trace(self):
        return self.a + self.d

    @property
    def delta(self):
        return (self.d - self.a) ** 2 + 4 * self.b * self.c

    def apply_h(self, p):
        t1, t0 = p
        return (self.a * t1 + self.b * t0, self.c * t1 + self.d * t0)

    def __call__(self, t):
        return _dehomog(self.apply_h(_homog(t)))

    def compose(self, other: "MoebiusTransform") -> "MoebiusTransform":
        """self o other."""
        a, b, c, d = self.coefficients()
        e, f, g, h = other.coefficients()
        return MoebiusTransform(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    def matrix_power(self, n: int):
        """The n-th power of [[a, b], [c, d]] as a tuple (a, b, c, d), unnormalized."""
        result = (1, 0, 0, 1)
        base = self.coefficients()
        while n:
            if n & 1:
                result = _mat_mul(result, base)
            base = _mat_mul(base, base)
            n >>= 1
        return result

    def derivative(self, t):
        if _is_inf(t):
            # in the chart s = 1/t around infinity
            if self.c != 0:
                raise MoebiusError("infinity is not fixed")
            return self.d / self.a
        den = self.c * t + self.d
        return self.det / (den * den)

    def inverse(self) -> "MoebiusTransform":
        return MoebiusTransform(self.d, -self.b, -self.c, self.a)

    def __repr__(self):
        return f"MoebiusTransform(a={self.a}, b={self.b}, c={self.c}, d={self.d})"


def discriminant(a, b, c, d):
    """(d - a)^2 + 4bc of an unnormalized matrix; it scales with the square of the matrix."""
    return (d - a) ** 2 + 4 * b * c


def _mat_mul(m, n):
    a, b, c, d = m
    e, f, g, h = n
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


@dataclass
class MoebiusClass:
    delta: object
    xi: complex
    kind: str
    rotation_number: float | None
    fixed_points: list
    stability: list  # one of attractor / repellor / neutral per fixed point


def _sqrt_any(v):
    if is_exact(v):
        try:
            return exact_sqrt(v)
        except TypeError:
            pass  # radical over a radical
    return math.sqrt(float(v))


def _angle(m: MoebiusTransform) -> float:
    """Rotation angle in [0, 2pi) of an elliptic transform."""
    T = float(m.trace)
    s = math.sqrt(-float(m.delta))
    z = complex(T, -s) / complex(T, s)
    ang = cmath.phase(z)
    if ang < 0:
        ang += 2 * math.pi
    if ang >= 2 * math.pi:
        ang -= 2 * math.pi
    return ang


def rotation_number(m: MoebiusTransform) -> float:
    """rho in [0, 1) for a transform with negative discriminant."""
    if m.delta >= 0:
        raise MoebiusError("rotation number needs delta < 0")
    rho = _angle(m) / (2 * math.pi)
    return 0.0 if rho >= 1.0 else rho


def classify(m: MoebiusTransform, tol: float = 0.0) -> MoebiusClass:
    """Dynamics of m on the extended real line.

    tol is an absolute tolerance on delta used only for floating coefficients.
    """
    delta = m.delta
    T = m.trace
    exact = m.is_exact()
    sgn = _tol_sign(delta, 0.0 if exact else tol)
    if sgn < 0:
        rho = rotation_number(m)
        s = math.sqrt(-float(delta))
        xi = complex(float(T), -s) / complex(float(T), s)
        return MoebiusClass(delta, xi, "rotation", rho, [], [])
    if sgn == 0:
        if m.b == 0 and m.c == 0 and m.a == m.d:
            return MoebiusClass(delta, complex(1, 0), "identity", None, [], [])
        if m.c != 0:
            fp = [(m.a - m.d) / (2 * m.c)]
        else:
            fp = [INF]
        return MoebiusClass(delta, complex(1, 0), "parabolic_attractor", None, fp, ["attractor"])
    root = _sqrt_any(delta)
    if _tol_sign(T, 0.0 if exact else tol) == 0:
        xi = complex(-1, 0)
        kind = "involution"
    else:
        xi = complex(float((T + root) / (T - root))) if (T - root) != 0 else complex(INF)
        kind = "hyperbolic"
    if m.c != 0:
        fps = [(m.a - m.d + root) / (2 * m.c), (m.a - m.d - root) / (2 * m.c)]
    else:
        fps = [INF, m.b / (m.d - m.a)]
    stab = []
    for p in fps:
        lam = abs(float(m.derivative(p)))
        if kind == "involution" or abs(lam - 1.0) < 1e-14:
            stab.append("neutral")
        else:
            stab.append("attractor" if lam < 1 else "repellor")
    return MoebiusClass(delta, xi, kind, None, fps, stab)


def _tol_sign(v, tol) -> int:
    if is_exact(v):
        return (v > 0) - (v < 0)
    f = float(v)
    if abs(f) <= tol:
        return 0
    return 1 if f > 0 else -1


def continued_fraction(x: float, max_terms: int = 64) -> list[int]:
    out = []
    for _ in range(max_terms):
        a = math.floor(x)
        out.append(a)
        frac = x - a
        if frac < 1e-15:
            break
        x = 1.0 / frac
    return out


def convergents(x: float, max_den: int = 10 ** 6):
    """Continued-fraction convergents p/q of x with q <= max_den."""
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    for a in continued_fraction(x):
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 > max_den:
            break
        yield Fraction(h1, k1)


def is_scalar_matrix(m, tol: float | None = None) -> bool:
    a, b, c, d = m
    if tol is None:
        return b == 0 and c == 0 and a == d
    scale = max(abs(float(a)), abs(float(d)), 1e-300)
    return abs(float(b)) <= tol * scale and abs(float(c)) <= tol * scale and abs(float(a) - float(d)) <= tol * scale


def detect_rational_rotation(m: MoebiusTransform, max_den: int = 10 ** 6, exact_limit: int = 2000,
                             angle_tol: float = 1e-9):
    """p/q when the rotation number is rational (within the stated tests), else None.

    Candidates are continued-fraction convergents.  With exact coefficients and
    q <= exact_limit a candidate must make the q-th matrix power scalar;
    otherwise |angle*q - 2 pi p| < angle_tol decides.
    """
    rho = rotation_number(m)
    ang = _angle(m)
    if ang == 0.0:
        return Fraction(0)
    for c in convergents(rho, max_den):
        p, q = c.numerator, c.denominator
        if q == 0:
            continue
        if m.is_exact() and q <= exact_limit:
            if is_scalar_matrix(m.matrix_power(q)):
                return Fraction(p % q, q) if q > 1 else Fraction(0)
            continue
        if abs(ang * q - 2 * math.pi * p) < angle_tol:
            return Fraction(p % q, q) if q > 1 else Fraction(0)
    return None


def periodicity_residual(m: MoebiusTransform, q: int) -> float:
    """Relative distance of M^q from a scalar matrix (0 for exact periodicity).

    Floating matrices are scaled to unit |det| first so that high powers do
    not overflow.
    """
    if m.is_exact():
        a, b, c, d = m.matrix_power(q)
        if is_scalar_matrix((a, b, c, d)):
            return 0.0
    else:
        s = math.sqrt(abs(float(m.det)))
        unit = MoebiusTransform(*(float(v) / s for v in m.coefficients()), normalize=False)
        a, b, c, d = unit.matrix_power(q)
    fa, fb, fc, fd = (float(v) for v in (a, b, c, d))
    scale = max(abs(fa), abs(fb), abs(fc), abs(fd), 1e-300)
    return max(abs(fb), abs(fc), abs(fa - fd)) / scale


# ---------------------------------------------------------------------------
# fitting and extraction
# ---------------------------------------------------------------------------

def _det3(r0, r1, r2):
    return (r0[0] * (r1[1] * r2[2] - r1[2] * r2[1])
            - r0[1] * (r1[0] * r2[2] - r1[2] * r2[0])
            + r0[2] * (r1[0] * r2[1] - r1[1] * r2[0]))


def fit_from_triples(pairs: Sequence[tuple]) -> MoebiusTransform:
    """The Moebius map sending three distinct points to three distinct points.

    Each pair is (t, M(t)); either entry may be INF or a homogeneous tuple.
    """
    if len(pairs) != 3:
        raise MoebiusError("need exactly three point pairs")
    rows = []
    for t, s in pairs:
        t1, t0 = _homog(t)
        s1, s0 = _homog(s)
        rows.append((s0 * t1, s0 * t0, -s1 * t1, -s1 * t0))
    # null vector through signed 3x3 minors
    cols = []
    for k in range(4):
        minor = [tuple(r[j] for j in range(4) if j != k) for r in rows]
        cols.append((-1) ** k * _det3(*minor))
    if all(v == 0 for v in cols):
        raise MoebiusError("degenerate configuration: constraint matrix has rank < 3")
    a, b, c, d = cols
    try:
        return MoebiusTransform(a, b, c, d)
    except MoebiusError:
        raise MoebiusError("degenerate configuration: fitted matrix is singular") from None


def _sample_ts(n: int):
    out = []
    k = 0
    while len(out) < n:
        out.append(Fraction(3 * k - 11, 4) + Fraction(1, 13))
        k += 1
    return out


def _close(u, v, tol) -> bool:
    if _is_inf(u) or _is_inf(v):
        return _is_inf(u) and _is_inf(v)
    if is_exact(u) and is_exact(v):
        return u == v
    return abs(float(u) - float(v)) <= tol * (1 + abs(float(v)))


def extract_conjugate(mp: RationalMap2 | Callable, param, validation_samples: int = 20,
                      tol: float = 1e-10, samples: Sequence | None = None) -> MoebiusTransform:
    """M = P^-1 o F o P on the curve of `param`, fitted from three samples and
    checked on `validation_samples` more."""
    evaluate = mp.evaluate if isinstance(mp, RationalMap2) else mp
    curve = param.curve
    pairs = []
    need = 3 + validation_samples
    candidates = list(samples) if samples is not None else _sample_ts(need + 30)
    poles = 0
    for t in candidates:
        if len(pairs) >= need:
            break
        try:
            x, y = param.point(t)
            fx, fy = evaluate(x, y)
            resid = curve.evaluate(fx, fy)
            if is_exact(resid):
                if resid != 0:
                    raise CurveNotPreservedError(f"image of P({t}) leaves the curve (residual {resid})")
            else:
                size = 1 + sum(abs(float(c)) for c in curve.terms.values()) * (1 + abs(float(fx)) + abs(float(fy))) ** curve.degree
                if abs(float(resid)) > tol * size:
                    raise CurveNotPreservedError(f"image of P({t}) leaves the curve (residual {float(resid):.3e})")
            s = param.invert(fx, fy)
        except (PoleError, ZeroDivisionError):
            poles += 1
            continue
        pairs.append((t, s))
    if len(pairs) < 3:
        raise MoebiusError(f"too many samples hit poles ({poles})")
    m = fit_from_triples(pairs[:3])
    for t, s in pairs[3:]:
        if not _close(m(t), s, tol):
            raise MoebiusError(f"Moebius validation failed at t={t}: fitted {m(t)} vs actual {s}")
    return m


def fit_values(m: MoebiusTransform) -> dict:
    cls = classify(m)
    return {
        "a": m.a, "b": m.b, "c": m.c, "d": m.d, "delta": cls.delta, "kind": cls.kind,
        "rotation_number": cls.rotation_number,
    }
