"""Checks of first integrals, Lie symmetries, invariant measures, commutation
and functional independence.

Exact mode decides polynomial identities on a degree-bounded grid, so a
"holds" verdict there is a proof and a "fails" verdict comes with a rational
witness.  Numeric mode samples a seeded box and applies a tolerance.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .expr import Expr, compile_float
from .khk import PolyVectorField
from .pit import LazyMap, LazyPoly, find_nonzero, homog_compose
from .poly import Poly2
from .rational import RationalFn2, RationalMap2, expr_to_rationalfn

SEED = 0x4B484B
NUMERIC_SAMPLES = 100


@dataclass(frozen=True)
class CheckResult:
    claim: str
    mode: str  # exact | numeric
    verdict: str  # holds | fails
    witness: tuple | None = None
    residual: object = 0
    samples: int = 0

    @property
    def holds(self) -> bool:
        return self.verdict == "holds"

    def to_json(self) -> str:
        d = asdict(self)
        d["witness"] = None if self.witness is None else [_jsonable(v) for v in self.witness]
        d["residual"] = _jsonable(self.residual)
        return json.dumps(d)


def _jsonable(v):
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, int):
        return v
    if isinstance(v, float):
        return v if math.isfinite(v) else str(v)
    return str(v)


def write_report(results: Iterable[CheckResult], stream) -> None:
    for r in results:
        stream.write(r.to_json() + "\n")


def _verdict(ok: bool) -> str:
    return "holds" if ok else "fails"


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def domain_samples(n: int = NUMERIC_SAMPLES, center=(0.0, 0.0), half: float = 0.9,
                   accept: Callable | None = None, seed: int = SEED, max_tries: int = 100000):
    """n seeded points of the box center +- half that pass `accept`."""
    rng = random.Random(seed)
    out = []
    tries = 0
    while len(out) < n:
        tries += 1
        if tries > max_tries:
            raise ValueError("sampling domain appears empty")
        p = (center[0] + rng.uniform(-half, half), center[1] + rng.uniform(-half, half))
        if accept is None or accept(*p):
            out.append(p)
    return out


# sampling boxes (center, half-width) around the relevant center; the radical
# linearizations are kept well inside their guards
SAMPLING_BOXES = {
    "petrera_suris": ((1.0, 1.0), 0.9),
    "S3": ((0.0, 0.0), 0.3),
    "S4": ((0.0, 0.0), 0.25),
    "S2star": ((0.0, 0.0), 0.5),
}


def sampling_box(name: str):
    return SAMPLING_BOXES.get(name, ((0.0, 0.0), 0.9))


def samples_for(entry, mp, n: int = NUMERIC_SAMPLES, seed: int = SEED):
    """Seeded points in the system's sampling box where the map (and the
    linearization, if any) is defined."""
    lin = entry.linearization
    f = _evaluator(mp)

    def accept(x, y):
        if lin is not None and not lin.in_domain(x, y):
            return False
        try:
            f(x, y)
            return True
        except (ZeroDivisionError, ValueError):
            return False
    center, half = sampling_box(entry.name)
    return domain_samples(n, center=center, half=half, accept=accept, seed=seed)


def _evaluator(mp) -> Callable:
    if isinstance(mp, RationalMap2):
        return mp.evaluate
    return mp


def _ok_sample(f, *args):
    try:
        return f(*args)
    except (ZeroDivisionError, ValueError, OverflowError):
        return None


# ---------------------------------------------------------------------------
# first integrals
# ---------------------------------------------------------------------------

def _as_rfn(h, eps=None) -> RationalFn2:
    if isinstance(h, RationalFn2):
        return h
    if isinstance(h, Poly2):
        return RationalFn2.from_poly(h)
    env = {} if eps is None else {"eps": eps}
    return expr_to_rationalfn(h, env)


def first_integral_discrete(H, mp, claim: str = "first integral", samples: Sequence | None = None,
                            tol: float = 1e-10) -> CheckResult:
    """Is H o map = H?"""
    H = _as_rfn(H)
    if isinstance(mp, RationalMap2) and mp.is_exact() and H.is_exact():
        lm = LazyMap.of(mp)
        num, den = lm.pull_fn(H)
        diff = num * LazyPoly.of(H.den) - LazyPoly.of(H.num) * den
        w = find_nonzero(diff, avoid=(lm.d, den, LazyPoly.of(H.den)))
        if w is None:
            return CheckResult(claim, "exact", "holds", None, 0, 0)
        try:
            res = H.evaluate(*mp.evaluate(*w)) - H.evaluate(*w)
        except ZeroDivisionError:
            res = "pole"
        return CheckResult(claim, "exact", "fails", w, res, 0)
    f = _evaluator(mp)
    pts = samples if samples is not None else domain_samples()
    worst, wit, used = 0.0, None, 0
    for x, y in pts:
        img = _ok_sample(f, x, y)
        if img is None:
            continue
        a = _ok_sample(H.evaluate, *img)
        b = _ok_sample(H.evaluate, x, y)
        if a is None or b is None:
            continue
        used += 1
        r = abs(float(a) - float(b)) / (1 + abs(float(b)))
        if r > worst:
            worst, wit = r, (x, y)
    ok = worst < tol
    return CheckResult(claim, "numeric", _verdict(ok), None if ok else wit, worst, used)


# ---------------------------------------------------------------------------
# Lie symmetries
# ---------------------------------------------------------------------------

def _lie_exact(field: PolyVectorField, mp: RationalMap2, claim: str) -> CheckResult:
    n1, n2, d = mp.common_form()
    k = field.degree
    N1, N2, D = LazyPoly.of(n1), LazyPoly.of(n2), LazyPoly.of(d)
    P, Q = LazyPoly.of(field.px), LazyPoly.of(field.py)
    Dx, Dy = LazyPoly.of(d.diff_x()), LazyPoly.of(d.diff_y())
    D2 = D * D
    Dk = D ** k
    rows = []
    for N, n in ((N1, n1), (N2, n2)):
        Nx, Ny = LazyPoly.of(n.diff_x()), LazyPoly.of(n.diff_y())
        rhs = Dk * ((Nx * D - N * Dx) * P + (Ny * D - N * Dy) * Q)
        rows.append(rhs)
    lhs1 = homog_compose(field.px, N1, N2, D, k) * D2
    lhs2 = homog_compose(field.py, N1, N2, D, k) * D2
    for lhs, rhs in ((lhs1, rows[0]), (lhs2, rows[1])):
        w = find_nonzero(lhs - rhs, avoid=(D,))
        if w is not None:
            res = _lie_residual_exact(field, mp, w)
            return CheckResult(claim, "exact", "fails", w, res, 0)
    return CheckResult(claim, "exact", "holds", None, 0, 0)


def _lie_residual_exact(field, mp, w):
    try:
        img = mp.evaluate(*w)
        (a, b), (c, e) = mp.jacobian()
        X = field.evaluate(*w)
        lhs = field.evaluate(*img)
        rhs = (a.evaluate(*w) * X[0] + b.evaluate(*w) * X[1], c.evaluate(*w) * X[0] + e.evaluate(*w) * X[1])
        return max(abs(lhs[0] - rhs[0]), abs(lhs[1] - rhs[1]))
    except ZeroDivisionError:
        return "pole"


def numeric_jacobian(f: Callable, x: float, y: float, step: float = 1e-6):
    """Central differences with one Richardson step."""
    def cd(h):
        fxp = f(x + h, y)
        fxm = f(x - h, y)
        fyp = f(x, y + h)
        fym = f(x, y - h)
        return [[(fxp[i] - fxm[i]) / (2 * h), (fyp[i] - fym[i]) / (2 * h)] for i in range(2)]
    j1 = cd(step)
    j2 = cd(step / 2)
    return [[(4 * j2[i][k] - j1[i][k]) / 3 for k in range(2)] for i in range(2)]


def float_jacobian(mp: RationalMap2) -> Callable:
    """Analytic Jacobian of a rational map, evaluated in floating point."""
    parts = [[(c.num.to_float(), c.den.to_float()) for c in row] for row in mp.jacobian()]

    def J(x, y):
        return [[n.evaluate(x, y) / d.evaluate(x, y) for n, d in row] for row in parts]
    return J


def _jacobian_for(mp) -> Callable:
    if isinstance(mp, RationalMap2):
        return float_jacobian(mp)
    if callable(getattr(mp, "jacobian", None)):
        return mp.jacobian
    return lambda x, y: numeric_jacobian(mp, x, y)


def _lie_numeric(X: Callable, f: Callable, claim: str, samples, tol: float,
                 jac: Callable | None = None) -> CheckResult:
    jac = jac or (lambda x, y: numeric_jacobian(f, x, y))
    worst, wit, used = 0.0, None, 0
    for x, y in samples:
        try:
            img = f(x, y)
            lhs = X(*img)
            J = jac(x, y)
            v = X(x, y)
        except (ZeroDivisionError, ValueError, OverflowError):
            continue
        used += 1
        for i in range(2):
            rhs = J[i][0] * v[0] + J[i][1] * v[1]
            r = abs(lhs[i] - rhs) / (1 + abs(lhs[i]))
            if r > worst:
                worst, wit = r, (x, y)
    if used == 0:
        raise ValueError("no admissible sample points")
    ok = worst < tol
    return CheckResult(claim, "numeric", _verdict(ok), None if ok else wit, worst, used)


def lie_symmetry(field, mp, claim: str = "Lie symmetry", samples: Sequence | None = None,
                 tol: float = 1e-7) -> CheckResult:
    """X(F(p)) = DF(p) X(p): exactly for polynomial fields and exact rational
    maps, numerically otherwise.  The numeric Jacobian is analytic when the map
    provides one and a finite difference as a last resort."""
    if isinstance(field, PolyVectorField) and isinstance(mp, RationalMap2) and mp.is_exact() \
            and field.px.is_exact() and field.py.is_exact():
        return _lie_exact(field, mp, claim)
    if isinstance(field, PolyVectorField):
        fpx, fpy = field.px.to_float(), field.py.to_float()

        def X(x, y):
            return fpx.evaluate(x, y), fpy.evaluate(x, y)
    else:
        X = field
    f = mp.float_evaluator() if isinstance(mp, RationalMap2) else mp
    pts = samples if samples is not None else domain_samples()
    return _lie_numeric(X, f, claim, pts, tol, _jacobian_for(mp))


def lie_symmetry_radical(field_exprs: Sequence[Expr], mp, eps, claim: str = "radical Lie symmetry",
                         samples: Sequence | None = None, tol: float = 1e-8,
                         center=(1.0, 1.0), half: float = 0.9) -> CheckResult:
    """Numeric compatibility check for a field given by expressions with sqrt."""
    gx = compile_float(field_exprs[0], ("x", "y", "eps"))
    gy = compile_float(field_exprs[1], ("x", "y", "eps"))
    e = float(eps)

    def X(x, y):
        return gx(x, y, e), gy(x, y, e)

    f = mp.float_evaluator() if isinstance(mp, RationalMap2) else mp

    def admissible(x, y):
        try:
            X(x, y)
            X(*f(x, y))
            return True
        except (ZeroDivisionError, ValueError, OverflowError):
            return False
    pts = samples if samples is not None else domain_samples(center=center, half=half, accept=admissible)
    return _lie_numeric(X, f, claim, pts, tol, _jacobian_for(mp))


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------

def _jac_numerator(n1: Poly2, n2: Poly2, d: Poly2) -> LazyPoly:
    """J with det DF = J / d^4 for F = (n1/d, n2/d)."""
    D = LazyPoly.of(d)
    Dx, Dy = LazyPoly.of(d.diff_x()), LazyPoly.of(d.diff_y())
    N1, N2 = LazyPoly.of(n1), LazyPoly.of(n2)
    a = LazyPoly.of(n1.diff_x()) * D - N1 * Dx
    b = LazyPoly.of(n1.diff_y()) * D - N1 * Dy
    c = LazyPoly.of(n2.diff_x()) * D - N2 * Dx
    e = LazyPoly.of(n2.diff_y()) * D - N2 * Dy
    return a * e - b * c


def measure_preserved(density, mp, claim: str = "invariant measure", samples: Sequence | None = None,
                      tol: float = 1e-10, eps=None) -> CheckResult:
    """|det DF| nu(F) = nu, checked in the squared form for exact data."""
    nu = _as_rfn(density, eps)
    if isinstance(mp, RationalMap2) and mp.is_exact() and nu.is_exact():
        n1, n2, d = mp.common_form()
        lm = LazyMap.of(mp)
        nh, dh = lm.pull_fn(nu)
        J = _jac_numerator(n1, n2, d)
        D = LazyPoly.of(d)
        n, dd = LazyPoly.of(nu.num), LazyPoly.of(nu.den)
        diff = J * J * nh * nh * dd * dd - (D ** 8) * dh * dh * n * n
        w = find_nonzero(diff, avoid=(D, dh, n, dd))
        if w is None:
            return CheckResult(claim, "exact", "holds", None, 0, 0)
        return CheckResult(claim, "exact", "fails", w, _measure_residual(nu, mp, w), 0)
    f = _evaluator(mp)
    pts = samples if samples is not None else domain_samples()
    fnu = nu.num.to_float(), nu.den.to_float()

    def nuf(x, y):
        return fnu[0].evaluate(x, y) / fnu[1].evaluate(x, y)
    worst, wit, used = 0.0, None, 0
    jac = _jacobian_for(mp)
    for x, y in pts:
        try:
            J = jac(x, y)
            det = J[0][0] * J[1][1] - J[0][1] * J[1][0]
            r = abs(abs(det) * nuf(*f(x, y)) - abs(nuf(x, y))) / (1 + abs(nuf(x, y)))
        except (ZeroDivisionError, ValueError, OverflowError):
            continue
        used += 1
        if r > worst:
            worst, wit = r, (x, y)
    if used == 0:
        raise ValueError("density undefined at every sample")
    ok = worst < tol
    return CheckResult(claim, "numeric", _verdict(ok), None if ok else wit, worst, used)


def _measure_residual(nu: RationalFn2, mp: RationalMap2, w):
    try:
        (a, b), (c, e) = mp.jacobian()
        det = a.evaluate(*w) * e.evaluate(*w) - b.evaluate(*w) * c.evaluate(*w)
        lhs = det * det * nu.evaluate(*mp.evaluate(*w)) ** 2
        return lhs - nu.evaluate(*w) ** 2
    except ZeroDivisionError:
        return "pole"


# ---------------------------------------------------------------------------
# commutation and independence
# ---------------------------------------------------------------------------

def commute(f: RationalMap2, g: RationalMap2, claim: str = "commutation") -> CheckResult:
    """f o g = g o f as rational maps."""
    fg = LazyMap.of(g).then(f)
    gf = LazyMap.of(f).then(g)
    e1 = fg.a * gf.d - gf.a * fg.d
    e2 = fg.b * gf.d - gf.b * fg.d
    avoid = (fg.d, gf.d, LazyPoly.of(f.common_form()[2]), LazyPoly.of(g.common_form()[2]))
    for e in (e1, e2):
        w = find_nonzero(e, avoid=avoid)
        if w is not None:
            try:
                p = f.evaluate(*g.evaluate(*w))
                q = g.evaluate(*f.evaluate(*w))
                res = max(abs(p[0] - q[0]), abs(p[1] - q[1]))
            except ZeroDivisionError:
                res = "pole"
            return CheckResult(claim, "exact", "fails", w, res, 0)
    return CheckResult(claim, "exact", "holds", None, 0, 0)


def gradient_determinant(H: RationalFn2, V: RationalFn2) -> LazyPoly:
    """Numerator of det(grad H, grad V)."""
    def parts(F):
        n, d = F.num, F.den
        N, D = LazyPoly.of(n), LazyPoly.of(d)
        gx = LazyPoly.of(n.diff_x()) * D - N * LazyPoly.of(d.diff_x())
        gy = LazyPoly.of(n.diff_y()) * D - N * LazyPoly.of(d.diff_y())
        return gx, gy
    hx, hy = parts(H)
    vx, vy = parts(V)
    return hx * vy - hy * vx


def functionally_independent(H, V, claim: str = "functional independence") -> CheckResult:
    H, V = _as_rfn(H), _as_rfn(V)
    det = gradient_determinant(H, V)
    w = find_nonzero(det, avoid=(LazyPoly.of(H.den), LazyPoly.of(V.den)))
    if w is None:
        # the determinant vanishes on the whole grid; any grid point is a witness
        w = (Fraction(1), Fraction(1))
        return CheckResult(claim, "exact", "fails", w, 0, 0)
    return CheckResult(claim, "exact", "holds", w, det.value(w), 0)
