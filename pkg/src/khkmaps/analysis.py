"""Rotation-number profiles, period sets and fixed points for the shipped systems."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Callable

from .fibration import petrera_suris_param
from .khk import build_khk, get_system
from .moebius import (MoebiusTransform, classify, extract_conjugate, periodicity_residual,
                      rotation_number)
from .radicals import exact_sqrt, is_exact

H_LOW = -2.5
H_HIGH = -2.0


class AnalysisError(ValueError):
    pass


@dataclass
class RotationProfile:
    system: str
    eps: object
    domain: tuple
    evaluator: Callable
    monotone: str | None = None  # "increasing" / "decreasing"
    limits: tuple = ()


@dataclass
class PeriodReport:
    period: int
    witnesses: list = field(default_factory=list)
    method: str = ""
    rotation: Fraction | None = None
    residuals: list = field(default_factory=list)


def theta(eps: float, h: float) -> float:
    """arctan(-2 eps sqrt(-4-2h) / (1 + (4+2h) eps^2)) in [-pi/2, pi/2]."""
    eps, h = float(eps), float(h)
    den = 1 + (4 + 2 * h) * eps * eps
    num = -2 * eps * math.sqrt(-4 - 2 * h)
    if den == 0:
        return math.copysign(math.pi / 2, num)
    return math.atan(num / den)


def breakpoint_h(eps) -> float:
    """-(1 + 4 eps^2)/(2 eps^2): where the argument of xi crosses the imaginary axis."""
    e = float(eps)
    return -(1 + 4 * e * e) / (2 * e * e)


def rho_example(eps, h) -> float:
    """Closed-form rotation number on the oval C_h, -5/2 < h < -2."""
    e, hf = float(eps), float(h)
    if e == 0:
        raise AnalysisError("eps must be nonzero")
    if not (H_LOW < hf < H_HIGH):
        raise AnalysisError(f"h={h} outside (-5/2, -2)")
    th = theta(e, hf) / (2 * math.pi)
    if abs(e) <= 1:
        return 1 + th if e > 0 else th
    hb = breakpoint_h(e)
    if hf == hb:
        return 0.75 if e > 0 else 0.25
    if hf < hb:
        return 0.5 + th
    return 1 + th if e > 0 else th


def rho_c(eps) -> float:
    """Limit of the rotation number at h -> -5/2."""
    e = float(eps)
    if e == 0:
        raise AnalysisError("eps must be nonzero")
    z = complex(1 - e * e, -2 * e) / (1 + e * e)
    r = math.atan2(z.imag, z.real) / (2 * math.pi)
    return r + 1 if r < 0 else r


def rho_example_extracted(eps, h) -> float:
    """Rotation number of the Moebius map fitted on C_h (independent of the closed form)."""
    K = build_khk(get_system("petrera_suris"), eps)
    m = extract_conjugate(K.map, petrera_suris_param(eps, h))
    return rotation_number(m)


def rho_example_match(eps, h) -> float:
    return abs(rho_example(eps, h) - rho_example_extracted(eps, h))


def rotation_profile(eps) -> RotationProfile:
    e = float(eps)
    if e == 0:
        raise AnalysisError("eps must be nonzero")
    lim = (rho_c(e), 1.0) if e > 0 else (rho_c(e), 0.0)
    return RotationProfile("petrera_suris", eps, (H_LOW, H_HIGH), lambda h: rho_example(e, h),
                           "increasing" if e > 0 else "decreasing", lim)


def period_bound_from_rho_c(rc: float, increasing: bool = True) -> int:
    """floor(1/w) + 1 where w is the width of the rotation interval."""
    width = 1 - rc if increasing else rc
    if width <= 0:
        raise AnalysisError("degenerate rotation interval")
    return math.floor(1 / width) + 1


def min_period_bound(eps) -> int:
    """Smallest p for which every p >= it is realized on some oval.

    For eps > 0 the rotation interval is (rho_c, 1); for eps < 0 the number
    decreases towards 0 and the interval is (0, rho_c).
    """
    e = float(eps)
    if e == 0:
        raise AnalysisError("eps must be nonzero")
    return period_bound_from_rho_c(rho_c(e), increasing=e > 0)


def _choose_q(p: int, lo: float, hi: float) -> int | None:
    for q in range(1, p):
        if gcd(q, p) == 1 and lo < q / p < hi:
            return q
    return None


def _bisect_h(f: Callable[[float], float], target: float, increasing: bool,
              tol: float = 1e-12) -> float:
    a, b = H_LOW, H_HIGH
    for _ in range(200):
        mid = 0.5 * (a + b)
        if mid in (a, b):
            break
        v = f(mid)
        if abs(v - target) < tol:
            return mid
        if (v < target) == increasing:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def petrera_suris_moebius(eps, h) -> MoebiusTransform:
    K = build_khk(get_system("petrera_suris"), eps)
    return extract_conjugate(K.map, petrera_suris_param(eps, h))


def find_h_for_period(eps, p: int, confirm_tol: float = 1e-8) -> PeriodReport:
    """An energy level in (-5/2, -2) whose oval is filled with p-periodic orbits."""
    e = float(eps)
    if e == 0:
        raise AnalysisError("eps must be nonzero")
    bound = min_period_bound(e)
    if p < bound:
        raise AnalysisError(f"period {p} below the bound {bound} for eps={eps}")
    rc = rho_c(e)
    lo, hi = (rc, 1.0) if e > 0 else (0.0, rc)
    q = _choose_q(p, lo, hi)
    if q is None:
        raise AnalysisError(f"no irreducible q/{p} inside ({lo}, {hi})")
    target = q / p
    h = _bisect_h(lambda x: rho_example(e, x), target, increasing=e > 0)
    m = petrera_suris_moebius(e, h)
    res = periodicity_residual(m, p)
    if res >= confirm_tol:
        raise AnalysisError(f"matrix-power confirmation failed: residual {res:.3e}")
    return PeriodReport(p, [h], "bisection on the closed form + Moebius matrix power",
                        Fraction(q, p), [res])


# ---------------------------------------------------------------------------
# S1
# ---------------------------------------------------------------------------

def s1_rotation(eps, basin: str = "O1") -> float:
    """Rotation number of the KHK map of S1, constant on each basin."""
    e = float(eps)
    if basin not in ("O1", "O2", "line_at_infinity"):
        raise AnalysisError(f"unknown basin {basin!r}")
    if e == 0:
        return 0.0
    plus = math.atan2(2 * e, 1 - e * e) / (2 * math.pi)
    if plus < 0:
        plus += 1.0
    if basin == "O2":
        return 1.0 - plus
    return plus


def _divisors(p: int):
    return [d for d in range(1, p) if p % d == 0]


def s1_period_return(eps, p: int, seeds, tol: float = 1e-9) -> tuple[bool, bool]:
    """(returns after p steps, no proper divisor returns) at every seed, in floats."""
    f = build_khk(get_system("S1"), float(eps)).map.float_evaluator()
    divs = _divisors(p)
    ok, minimal = True, True
    for x0, y0 in seeds:
        x, y = float(x0), float(y0)
        back = {}
        for k in range(1, p + 1):
            x, y = f(x, y)
            back[k] = math.hypot(x - x0, y - y0)
        if back[p] > tol * (1 + math.hypot(x0, y0)):
            ok = False
        if any(back[d] <= tol * (1 + math.hypot(x0, y0)) for d in divs):
            minimal = False
    return ok, minimal


DEFAULT_S1_SEEDS = [(0.3, 0.1), (-0.2, 0.25), (0.7, -0.3), (1.5, 2.0), (-0.4, -0.9)]


def s1_find_eps_for_period(p: int, confirm: bool = True) -> list[float]:
    """Every eps making the S1 map globally p-periodic (sorted)."""
    if p < 1:
        raise AnalysisError("period must be positive")
    if p == 2:
        raise AnalysisError("rotation number 1/2 is not attained: no eps gives period 2")
    if p == 1:
        return [0.0]
    out = []
    for q in range(1, p):
        if gcd(q, p) != 1:
            continue
        r = q / p
        # rho(eps) = atan(eps)/pi for eps > 0 and 1 + atan(eps)/pi for eps < 0
        eps = math.tan(math.pi * r) if r < 0.5 else math.tan(math.pi * (r - 1))
        out.append(eps)
    out.sort()
    if confirm:
        for e in out:
            ok, minimal = s1_period_return(e, p, DEFAULT_S1_SEEDS)
            if not (ok and minimal):
                raise AnalysisError(f"eps={e} failed the {p}-fold return test")
    return out


# ---------------------------------------------------------------------------
# fixed points of the example
# ---------------------------------------------------------------------------

@dataclass
class FixedPoint:
    point: tuple
    multiplier: object
    tag: str


def _det_jacobian(mp, x, y):
    (a, b), (c, d) = mp.jacobian()
    return a.evaluate(x, y) * d.evaluate(x, y) - b.evaluate(x, y) * c.evaluate(x, y)


def example_fixed_points(eps, h) -> list[FixedPoint]:
    """Fixed points (0, 2 +- sqrt(4+2h)) on C_h with stability tags.

    Points on x = 0 are all fixed, so one eigenvalue of the Jacobian is 1 and
    the multiplier along C_h equals the Jacobian determinant.
    """
    exact = is_exact(eps) and is_exact(h)
    if exact:
        eps, h = Fraction(eps), Fraction(h)
    if h < -2:
        raise AnalysisError("fixed points on C_h exist only for h >= -2")
    K = build_khk(get_system("petrera_suris"), eps)
    if h == -2:
        pt = (0 * eps, 2 + 0 * eps)
        return [FixedPoint(pt, _det_jacobian(K.map, *pt), "global_attractor")]
    r = exact_sqrt(4 + 2 * h) if exact else math.sqrt(4 + 2 * float(h))
    out = []
    for sign, label in ((1, "P+"), (-1, "P-")):
        pt = (0 * eps, 2 + sign * r)
        try:
            lam = _det_jacobian(K.map, *pt)
        except ZeroDivisionError:
            # the map is undefined there for this eps
            out.append(FixedPoint(pt, None, "indeterminate"))
            continue
        mag = abs(float(lam))
        tag = "neutral" if mag == 1 else ("attractor" if mag < 1 else "repellor")
        out.append(FixedPoint(pt, lam, tag))
    return out


def classify_example_level(eps, h):
    """Moebius class of the KHK map on C_h."""
    return classify(petrera_suris_moebius(eps, h))
