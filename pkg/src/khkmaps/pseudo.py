"""Pseudo-KHK maps: the KHK map of a linear center, carried back through a
linearization of an isochronous center."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Sequence

from .expr import compile_float, diff
from .khk import SystemEntry, _exact
from .pit import maps_identical
from .poly import Poly2
from .radicals import exact_sqrt
from .rational import RationalFn2, RationalMap2, expr_to_rationalfn


class PseudoError(ValueError):
    pass


class DomainError(ValueError):
    """A point falls outside the region where the linearization is defined."""


def linear_center_khk(omega=1, eps=Fraction(1)) -> RationalMap2:
    """KHK map of u' = -omega v, v' = omega u: a rotation, written in (x, y)."""
    omega, eps = _exact(omega), _exact(eps)
    k = eps * omega
    den = k * k + 1
    c = (1 - k * k) / den
    s = 2 * k / den
    x, y = Poly2.x(), Poly2.y()
    return RationalMap2(RationalFn2.from_poly(x * c - y * s), RationalFn2.from_poly(x * s + y * c))


def pseudo_rotation_number(eps) -> float:
    """(1/2pi) arg((1 - eps^2 + 2 i eps)/(1 + eps^2)) in [0, 1)."""
    e = float(eps)
    if e == 0:
        return 0.0
    r = math.atan2(2 * e, 1 - e * e) / (2 * math.pi)
    return r + 1 if r < 0 else r


def s2_pseudo_moebius_coefficients(eps, h):
    """(a, b, c, d) of t -> ((1 - eps s) t + eps)/(-eps (h+1) t + eps s + 1), s = sqrt(h),
    the conjugate of the S2 pseudo-KHK map on H2 = h through the shipped
    parametrization, at its natural scale."""
    eps, h = _exact(eps), _exact(h)
    s = exact_sqrt(h)
    return 1 - eps * s, eps, -eps * (h + 1), eps * s + 1


class PseudoKhkInstance:
    """L^-1 o Phi_L o L for one system and step.

    `map` is the reduced rational map when the linearization is radical-free;
    otherwise only the floating evaluator exists.
    """

    def __init__(self, system: SystemEntry, eps, evaluator: Callable, map: RationalMap2 | None,
                 printed: RationalMap2 | Callable | None):
        self.system = system
        self.eps = eps
        self.evaluator = evaluator
        self.map = map
        self.printed = printed

    @property
    def radical(self) -> bool:
        return self.map is None

    def __call__(self, x, y):
        return self.evaluator(x, y)

    def jacobian(self, x, y):
        """Float Jacobian of the map at (x, y), by the chain rule."""
        if self.map is not None:
            from .verify import float_jacobian
            return float_jacobian(self.map)(x, y)
        return self.evaluator.jacobian(x, y)

    def printed_evaluate(self, x, y):
        if self.printed is None:
            raise PseudoError(f"{self.system.name} has no stored pseudo-KHK formula")
        if isinstance(self.printed, RationalMap2):
            return self.printed.evaluate(x, y)
        return self.printed(x, y)

    def printed_matches(self, samples: Sequence | None = None, tol: float = 1e-10):
        """(agrees, max relative residual).  Exact identity test for rational maps."""
        if self.printed is None:
            raise PseudoError(f"{self.system.name} has no stored pseudo-KHK formula")
        if self.map is not None and isinstance(self.printed, RationalMap2):
            same = maps_identical(self.map, self.printed)
            return same, 0.0 if same else math.inf
        worst = 0.0
        for x, y in samples or ():
            try:
                a = self.evaluator(x, y)
                b = self.printed_evaluate(x, y)
            except (DomainError, ValueError, ZeroDivisionError):
                continue
            for u, v in zip(a, b):
                worst = max(worst, abs(float(u) - float(v)) / (1 + abs(float(v))))
        return worst < tol, worst


def _printed(entry: SystemEntry, eps):
    if entry.printed_pseudo is None:
        return None
    ex, ey = entry.printed_pseudo
    if not (ex.has_sqrt() or ey.has_sqrt()):
        env = {"eps": _exact(eps)}
        return RationalMap2(expr_to_rationalfn(ex, env), expr_to_rationalfn(ey, env))
    fx = compile_float(ex, ("x", "y", "eps"))
    fy = compile_float(ey, ("x", "y", "eps"))
    e = float(eps)

    def f(x, y):
        try:
            return fx(float(x), float(y), e), fy(float(x), float(y), e)
        except ValueError as err:
            raise DomainError(str(err)) from None
    return f


def _jacobian_fns(ex, ey, names):
    return [[compile_float(diff(e, n), names) for n in names] for e in (ex, ey)]


def _numeric_route(lin, rot: RationalMap2, rot_matrix) -> Callable:
    fu = compile_float(lin.u, ("x", "y"))
    fv = compile_float(lin.v, ("x", "y"))
    gx = compile_float(lin.inv_x, ("u", "v"))
    gy = compile_float(lin.inv_y, ("u", "v"))
    rf = rot.float_evaluator()
    dL = _jacobian_fns(lin.u, lin.v, ("x", "y"))
    dG = _jacobian_fns(lin.inv_x, lin.inv_y, ("u", "v"))

    def f(x, y):
        x, y = float(x), float(y)
        if not lin.in_domain(x, y):
            raise DomainError(f"({x}, {y}) violates the linearization domain guard")
        try:
            u, v = rf(fu(x, y), fv(x, y))
            return gx(u, v), gy(u, v)
        except ValueError as err:
            raise DomainError(f"negative radicand at ({x}, {y})") from err

    def jacobian(x, y):
        # chain rule through L, the rotation and L^-1
        x, y = float(x), float(y)
        u, v = fu(x, y), fv(x, y)
        u2, v2 = rf(u, v)
        A = [[g(x, y) for g in row] for row in dL]
        B = [[g(u2, v2) for g in row] for row in dG]
        RA = [[sum(rot_matrix[i][k] * A[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
        return [[sum(B[i][k] * RA[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
    f.jacobian = jacobian
    return f


def check_linearization(system: SystemEntry, samples: Sequence) -> tuple[float, float]:
    """Worst relative residuals of L^-1 o L = id and of DL X = X_L o L on the samples."""
    from .verify import numeric_jacobian

    lin = system.linearization
    if lin is None:
        raise PseudoError(f"{system.name} has no linearization")
    fu = compile_float(lin.u, ("x", "y"))
    fv = compile_float(lin.v, ("x", "y"))
    gx = compile_float(lin.inv_x, ("u", "v"))
    gy = compile_float(lin.inv_y, ("u", "v"))
    P, Q = system.field.px.to_float(), system.field.py.to_float()
    w = float(lin.omega)

    def L(x, y):
        return fu(x, y), fv(x, y)
    trip = conj = 0.0
    for x, y in samples:
        u, v = L(x, y)
        bx, by = gx(u, v), gy(u, v)
        trip = max(trip, abs(bx - x) / (1 + abs(x)), abs(by - y) / (1 + abs(y)))
        J = numeric_jacobian(L, x, y)
        X = (P.evaluate(x, y), Q.evaluate(x, y))
        lhs = (J[0][0] * X[0] + J[0][1] * X[1], J[1][0] * X[0] + J[1][1] * X[1])
        rhs = (-w * v, w * u)
        conj = max(conj, *(abs(a - b) / (1 + abs(b)) for a, b in zip(lhs, rhs)))
    return trip, conj


def build_pseudo(system: SystemEntry, eps) -> PseudoKhkInstance:
    lin = system.linearization
    if lin is None:
        raise PseudoError(f"{system.name} has no linearization")
    eps = _exact(eps)
    rot = linear_center_khk(lin.omega, eps)
    printed = _printed(system, eps)
    if lin.radical:
        k = float(eps * lin.omega)
        c, sn = (1 - k * k) / (1 + k * k), 2 * k / (1 + k * k)
        route = _numeric_route(lin, rot, ((c, -sn), (sn, c)))
        return PseudoKhkInstance(system, eps, route, None, printed)
    L = RationalMap2(expr_to_rationalfn(lin.u, {}), expr_to_rationalfn(lin.v, {}))
    Linv = RationalMap2(expr_to_rationalfn(lin.inv_x, {}, ("u", "v")),
                        expr_to_rationalfn(lin.inv_y, {}, ("u", "v")))
    m = Linv.compose(rot.compose(L))
    return PseudoKhkInstance(system, eps, m.evaluate, m, printed)
