"""KHK discretization of planar polynomial vector fields, and the system catalog.

For a field X the KHK map with step 2*eps is

    Phi(p) = p + 2 eps (I - eps DX(p))^{-1} X(p),

computed here with the adjugate of I - eps DX so that both components share
the single denominator det(I - eps DX).
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Mapping

from .expr import Expr, parse_expr, to_text
from .poly import Poly2
from .rational import RationalFn2, RationalMap2, expr_to_rationalfn


class CatalogError(ValueError):
    pass


class SingularKhkError(ValueError):
    """det(I - eps DX) vanishes identically."""


class PolyVectorField:
    """X = px d/dx + py d/dy with polynomial components."""

    __slots__ = ("px", "py", "name")

    def __init__(self, px: Poly2, py: Poly2, name: str = ""):
        self.px = px
        self.py = py
        self.name = name

    @property
    def degree(self) -> int:
        return max(self.px.degree, self.py.degree)

    def is_zero(self) -> bool:
        return self.px.is_zero() and self.py.is_zero()

    @classmethod
    def from_exprs(cls, ex: Expr | str, ey: Expr | str, env=None, name: str = "") -> "PolyVectorField":
        from .expr import expr_to_poly

        if isinstance(ex, str):
            ex = parse_expr(ex, {"x", "y"} | set(env or {}))
        if isinstance(ey, str):
            ey = parse_expr(ey, {"x", "y"} | set(env or {}))
        return cls(expr_to_poly(ex, env), expr_to_poly(ey, env), name)

    def evaluate(self, x, y):
        return self.px.evaluate(x, y), self.py.evaluate(x, y)

    __call__ = evaluate

    def perpendicular(self) -> "PolyVectorField":
        """The orthogonal field (py, -px)."""
        return PolyVectorField(self.py, -self.px, self.name + "_perp")

    def __repr__(self):
        return f"PolyVectorField({self.px}, {self.py})"


def jacobian(field: PolyVectorField) -> tuple[tuple[Poly2, Poly2], tuple[Poly2, Poly2]]:
    return ((field.px.diff_x(), field.px.diff_y()),
            (field.py.diff_x(), field.py.diff_y()))


def khk_map(field: PolyVectorField, eps) -> RationalMap2:
    """The KHK map of `field` for step parameter eps (Fraction or float)."""
    if isinstance(eps, int):
        eps = Fraction(eps)
    (a11, a12), (a21, a22) = jacobian(field)
    one = Poly2.one()
    m11 = one - a11 * eps
    m12 = -(a12 * eps)
    m21 = -(a21 * eps)
    m22 = one - a22 * eps
    det = m11 * m22 - m12 * m21
    if det.is_zero():
        raise SingularKhkError("det(I - eps*DX) is identically zero")
    px, py = field.px, field.py
    n1 = Poly2.x() * det + (m22 * px - m12 * py) * (2 * eps)
    n2 = Poly2.y() * det + (m11 * py - m21 * px) * (2 * eps)
    return RationalMap2(RationalFn2(n1, det), RationalFn2(n2, det))


@dataclass(frozen=True)
class NamedIntegral:
    name: str
    expr: Expr
    valid_eps: tuple | None = None  # None means every eps

    def instantiate(self, eps=None) -> RationalFn2:
        env = {} if eps is None else {"eps": _exact(eps)}
        return expr_to_rationalfn(self.expr, env)

    def applies_to(self, eps) -> bool:
        return self.valid_eps is None or any(_exact(eps) == v for v in self.valid_eps)


@dataclass(frozen=True)
class LinearizationPair:
    """Forward map (x, y) -> (u, v) and its inverse, both as expressions."""
    u: Expr
    v: Expr
    inv_x: Expr
    inv_y: Expr
    omega: Fraction
    radical: bool
    guards: tuple = ()  # expressions in x, y that must be > 0

    def forward(self, x, y):
        from .expr import evaluate

        env = {"x": x, "y": y}
        return evaluate(self.u, env), evaluate(self.v, env)

    def backward(self, u, v):
        from .expr import evaluate

        env = {"u": u, "v": v}
        return evaluate(self.inv_x, env), evaluate(self.inv_y, env)

    def in_domain(self, x, y) -> bool:
        from .expr import evaluate_float

        try:
            return all(evaluate_float(g, {"x": x, "y": y}) > 0 for g in self.guards)
        except (ZeroDivisionError, ValueError):
            return False


@dataclass(frozen=True)
class SystemEntry:
    name: str
    field: PolyVectorField
    first_integrals: tuple = ()
    map_integrals: tuple = ()
    printed_khk: tuple | None = None
    printed_pseudo: tuple | None = None
    linearization: LinearizationPair | None = None
    commuting_field: PolyVectorField | None = None
    measure_density: Expr | None = None
    radical_lie_symmetry: tuple | None = None
    integral_range: str = ""
    notes: str = ""
    extra: dict = dc_field(default_factory=dict)

    def integral(self, name: str | None = None) -> NamedIntegral:
        pool = list(self.first_integrals) + list(self.map_integrals)
        if not pool:
            raise KeyError(f"{self.name} has no first integral")
        if name is None:
            return pool[0]
        for it in pool:
            if it.name == name:
                return it
        raise KeyError(f"{self.name} has no integral named {name!r}")

    def printed_map(self, eps) -> RationalMap2:
        if self.printed_khk is None:
            raise KeyError(f"{self.name} has no printed KHK formula")
        env = {"eps": _exact(eps)}
        return RationalMap2(expr_to_rationalfn(self.printed_khk[0], env),
                            expr_to_rationalfn(self.printed_khk[1], env))


class KhkInstance:
    """A KHK map together with its inverse (the KHK map with step -eps)."""

    def __init__(self, system: SystemEntry | None, field: PolyVectorField, eps):
        self.system = system
        self.field = field
        self.eps = eps
        self.map = khk_map(field, eps)
        self.inverse = khk_map(field, -eps)
        # for degree > 2 the construction need not be birational
        self.maybe_not_birational = field.degree > 2

    def __call__(self, x, y):
        return self.map.evaluate(x, y)


def build_khk(field: PolyVectorField | SystemEntry, eps) -> KhkInstance:
    if isinstance(eps, int):
        eps = Fraction(eps)
    if isinstance(field, SystemEntry):
        return KhkInstance(field, field.field, eps)
    return KhkInstance(None, field, eps)


def _exact(v):
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    return v


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

_FIELD_VARS = {"x", "y"}
_MAP_VARS = {"x", "y", "eps"}


def _parse(src, allowed, what, allow_sqrt=False, defs: Mapping[str, Expr] | None = None) -> Expr:
    if not isinstance(src, str):
        raise CatalogError(f"{what}: expected an expression string, got {type(src).__name__}")
    names = set(allowed) | set(defs or {})
    try:
        e = parse_expr(src, names, allow_sqrt=allow_sqrt)
    except ValueError as exc:
        raise CatalogError(f"{what}: {exc}") from None
    if defs:
        e = e.subs(defs)
    return e


def _rational_literal(v, what) -> Fraction:
    try:
        return Fraction(str(v))
    except (ValueError, ZeroDivisionError):
        raise CatalogError(f"{what}: not a rational number: {v!r}") from None


def _check_continuous_integral(field: PolyVectorField, H: RationalFn2) -> bool:
    """grad(H) . X == 0, written over the common denominator."""
    num, den = H.num, H.den
    hx = num.diff_x() * den - num * den.diff_x()
    hy = num.diff_y() * den - num * den.diff_y()
    return (hx * field.px + hy * field.py).is_zero()


def entry_from_dict(d: dict, validate: bool = True) -> SystemEntry:
    if not isinstance(d, dict):
        raise CatalogError("catalog entry must be an object")
    for key in ("name", "components"):
        if key not in d:
            raise CatalogError(f"catalog entry is missing {key!r}")
    name = d["name"]
    comps = d["components"]
    if not isinstance(comps, list) or len(comps) != 2:
        raise CatalogError(f"{name}: components must be a list of two expressions")
    field = PolyVectorField.from_exprs(_parse(comps[0], _FIELD_VARS, f"{name}.components[0]"),
                                       _parse(comps[1], _FIELD_VARS, f"{name}.components[1]"), name=name)

    integrals = []
    for i, fi in enumerate(d.get("first_integrals", [])):
        e = _parse(fi.get("expr"), _FIELD_VARS, f"{name}.first_integrals[{i}]")
        ni = NamedIntegral(fi.get("name", f"H{i}"), e)
        if validate and not _check_continuous_integral(field, ni.instantiate()):
            raise CatalogError(f"{name}: {ni.name} = {to_text(e)} is not a first integral of the field "
                               f"(grad H . X is not identically zero)")
        integrals.append(ni)

    map_integrals = []
    for i, mi in enumerate(d.get("map_integrals", [])):
        e = _parse(mi.get("expr"), _MAP_VARS, f"{name}.map_integrals[{i}]")
        valid = mi.get("valid_eps")
        valid_t = None if valid is None else tuple(_rational_literal(v, f"{name}.valid_eps") for v in valid)
        map_integrals.append(NamedIntegral(mi.get("name", f"V{i}"), e, valid_t))

    printed = None
    if d.get("printed_khk") is not None:
        pk = d["printed_khk"]
        printed = (_parse(pk[0], _MAP_VARS, f"{name}.printed_khk[0]"),
                   _parse(pk[1], _MAP_VARS, f"{name}.printed_khk[1]"))

    printed_pseudo = None
    if d.get("printed_pseudo") is not None:
        pp = d["printed_pseudo"]
        defs = {k: _parse(v, _MAP_VARS, f"{name}.printed_pseudo.defs.{k}", allow_sqrt=True)
                for k, v in pp.get("defs", {}).items()}
        printed_pseudo = tuple(_parse(c, _MAP_VARS, f"{name}.printed_pseudo", allow_sqrt=True, defs=defs)
                               for c in pp["components"])

    lin = None
    if d.get("linearization") is not None:
        ld = d["linearization"]
        radical = bool(ld.get("radical", False))
        try:
            lin = LinearizationPair(
                u=_parse(ld["u"], _FIELD_VARS, f"{name}.linearization.u", radical),
                v=_parse(ld["v"], _FIELD_VARS, f"{name}.linearization.v", radical),
                inv_x=_parse(ld["inv_x"], {"u", "v"}, f"{name}.linearization.inv_x", radical),
                inv_y=_parse(ld["inv_y"], {"u", "v"}, f"{name}.linearization.inv_y", radical),
                omega=_rational_literal(ld.get("omega", 1), f"{name}.linearization.omega"),
                radical=radical,
                guards=tuple(_parse(g, _FIELD_VARS, f"{name}.linearization.guards", True)
                             for g in ld.get("guards", [])),
            )
        except KeyError as exc:
            raise CatalogError(f"{name}: linearization is missing {exc}") from None

    comm = None
    if d.get("commuting_field") is not None:
        cf = d["commuting_field"]
        comm = PolyVectorField.from_exprs(_parse(cf[0], _FIELD_VARS, f"{name}.commuting_field"),
                                          _parse(cf[1], _FIELD_VARS, f"{name}.commuting_field"),
                                          name=f"{name}_comm")

    density = None
    if d.get("measure_density") is not None:
        density = _parse(d["measure_density"], _MAP_VARS, f"{name}.measure_density")

    radical_ls = None
    if d.get("radical_lie_symmetry") is not None:
        rl = d["radical_lie_symmetry"]
        defs = {k: _parse(v, _MAP_VARS, f"{name}.radical_lie_symmetry.defs.{k}", allow_sqrt=True)
                for k, v in rl.get("defs", {}).items()}
        radical_ls = tuple(_parse(c, _MAP_VARS, f"{name}.radical_lie_symmetry", allow_sqrt=True, defs=defs)
                           for c in rl["components"])

    entry = SystemEntry(
        name=name, field=field, first_integrals=tuple(integrals), map_integrals=tuple(map_integrals),
        printed_khk=printed, printed_pseudo=printed_pseudo, linearization=lin, commuting_field=comm,
        measure_density=density, radical_lie_symmetry=radical_ls,
        integral_range=d.get("integral_range", ""), notes=d.get("notes", ""),
        extra={k: v for k, v in d.items() if k.startswith("x_")},
    )
    if validate and printed is not None:
        _cross_check_printed(entry)
    return entry


def _cross_check_printed(entry: SystemEntry, eps=Fraction(1, 3)) -> None:
    from .pit import maps_identical

    if not maps_identical(khk_map(entry.field, eps), entry.printed_map(eps)):
        raise CatalogError(f"{entry.name}: printed KHK formula disagrees with the constructor at eps={eps}")


def catalog_load(source: str | Path | None = None, validate: bool = True) -> list[SystemEntry]:
    """Entries of a catalog file; the built-in catalog when source is None."""
    if source is None:
        text = resources.files("khkmaps").joinpath("data/catalog.json").read_text(encoding="utf-8")
    else:
        text = Path(source).read_text(encoding="utf-8")
    if not text.strip():
        return []
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"catalog is not valid JSON: {exc}") from None
    if isinstance(data, dict):
        data = data.get("systems", [])
    if not isinstance(data, list):
        raise CatalogError("catalog must be a list of entries")
    return [entry_from_dict(d, validate) for d in data]


_BUILTIN: dict[str, SystemEntry] | None = None


def builtin_catalog() -> dict[str, SystemEntry]:
    global _BUILTIN
    if _BUILTIN is None:
        _BUILTIN = {e.name: e for e in catalog_load()}
    return _BUILTIN


def get_system(name: str, catalog: Mapping[str, SystemEntry] | None = None) -> SystemEntry:
    cat = catalog if catalog is not None else builtin_catalog()
    if name not in cat:
        raise KeyError(f"unknown system {name!r}; known: {', '.join(sorted(cat))}")
    return cat[name]


def linear_center_field(omega=1) -> PolyVectorField:
    omega = _exact(omega)
    return PolyVectorField(Poly2({(0, 1): -omega}), Poly2({(1, 0): omega}), name=f"linear_center({omega})")


def warn_if_not_birational(inst: KhkInstance) -> None:
    if inst.maybe_not_birational:
        warnings.warn(f"field of degree {inst.field.degree}: the KHK map need not be birational", stacklevel=2)
