"""Command-line interface: ``khkmaps <subcommand> ...``.

Every command prints JSON on stdout.  Exit status is 0 when the requested
object was produced and every requested check holds, 1 otherwise, and 2 for
usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from fractions import Fraction

from . import analysis, fibration, moebius, orbit, pseudo, verify
from .khk import build_khk, builtin_catalog, catalog_load, get_system
from .rational import RationalMap2

_NUM = re.compile(r"^[+-]?(\d+(/\d+)?|\d*\.\d+([eE][+-]?\d+)?|\d+\.?\d*[eE][+-]?\d+)$")
_NEG = re.compile(r"^-(\d|\.\d)")


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(json.dumps({"error": "UsageError", "message": message}))
        self.exit(2)


def parse_scalar(text: str):
    """'1/3' and '2' are exact, '0.333' and '1e-2' are floating."""
    t = text.strip()
    if not _NUM.match(t):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if "." in t or "e" in t.lower():
        return float(t)
    return Fraction(t)


def parse_point(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected x,y but got {text!r}")
    return parse_scalar(parts[0]), parse_scalar(parts[1])


def parse_seed(text: str) -> int:
    return int(text, 0)


def _fix_negative_values(argv):
    """Glue '--h -9/4' into '--h=-9/4' so argparse does not read a flag."""
    out = []
    for tok in argv:
        if out and _NEG.match(tok) and out[-1].startswith("--") and "=" not in out[-1]:
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def _j(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else v.numerator
    if isinstance(v, float):
        return v if v == v and abs(v) != float("inf") else str(v)
    if isinstance(v, (int, str, bool)) or v is None:
        return v
    if isinstance(v, (list, tuple)):
        return [_j(x) for x in v]
    if isinstance(v, dict):
        return {k: _j(x) for k, x in v.items()}
    return str(v)


def _emit(obj, args):
    text = json.dumps(_j(obj), indent=None)
    if getattr(args, "out", None) and args.command not in ("portrait",):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)


def _catalog(args):
    if args.catalog:
        return {e.name: e for e in catalog_load(args.catalog)}
    return builtin_catalog()


def _system(args):
    return get_system(args.system, _catalog(args))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

_PENCILS = {
    "petrera_suris": fibration.PETRERA_SURIS_PENCIL,
    "S1": fibration.S1_PENCIL,
    "S2": fibration.S2_PSEUDO_PENCIL,
}


def cmd_classify(args) -> int:
    pencil = _PENCILS.get(args.system)
    if pencil is None:
        raise CliError(f"no conic pencil for system {args.system!r}")
    eps = args.eps if args.system == "petrera_suris" else None
    if args.system == "petrera_suris" and eps is None:
        raise CliError("--eps is required for petrera_suris")
    c = fibration.classify_conic(pencil, args.h, eps)
    _emit({"system": args.system, "eps": args.eps, "h": args.h, "kind": c.kind,
           "delta2": c.delta2, "delta3": c.delta3}, args)
    return 0


def cmd_rotation(args) -> int:
    sysname = args.system
    out = {"system": sysname, "eps": args.eps}
    if args.eps == 0:
        out.update(rho=0.0, rational="0")
        _emit(out, args)
        return 0
    if sysname == "petrera_suris":
        if args.h is None:
            raise CliError("--h is required for petrera_suris")
        rho = analysis.rho_example(args.eps, args.h)
        m = analysis.petrera_suris_moebius(args.eps, args.h)
        out.update(h=args.h, rho=rho, extracted=moebius.rotation_number(m))
    elif sysname == "S1":
        basin = args.basin or "O1"
        rho = analysis.s1_rotation(args.eps, basin)
        h = Fraction(1) if basin != "O2" else Fraction(-2)
        m = moebius.extract_conjugate(build_khk(_system(args), args.eps).map,
                                      fibration.s1_param(h, "O2" if basin == "O2" else "O1"))
        out.update(basin=basin, rho=rho, extracted=moebius.rotation_number(m))
    elif sysname in ("S2", "S3", "S4", "S2star"):
        rho = pseudo.pseudo_rotation_number(args.eps)
        out.update(rho=rho, map="pseudo-KHK")
        r = _rationality_from_rho(rho)
        out["rational"] = None if r is None else str(r)
        _emit(out, args)
        return 0
    else:
        raise CliError(f"rotation numbers are not available for {sysname!r}")
    r = moebius.detect_rational_rotation(m)
    out["rational"] = None if r is None else str(r)
    _emit(out, args)
    return 0


def _rationality_from_rho(rho: float):
    ang = 2 * math.pi * rho
    for c in moebius.convergents(rho):
        if abs(ang * c.denominator - 2 * math.pi * c.numerator) < 1e-9:
            return Fraction(c.numerator % c.denominator, c.denominator)
    return None


def cmd_find_eps(args) -> int:
    if args.system != "S1":
        raise CliError("find-eps is implemented for S1")
    vals = analysis.s1_find_eps_for_period(args.period)
    _emit({"system": "S1", "period": args.period, "eps": vals}, args)
    return 0


def cmd_find_h(args) -> int:
    if args.system != "petrera_suris":
        raise CliError("find-h is implemented for petrera_suris")
    rep = analysis.find_h_for_period(args.eps, args.period)
    _emit({"system": args.system, "eps": args.eps, "period": rep.period, "h": rep.witnesses,
           "rotation": str(rep.rotation), "residual": rep.residuals, "method": rep.method}, args)
    return 0


def _map_for(entry, eps, use_pseudo: bool):
    if use_pseudo:
        inst = pseudo.build_pseudo(entry, eps)
        return inst.map if inst.map is not None else inst.evaluator
    return build_khk(entry, eps).map


def _integral_for(entry, eps):
    for it in entry.map_integrals:
        if it.applies_to(eps):
            return it
    if entry.first_integrals:
        return entry.first_integrals[0]
    raise CliError(f"{entry.name} has no integral for eps={eps}")


def _samples(entry, args, mp):
    return verify.samples_for(entry, mp, seed=args.seed)


def cmd_verify(args) -> int:
    entry = _system(args)
    eps = args.eps
    mp = _map_for(entry, eps, args.pseudo)
    pts = _samples(entry, args, mp)
    checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    results = []
    for c in checks:
        if c == "integral":
            it = _integral_for(entry, eps)
            results.append(verify.first_integral_discrete(it.instantiate(eps), mp, f"{entry.name}: {it.name} invariant",
                                                          samples=pts, tol=args.tol))
        elif c == "lie":
            if entry.radical_lie_symmetry is not None and not args.pseudo:
                results.append(verify.lie_symmetry_radical(entry.radical_lie_symmetry, mp, eps,
                                                           f"{entry.name}: radical Lie symmetry", samples=pts))
            else:
                results.append(verify.lie_symmetry(entry.field, mp, f"{entry.name}: field is a Lie symmetry",
                                                   samples=pts))
        elif c == "measure":
            if entry.measure_density is None:
                raise CliError(f"{entry.name} has no invariant density")
            results.append(verify.measure_preserved(entry.measure_density, mp, f"{entry.name}: invariant measure",
                                                    samples=pts, tol=args.tol, eps=eps))
        elif c == "commute":
            if entry.commuting_field is None:
                raise CliError(f"{entry.name} has no commuting field")
            other = build_khk(entry.commuting_field, args.delta).map
            results.append(verify.commute(mp, other, f"{entry.name}: commutes with the KHK map of the commuting field"))
        elif c == "independent":
            its = list(entry.first_integrals) + [i for i in entry.map_integrals if i.applies_to(eps)]
            if len(its) < 2:
                raise CliError(f"{entry.name} has fewer than two integrals at eps={eps}")
            results.append(verify.functionally_independent(its[0].instantiate(eps), its[-1].instantiate(eps),
                                                           f"{entry.name}: {its[0].name}, {its[-1].name} independent"))
        else:
            raise CliError(f"unknown check {c!r}")
    lines = [r.to_json() for r in results]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    for ln in lines:
        print(ln)
    return 0 if all(r.holds for r in results) else 1


def cmd_orbit(args) -> int:
    entry = _system(args)
    mp = _map_for(entry, args.eps, args.pseudo)
    exact_inputs = isinstance(args.eps, Fraction) and all(isinstance(v, Fraction) for v in args.start)
    mode = args.mode or ("exact" if exact_inputs and isinstance(mp, RationalMap2) else "floating")
    rec = orbit.iterate(mp, args.start, args.n, mode=mode)
    _emit({"system": entry.name, "eps": args.eps, "mode": mode, "start": args.start, "length": rec.length,
           "detected_period": rec.detected_period, "escaped": rec.escaped, "stop_reason": rec.stop_reason,
           "last": rec.points[-1]}, args)
    return 0


def cmd_portrait(args) -> int:
    entry = _system(args)
    mp = _map_for(entry, float(args.eps), args.pseudo)
    seeds = orbit.radial_seed_fan(args.seeds, tuple(args.center), args.rmin, args.rmax)
    fmt = args.format or "svg"
    if fmt not in ("csv", "svg"):
        raise CliError("portrait supports --format csv or svg")
    if not args.out:
        raise CliError("portrait needs --out")
    kw = {"csv_path": args.out} if fmt == "csv" else {"svg_path": args.out}
    recs = orbit.portrait(mp, seeds, args.iters, **kw)
    print(json.dumps({"system": entry.name, "eps": _j(args.eps), "seeds": len(seeds), "iters": args.iters,
                      "points": sum(r.length for r in recs), "escaped": sum(r.escaped for r in recs),
                      "out": args.out, "format": fmt}))
    return 0


def _moebius_setup(args):
    entry = _system(args)
    eps, h = args.eps, args.h
    if entry.name == "petrera_suris":
        return build_khk(entry, eps).map, fibration.petrera_suris_param(eps, h)
    if entry.name == "S1":
        basin = args.basin or ("O1" if h >= 0 else "O2")
        return build_khk(entry, eps).map, fibration.s1_param(h, basin)
    if entry.name == "S2":
        return pseudo.build_pseudo(entry, eps).map, fibration.s2_pseudo_param(h)
    if entry.name == "S3":
        return pseudo.build_pseudo(entry, eps).map, fibration.parametrize_s3(h)
    raise CliError(f"no shipped parametrization for {entry.name!r}")


def cmd_moebius(args) -> int:
    mp, param = _moebius_setup(args)
    m = moebius.extract_conjugate(mp, param, tol=max(args.tol, 1e-10))
    c = moebius.classify(m)
    out = {"system": args.system, "eps": args.eps, "h": args.h, "a": m.a, "b": m.b, "c": m.c, "d": m.d,
           "delta": c.delta, "kind": c.kind, "rho": c.rotation_number, "fixed_points": c.fixed_points,
           "stability": c.stability}
    if c.kind == "rotation":
        r = moebius.detect_rational_rotation(m)
        out["rational"] = None if r is None else str(r)
    _emit(out, args)
    return 0


def cmd_catalog(args) -> int:
    cat = _catalog(args)
    rows = []
    for e in cat.values():
        rows.append({
            "name": e.name,
            "field": [e.field.px.to_str(), e.field.py.to_str()],
            "integrals": [i.name for i in e.first_integrals] + [i.name for i in e.map_integrals],
            "printed_khk": e.printed_khk is not None,
            "linearization": None if e.linearization is None else ("radical" if e.linearization.radical else "rational"),
        })
    _emit({"systems": rows}, args)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="khkmaps", description="Dynamics of Kahan-Hirota-Kimura maps.")
    p.add_argument("--catalog", help="JSON catalog replacing the built-in one")
    p.add_argument("--tol", type=float, default=1e-10, help="numeric tolerance")
    p.add_argument("--seed", type=parse_seed, default=verify.SEED, help="sampling seed (hex accepted)")
    p.add_argument("--out", help="output path")
    p.add_argument("--format", choices=("csv", "svg", "json"))
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, eps=True, h=False, h_required=False):
        sp.add_argument("--system", required=True)
        if eps:
            sp.add_argument("--eps", type=parse_scalar, required=True)
        if h:
            sp.add_argument("--h", type=parse_scalar, required=h_required)
        sp.add_argument("--out", default=argparse.SUPPRESS)
        sp.add_argument("--format", choices=("csv", "svg", "json"), default=argparse.SUPPRESS)
        sp.add_argument("--tol", type=float, default=argparse.SUPPRESS)
        sp.add_argument("--seed", type=parse_seed, default=argparse.SUPPRESS)
        sp.add_argument("--catalog", default=argparse.SUPPRESS)

    sp = sub.add_parser("classify", help="classify a level curve")
    common(sp, eps=False, h=True, h_required=True)
    sp.add_argument("--eps", type=parse_scalar)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("rotation", help="rotation number on a level curve or basin")
    common(sp, h=True)
    sp.add_argument("--basin", choices=("O1", "O2", "line_at_infinity"))
    sp.set_defaults(func=cmd_rotation)

    sp = sub.add_parser("find-eps", help="steps giving global periodicity")
    common(sp, eps=False)
    sp.add_argument("--period", type=int, required=True)
    sp.set_defaults(func=cmd_find_eps)

    sp = sub.add_parser("find-h", help="an energy level filled with p-periodic orbits")
    common(sp)
    sp.add_argument("--period", type=int, required=True)
    sp.set_defaults(func=cmd_find_h)

    sp = sub.add_parser("verify", help="run structural checks")
    common(sp)
    sp.add_argument("--checks", default="integral")
    sp.add_argument("--delta", type=parse_scalar, default=Fraction(1, 5), help="step of the commuting map")
    sp.add_argument("--pseudo", action="store_true", help="check the pseudo-KHK map")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("orbit", help="iterate one orbit")
    common(sp)
    sp.add_argument("--start", type=parse_point, required=True)
    sp.add_argument("--n", type=int, default=100)
    sp.add_argument("--mode", choices=("exact", "floating"))
    sp.add_argument("--pseudo", action="store_true")
    sp.set_defaults(func=cmd_orbit)

    sp = sub.add_parser("portrait", help="orbit cloud from a radial seed fan")
    common(sp)
    sp.add_argument("--seeds", type=int, default=40)
    sp.add_argument("--iters", type=int, default=5000)
    sp.add_argument("--center", type=parse_point, default=(0.0, 0.0))
    sp.add_argument("--rmin", type=float, default=0.02)
    sp.add_argument("--rmax", type=float, default=0.8)
    sp.add_argument("--pseudo", action="store_true")
    sp.set_defaults(func=cmd_portrait)

    sp = sub.add_parser("moebius", help="fit the Moebius conjugate on a level curve")
    common(sp, h=True, h_required=True)
    sp.add_argument("--basin", choices=("O1", "O2"))
    sp.set_defaults(func=cmd_moebius)

    sp = sub.add_parser("catalog", help="list catalog systems")
    sp.add_argument("--catalog", default=argparse.SUPPRESS)
    sp.add_argument("--out", default=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_catalog)
    return p


def main(argv=None) -> int:
    argv = _fix_negative_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as err:  # reported as JSON, never as a traceback
        print(json.dumps({"error": type(err).__name__, "message": str(err)}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
