"""Acceptance criteria 1-10.

Each criterion is evaluated by a function returning (passed, detail).  The
test prints one PASS/FAIL line per criterion.  Criteria 4 and 10 contain
claims that do not hold under exact computation; they are marked xfail
(strict) so a silent "fix" that breaks the mathematics would be noticed.
"""

from __future__ import annotations

import math
import time
from fractions import Fraction as F

import pytest

from khkmaps import analysis, fibration, moebius, orbit, pseudo, verify
from khkmaps.khk import build_khk, get_system
from khkmaps.pit import LazyMap, compose_power, lazy_maps_identical, maps_identical


def _report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\nACCEPTANCE {n}: {'PASS' if ok else 'FAIL'} - {detail}")


# -- 1 ---------------------------------------------------------------------

def criterion_1():
    t0 = time.perf_counter()
    bad = []
    for eps in (F(1, 3), F(1, 2), F(1), F(2), F(-1, 4)):
        s1 = get_system("S1")
        if not maps_identical(build_khk(s1, eps).map, s1.printed_map(eps)):
            bad.append(("S1", eps))
    for name in ("S2", "S3"):
        e = get_system(name)
        for eps in (F(1, 3), F(1, 2), F(-2, 5)):
            if not maps_identical(build_khk(e, eps).map, e.printed_map(eps)):
                bad.append((name, eps))
    dt = time.perf_counter() - t0
    return not bad and dt < 5, f"mismatches={bad} runtime={dt:.2f}s"


# -- 2 ---------------------------------------------------------------------

def criterion_2():
    worst_delta = worst_rho = worst_sym = 0.0
    for eps in (F(1, 2), F(1)):
        for h in (-2.4, -2.2, -2.1):
            m = analysis.petrera_suris_moebius(eps, h)
            worst_delta = max(worst_delta, abs(float(m.delta) - 8 * (h + 2)))
            worst_rho = max(worst_rho, analysis.rho_example_match(eps, h))
            worst_sym = max(worst_sym, abs(analysis.rho_example_extracted(-eps, h)
                                           + analysis.rho_example_extracted(eps, h) - 1))
    # eps = 2: one level on each side of the breakpoint -(1+4 eps^2)/(2 eps^2) = -2.125
    assert analysis.breakpoint_h(2) == pytest.approx(-2.125)
    for h in (-2.3, -2.05):
        worst_rho = max(worst_rho, analysis.rho_example_match(F(2), h))
        worst_sym = max(worst_sym, abs(analysis.rho_example_extracted(F(-2), h)
                                       + analysis.rho_example_extracted(F(2), h) - 1))
    ok = worst_delta < 1e-10 and worst_rho < 1e-9 and worst_sym < 1e-12
    return ok, f"delta err={worst_delta:.1e} rho err={worst_rho:.1e} symmetry err={worst_sym:.1e}"


# -- 3 ---------------------------------------------------------------------

def criterion_3():
    rc = analysis.rho_c(0.01)
    ref = 1 - math.atan(200 / 9999) / (2 * math.pi)
    bound = analysis.min_period_bound(0.01)
    rep = analysis.find_h_for_period(0.01, 315)
    h = rep.witnesses[0]
    m = analysis.petrera_suris_moebius(0.01, h)
    res = moebius.periodicity_residual(m, 315)
    ok = abs(rc - ref) < 1e-6 and bound == 315 and res < 1e-8
    return ok, f"rho_c={rc:.7f} bound={bound} h={h:.8f} residual={res:.1e}"


# -- 4 ---------------------------------------------------------------------

S1_SEEDS_EXACT = [(F(1, 3), F(1, 5)), (F(-2, 7), F(1, 9)), (F(3, 4), F(-1, 3)), (F(5, 2), F(2)),
                  (F(-1, 6), F(-3, 5)), (F(7, 3), F(-11, 4)), (F(1, 10), F(1, 10)),
                  (F(-9, 5), F(4, 7)), (F(2, 9), F(-7, 8)), (F(-3, 2), F(-5, 3))]
LISTED_PERIOD5 = (-1.376381920, -0.7265425284, 0.7265425284, 1.376381920)


def criterion_4():
    parts = []
    ok = True
    for eps in (F(1), F(-1)):
        mp = build_khk(get_system("S1"), eps).map
        same, _ = lazy_maps_identical(compose_power(mp, 4), LazyMap.identity())
        returns = [orbit.iterate(mp, s, 4).detected_period for s in S1_SEEDS_EXACT]
        ok &= same and all(r == 4 for r in returns)
        parts.append(f"eps={eps}: PIT={same} returns={set(returns)}")
    found = analysis.s1_find_eps_for_period(5)
    matched = all(any(abs(f - p) < 1e-8 for f in found) for p in LISTED_PERIOD5) and len(found) == len(LISTED_PERIOD5)
    ok &= matched
    parts.append(f"period-5 eps={[round(v, 10) for v in found]} match={matched}")
    for e in found:
        ret, minimal = analysis.s1_period_return(e, 5, analysis.DEFAULT_S1_SEEDS)
        ok &= ret and minimal
    # the listed +-1.376381920 is tan(3 pi/10): rotation 3/10, period 10
    ret10, min10 = analysis.s1_period_return(math.tan(3 * math.pi / 10), 10, analysis.DEFAULT_S1_SEEDS)
    parts.append(f"tan(3pi/10) has minimal period 10: {ret10 and min10}")
    return ok, "; ".join(parts)


# -- 5 ---------------------------------------------------------------------

def criterion_5():
    mp_levels = {"O1": (F(1, 4), F(1), F(4)), "O2": (F(-4), F(-2), F(-9, 4))}
    worst, count = 0.0, {"O1": 0, "O2": 0}
    for eps in (F(1, 3), F(1), F(3)):
        mp = build_khk(get_system("S1"), eps).map
        for basin, hs in mp_levels.items():
            for h in hs:
                r = moebius.rotation_number(moebius.extract_conjugate(mp, fibration.s1_param(h, basin)))
                worst = max(worst, abs(r - analysis.s1_rotation(eps, basin)))
                count[basin] += 1
    ok = worst < 1e-9 and count == {"O1": 9, "O2": 9}
    return ok, f"extractions={count} worst err={worst:.1e}"


# -- 6 ---------------------------------------------------------------------

def criterion_6():
    s1 = get_system("S1")
    eps = F(1, 3)
    mp = build_khk(s1, eps).map
    results = [
        verify.first_integral_discrete(s1.integral("H1").instantiate(eps), mp, "H1"),
        verify.lie_symmetry(s1.field, mp, "S1 Lie"),
        verify.measure_preserved(s1.measure_density, mp, "measure", eps=eps),
        verify.commute(mp, build_khk(s1.commuting_field, F(1, 5)).map, "commute"),
    ]
    for e in (F(1), F(-1)):
        results.append(verify.first_integral_discrete(s1.integral("V").instantiate(e),
                                                      build_khk(s1, e).map, f"V eps={e}"))
    results.append(verify.functionally_independent(s1.integral("H1").instantiate(F(1)),
                                                   s1.integral("V").instantiate(F(1)), "independence"))
    ok = all(r.mode == "exact" and r.verdict == "holds" for r in results)
    return ok, ", ".join(f"{r.claim}:{r.mode}/{r.verdict}" for r in results)


# -- 7 ---------------------------------------------------------------------

def _rational_witness(r):
    return r.witness is not None and all(isinstance(v, (int, F)) for v in r.witness)


def criterion_7():
    eps = F(1, 2)
    s2, s2s = get_system("S2"), get_system("S2star")
    m2, m2s = build_khk(s2, eps).map, build_khk(s2s, eps).map
    fails = [
        verify.first_integral_discrete(s2.integral("H2").instantiate(eps), m2, "H2 o Phi2"),
        verify.lie_symmetry(s2.field, m2, "S2 Lie"),
        verify.lie_symmetry(s2s.field, m2s, "S2* Lie"),
    ]
    holds = verify.first_integral_discrete(s2s.integral("H2star").instantiate(eps), m2s, "H2* o Phi2*")
    ok = all(r.mode == "exact" and r.verdict == "fails" and _rational_witness(r) for r in fails) \
        and holds.mode == "exact" and holds.verdict == "holds"
    det = ", ".join(f"{r.claim}:{r.verdict}@{tuple(str(v) for v in r.witness or ())}" for r in fails)
    return ok, det + f", {holds.claim}:{holds.verdict}"


# -- 8 ---------------------------------------------------------------------

def criterion_8():
    eps = F(1, 2)
    notes, ok = [], True
    s1 = get_system("S1")
    same = maps_identical(pseudo.build_pseudo(s1, eps).map, build_khk(s1, eps).map)
    ok &= same
    notes.append(f"pseudo S1 = KHK S1: {same}")
    for name, integ in (("S2", "H2"), ("S3", "H3"), ("S4", "H4"), ("S2star", "H2star")):
        e = get_system(name)
        inst = pseudo.build_pseudo(e, eps)
        mp = inst.map if inst.map is not None else inst.evaluator
        pts = verify.samples_for(e, mp)
        r_int = verify.first_integral_discrete(e.integral(integ).instantiate(eps), mp, integ, samples=pts, tol=1e-10)
        r_lie = verify.lie_symmetry(e.field, mp, name, samples=pts)
        want = "exact" if name in ("S2", "S3") else "numeric"
        ok &= r_int.mode == want and r_int.holds and r_lie.mode == want and r_lie.holds
        notes.append(f"{name}: {integ} {r_int.mode}/{r_int.verdict}, Lie {r_lie.mode}/{r_lie.verdict}")
    s2map = pseudo.build_pseudo(get_system("S2"), eps).map
    worst_coef = worst_delta = 0.0
    for h in (F(1, 4), F(1), F(4), F(9)):
        m = moebius.extract_conjugate(s2map, fibration.s2_pseudo_param(h))
        coeffs = pseudo.s2_pseudo_moebius_coefficients(eps, h)
        ref = moebius.MoebiusTransform(*coeffs)
        worst_coef = max(worst_coef, max(abs(float(a) - float(b)) for a, b in
                                         zip(m.coefficients(), ref.coefficients())))
        worst_delta = max(worst_delta, abs(float(moebius.discriminant(*coeffs)) + 4 * float(eps) ** 2))
    ok &= worst_coef < 1e-10 and worst_delta < 1e-10
    notes.append(f"M2 coefficient err={worst_coef:.1e} delta err={worst_delta:.1e}")
    target = pseudo.pseudo_rotation_number(eps)
    rots = [
        moebius.rotation_number(moebius.extract_conjugate(build_khk(s1, eps).map, fibration.s1_param(F(1), "O1"))),
        moebius.rotation_number(moebius.extract_conjugate(s2map, fibration.s2_pseudo_param(F(1)))),
        moebius.rotation_number(moebius.extract_conjugate(pseudo.build_pseudo(get_system("S3"), eps).map,
                                                          fibration.parametrize_s3(F(1)))),
    ]
    # a parametrization may reverse orientation, which sends rho to 1 - rho
    rot_err = max(min(abs(r - target), abs(1 - r - target)) for r in rots)
    ok &= rot_err < 1e-9
    notes.append(f"rotation err={rot_err:.1e}")
    return ok, "; ".join(notes)


# -- 9 ---------------------------------------------------------------------

def criterion_9(tmp_path):
    t0 = time.perf_counter()
    s2 = get_system("S2")
    mp = build_khk(s2, 0.1).map
    seeds = orbit.radial_seed_fan(40)
    paths = [tmp_path / "a.svg", tmp_path / "b.svg"]
    recs = orbit.portrait(mp, seeds, 5000, svg_path=paths[0])
    orbit.portrait(mp, seeds, 5000, svg_path=paths[1])
    finite = all(math.isfinite(c) for r in recs for p in r.points for c in p)
    complete = all(r.length == 5001 for r in recs)
    identical = paths[0].read_bytes() == paths[1].read_bytes()
    H2 = s2.integral("H2").instantiate(0.1)
    drift = max(orbit.energy_drift(H2, r) for r in recs)
    s1 = get_system("S1")
    rec = orbit.iterate(build_khk(s1, F(3, 10)).map, (F(1, 3), F(1, 5)), 200, mode="exact", detect_period=False)
    exact_drift = orbit.energy_drift(s1.integral("H1").instantiate(F(3, 10)), rec)
    dt = time.perf_counter() - t0
    ok = finite and complete and identical and drift > 1e-6 and rec.length == 201 and exact_drift == 0 and dt < 60
    return ok, (f"finite={finite} complete={complete} svg identical={identical} H2 drift={drift:.2e} "
                f"H1 exact drift={exact_drift} ({rec.length - 1} steps) runtime={dt:.1f}s")


# -- 10 --------------------------------------------------------------------

def criterion_10():
    eps = F(1, 2)
    pts = analysis.example_fixed_points(eps, F(-1))
    tags = {fp.tag for fp in pts}
    mags = sorted(abs(float(fp.multiplier)) for fp in pts)
    straddle = mags[0] < 1 < mags[1] and tags == {"attractor", "repellor"}
    plus = next(fp for fp in pts if float(fp.point[1]) > 2)
    ok = straddle and plus.tag == "repellor"
    (single,) = analysis.example_fixed_points(eps, F(-2))
    ok &= single.point == (0, 2) and single.multiplier == 1
    # five seeds on the parabola C_{-2}, then 10^5 floating iterations
    param = fibration.petrera_suris_param(eps, F(-2))
    f = build_khk(get_system("petrera_suris"), 0.5).map.float_evaluator()
    dists = []
    for t in (F(1, 2), F(1), F(2), F(3), F(10)):
        x, y = float(param.p1.evaluate(t, F(0))), float(param.p2.evaluate(t, F(0)))
        for _ in range(100_000):
            x, y = f(x, y)
        dists.append(math.hypot(x, y - 2))
    converged = max(dists) < 1e-6
    ok &= converged
    return ok, (f"h=-1 multipliers={[round(m, 6) for m in mags]} P+ {plus.tag}; h=-2 multiplier={single.multiplier}; "
                f"distance after 1e5 steps={max(dists):.2e}")


EXPECTED_FAIL = {
    4: "the listed +-1.376381920 equals tan(3pi/10), which has period 10, not 5",
    10: "convergence along the parabola is algebraic (distance about 1/(eps n)), so 1e-6 needs ~2e6 steps",
}


@pytest.mark.parametrize("n", range(1, 11))
def test_acceptance_criterion(n, capsys, tmp_path, request):
    if n in EXPECTED_FAIL:
        request.applymarker(pytest.mark.xfail(reason=EXPECTED_FAIL[n], strict=True))
    fn = globals()[f"criterion_{n}"]
    ok, detail = fn(tmp_path) if n == 9 else fn()
    _report(capsys, n, ok, detail)
    assert ok, detail
