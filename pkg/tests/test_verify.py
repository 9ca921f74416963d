import io
import json
from fractions import Fraction as F

import pytest

from khkmaps import verify
from khkmaps.expr import Expr
from khkmaps.khk import build_khk, get_system
from khkmaps.pseudo import build_pseudo
from khkmaps.rational import RationalFn2, expr_to_rationalfn

S1 = get_system("S1")
PS = get_system("petrera_suris")


def _exact_rational_point(w):
    return w is not None and all(isinstance(v, (int, F)) for v in w)


def test_h1_invariant():
    r = verify.first_integral_discrete(S1.integral("H1").instantiate(0), build_khk(S1, F(1, 3)).map)
    assert (r.mode, r.verdict) == ("exact", "holds")


def test_integral_family_invariant():
    al, be, ga, et = 1, 2, 3, 4
    H = expr_to_rationalfn(f"({al}*(x^2+y^2)+{be}*(2*y+1))/({ga}*(x^2+y^2)+{et}*(2*y+1))")
    r = verify.first_integral_discrete(H, build_khk(S1, F(1, 3)).map)
    assert (r.mode, r.verdict) == ("exact", "holds")


def test_h2_not_invariant_with_witness():
    s2 = get_system("S2")
    H2 = s2.integral("H2").instantiate(0)
    mp = build_khk(s2, F(1, 2)).map
    r = verify.first_integral_discrete(H2, mp)
    assert (r.mode, r.verdict) == ("exact", "fails")
    assert _exact_rational_point(r.witness)
    x, y = r.witness
    assert H2.evaluate(*mp.evaluate(x, y)) - H2.evaluate(x, y) == r.residual != 0
    # (1, 1) maps to (-1, 1) and H2 is even in x, so it is not a witness
    assert mp.evaluate(1, 1) == (-1, 1)


def test_lie_symmetry_exact_verdicts():
    assert verify.lie_symmetry(S1.field, build_khk(S1, F(1, 4)).map).verdict == "holds"
    s2 = get_system("S2")
    r = verify.lie_symmetry(s2.field, build_khk(s2, F(1, 2)).map)
    assert (r.mode, r.verdict) == ("exact", "fails") and _exact_rational_point(r.witness)


def test_cubic_field_lie_symmetry():
    s = get_system("S2star")
    r = verify.lie_symmetry(s.field, build_khk(s, F(1, 3)).map)
    assert (r.mode, r.verdict) == ("exact", "fails")
    inst = build_pseudo(s, F(1, 3))
    r = verify.lie_symmetry(s.field, inst.evaluator, samples=verify.samples_for(s, inst.evaluator))
    assert (r.mode, r.verdict) == ("numeric", "holds")


@pytest.mark.parametrize("eps", [F(1, 2), F(2)])
def test_radical_lie_symmetry(eps):
    r = verify.lie_symmetry_radical(PS.radical_lie_symmetry, build_khk(PS, eps).map, eps)
    assert (r.mode, r.verdict) == ("numeric", "holds")


def test_radical_lie_symmetry_mutation_fails():
    gx, gy = PS.radical_lie_symmetry
    mutated = (gx, gy * Expr.num(F(101, 100)))
    r = verify.lie_symmetry_radical(mutated, build_khk(PS, F(1, 2)).map, F(1, 2))
    assert r.verdict == "fails"


def test_measure_verdicts():
    mp = build_khk(S1, F(1, 3)).map
    assert verify.measure_preserved(S1.measure_density, mp, eps=F(1, 3)).verdict == "holds"
    r = verify.measure_preserved(RationalFn2.const(1), mp)
    assert (r.mode, r.verdict) == ("exact", "fails") and _exact_rational_point(r.witness)
    half = F(1, 2)
    assert verify.measure_preserved(PS.measure_density, build_khk(PS, half).map, eps=half).verdict == "holds"


def test_commutation():
    phi = build_khk(S1, F(1, 3)).map
    assert verify.commute(phi, build_khk(S1.commuting_field, F(1, 5)).map).verdict == "holds"
    assert verify.commute(phi, build_khk(S1, F(1, 7)).map).verdict == "holds"
    r = verify.commute(phi, build_khk(get_system("S2"), F(1, 3)).map)
    assert r.verdict == "fails" and r.witness is not None


def test_functional_independence():
    H1 = S1.integral("H1").instantiate(0)
    V = S1.integral("V").instantiate(F(1))
    assert verify.functionally_independent(H1, V).verdict == "holds"
    sq = RationalFn2(H1.num * H1.num, H1.den * H1.den)
    assert verify.functionally_independent(H1, sq).verdict == "fails"
    fam = expr_to_rationalfn("((x^2+y^2)+2*(2*y+1))/(3*(x^2+y^2)+4*(2*y+1))")
    assert verify.functionally_independent(H1, fam).verdict == "fails"


def test_numeric_integral_on_radical_map():
    s4 = get_system("S4")
    inst = build_pseudo(s4, F(1, 2))
    pts = verify.samples_for(s4, inst.evaluator)
    r = verify.first_integral_discrete(s4.integral("H4").instantiate(0), inst.evaluator, samples=pts)
    assert (r.mode, r.verdict, r.samples) == ("numeric", "holds", 100)


def test_samples_are_seeded():
    a = verify.domain_samples(10, seed=verify.SEED)
    b = verify.domain_samples(10, seed=verify.SEED)
    assert a == b and verify.domain_samples(10, seed=1) != a


def test_json_report():
    r = verify.first_integral_discrete(get_system("S2").integral("H2").instantiate(0),
                                       build_khk(get_system("S2"), F(1, 2)).map, "h2")
    buf = io.StringIO()
    verify.write_report([r], buf)
    d = json.loads(buf.getvalue().splitlines()[0])
    assert d["verdict"] == "fails" and d["mode"] == "exact" and len(d["witness"]) == 2


def test_petrera_suris_integral_for_random_steps():
    import random

    rng = random.Random(11)
    for _ in range(5):
        eps = F(rng.randint(1, 12), rng.randint(1, 12)) * rng.choice((1, -1))
        r = verify.first_integral_discrete(PS.integral("V").instantiate(eps), build_khk(PS, eps).map)
        assert (r.mode, r.verdict) == ("exact", "holds"), eps
