import cmath
import math
from fractions import Fraction as F

import pytest
from hypothesis import assume, given, settings, strategies as st

from khkmaps.fibration import petrera_suris_param, s1_param, s2_pseudo_param
from khkmaps.khk import build_khk, get_system
from khkmaps.moebius import (INF, CurveNotPreservedError, MoebiusError, MoebiusTransform, classify,
                             continued_fraction, convergents, detect_rational_rotation, discriminant,
                             extract_conjugate, fit_from_triples, is_scalar_matrix, periodicity_residual,
                             rotation_number)
from khkmaps.pseudo import build_pseudo


def test_involution():
    c = classify(MoebiusTransform(0, 1, 1, 0))
    assert c.delta == 4 and c.xi == -1 and c.kind == "involution"


def test_quarter_rotation():
    m = MoebiusTransform(1, 1, -1, 1)
    c = classify(m)
    assert c.delta == -4 and c.kind == "rotation"
    assert abs(c.xi - 1j) < 1e-15 and c.rotation_number == 0.25
    assert is_scalar_matrix(m.matrix_power(4))
    assert not is_scalar_matrix(m.matrix_power(2))
    assert detect_rational_rotation(m) == F(1, 4)


def test_other_classes():
    assert classify(MoebiusTransform(2, 0, 0, 1)).kind == "hyperbolic"
    par = classify(MoebiusTransform(1, 1, 0, 1))
    assert par.delta == 0 and par.fixed_points == [INF]


def test_hyperbolic_stability_from_derivative():
    m = MoebiusTransform(3, 0, 1, 1)  # fixed points 0 and 2
    c = classify(m)
    tags = dict(zip(c.fixed_points, c.stability))
    assert tags[F(0)] == "repellor" and tags[F(2)] == "attractor"
    assert abs(m.derivative(F(0))) > 1 > abs(m.derivative(F(2)))


def test_singular_matrix_rejected():
    with pytest.raises(MoebiusError):
        MoebiusTransform(1, 2, 2, 4)


def test_infinity_handling():
    m = MoebiusTransform(1, 1, -1, 1)
    assert m(INF) == -1 and m(1) is INF
    assert m.inverse().compose(m).coefficients() == MoebiusTransform.identity().coefficients()


def test_fit_examples():
    assert fit_from_triples([(0, 0), (1, 1), (2, 2)]).coefficients() == MoebiusTransform.identity().coefficients()
    m = fit_from_triples([(0, 1), (1, INF), (INF, 0)])
    for t in (F(2), F(-3), F(1, 2)):
        assert m(t) == 1 / (1 - t)


nonzero = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@settings(max_examples=80, deadline=None)
@given(nonzero, nonzero, nonzero, nonzero)
def test_fit_recovers_any_transform(a, b, c, d):
    assume(a * d - b * c != 0)
    m = MoebiusTransform(a, b, c, d)
    pts = [F(1, 3), F(-2), F(5, 7)]
    pairs = [(t, m(t)) for t in pts]
    assert fit_from_triples(pairs).coefficients() == m.coefficients()


def _rho_oracle(a, b, c, d):
    """Conjugate to t = tan(theta) -> tan(theta + phi): rotation phi/pi, with
    the direction read off the sign of c (det > 0 in the elliptic case)."""
    a, b, c, d = (float(v) for v in (a, b, c, d))
    phi = math.acos((a + d) / (2 * math.sqrt(a * d - b * c)))
    return phi / math.pi if c < 0 else 1 - phi / math.pi


@settings(max_examples=80, deadline=None)
@given(nonzero, nonzero, nonzero, nonzero)
def test_rotation_number_against_complex_oracle(a, b, c, d):
    assume(a * d - b * c != 0 and discriminant(a, b, c, d) < 0)
    rho = rotation_number(MoebiusTransform(a, b, c, d))
    ref = _rho_oracle(a, b, c, d)
    assert min(abs(rho - ref), 1 - abs(rho - ref)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(2, 13))
def test_exact_rational_rotation_detected(p, q):
    assume(p < q and math.gcd(p, q) == 1 and 2 * p != q)
    # t -> (cos t + sin)/(-sin t + cos) has rotation p/q; use the exact matrix power check on floats
    ang = 2 * math.pi * p / q
    m = MoebiusTransform(math.cos(ang / 2), math.sin(ang / 2), -math.sin(ang / 2), math.cos(ang / 2))
    r = detect_rational_rotation(m)
    assert r is not None and r.denominator == q
    assert periodicity_residual(m, q) < 1e-9


def test_continued_fractions():
    assert continued_fraction(0.75) == [0, 1, 3]
    assert F(355, 113) in list(convergents(math.pi))


@pytest.mark.parametrize("eps", [F(1, 2), F(1)])
@pytest.mark.parametrize("h", [-2.4, -2.2, -2.1])
def test_petrera_suris_delta(eps, h):
    m = extract_conjugate(build_khk(get_system("petrera_suris"), eps).map, petrera_suris_param(eps, h))
    assert abs(float(m.delta) - 8 * (h + 2)) < 1e-10


@pytest.mark.parametrize("h", [F(1, 2), F(1), F(2)])
def test_s1_o1_coefficients(h):
    eps = F(1, 2)
    m = extract_conjugate(build_khk(get_system("S1"), eps).map, s1_param(h, "O1"))
    e, s = float(eps), math.sqrt(h)
    ref = ((2 * e * s - 1) / (e * (4 * h + 1)), -1 / (4 * h + 1), 1.0, (-2 * e * s - 1) / (e * (4 * h + 1)))
    assert all(abs(float(u) - v) < 1e-12 for u, v in zip(m.coefficients(), ref))
    assert abs(float(m.delta) + 4 / (4 * h + 1) ** 2) < 1e-12


@pytest.mark.parametrize("eps", [F(1, 3), F(1), F(5, 2)])
def test_s1_rotation_independent_of_level_and_reflects(eps):
    mp, mm = build_khk(get_system("S1"), eps).map, build_khk(get_system("S1"), -eps).map
    rs = []
    for h in (F(1, 4), F(1), F(3)):
        P = s1_param(h, "O1")
        r = rotation_number(extract_conjugate(mp, P))
        assert abs(r + rotation_number(extract_conjugate(mm, P)) - 1) < 1e-12
        rs.append(r)
    xi = (1 - eps * eps + 2j * eps) / (1 + eps * eps)
    ref = (cmath.phase(complex(xi)) / (2 * math.pi)) % 1
    assert max(abs(r - ref) for r in rs) < 1e-12


def test_s1_unit_step_quarter_and_half_step_value():
    m = extract_conjugate(build_khk(get_system("S1"), F(1)).map, s1_param(F(1), "O1"))
    assert rotation_number(m) == pytest.approx(0.25, abs=1e-15)
    m = extract_conjugate(build_khk(get_system("S1"), F(1, 2)).map, s1_param(F(1), "O1"))
    assert rotation_number(m) == pytest.approx(math.atan2(0.8, 0.6) / (2 * math.pi), abs=1e-12)


def test_pseudo_s2_conjugate():
    eps = F(1, 3)
    mp = build_pseudo(get_system("S2"), eps).map
    for h in (F(1, 4), F(4), F(9)):
        m = extract_conjugate(mp, s2_pseudo_param(h))
        s = math.sqrt(h)
        ref = MoebiusTransform((1 - eps * s), eps, -eps * (h + 1), eps * s + 1)
        assert all(abs(float(u) - float(v)) < 1e-12 for u, v in zip(m.coefficients(), ref.coefficients()))


def test_plain_s2_does_not_preserve_curve():
    with pytest.raises(CurveNotPreservedError):
        extract_conjugate(build_khk(get_system("S2"), F(1, 2)).map, s2_pseudo_param(F(4)))


def test_exact_power_is_scalar_when_rotation_detected():
    m = extract_conjugate(build_khk(get_system("S1"), F(1)).map, s1_param(F(1), "O1"))
    r = detect_rational_rotation(m)
    assert r == F(1, 4)
    assert is_scalar_matrix(m.matrix_power(r.denominator))


@pytest.mark.parametrize("eps,h", [(F(1, 2), -2.3), (F(1), -2.2), (F(2), -2.45)])
def test_petrera_suris_printed_coefficients(eps, h):
    m = extract_conjugate(build_khk(get_system("petrera_suris"), eps).map, petrera_suris_param(eps, h))
    e = float(eps)
    mm = math.sqrt((e * e + 1) * (2 * h + 5))
    ref = ((e * mm - e + 1) / e, -(e * e * (mm * mm - 2 * mm + 2) - 2 * mm + 2) / (e * e + 1), 1.0,
           -(e * mm - e - 1) / e)
    assert all(abs(float(u) - v) < 1e-10 for u, v in zip(m.coefficients(), ref))
