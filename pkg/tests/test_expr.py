from fractions import Fraction as F

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from khkmaps.expr import (Expr, ExprError, ExprSyntaxError, diff, evaluate, evaluate_float, expr_to_poly,
                          parse_expr, to_text)
from khkmaps.rational import expr_to_rationalfn

from conftest import X, Y, to_sympy


def test_parse_s1_component():
    e = parse_expr("-y+x^2-y^2")
    assert to_sympy(expr_to_poly(e)) == -Y + X**2 - Y**2


def test_zero_literal():
    e = parse_expr("0")
    assert e.op == "num" and e.args[0] == 0
    assert expr_to_poly(e).is_zero()


def test_product_expands():
    assert to_sympy(expr_to_poly(parse_expr("x*(1+2*y)"))) == X + 2 * X * Y


@pytest.mark.parametrize("src,value", [
    ("2^3^2", 512),          # right associative
    ("-2^2", -4),            # ^ binds tighter than unary minus
    ("8/4/2", 1),            # left associative
    ("1-2-3", -4),
    ("2+3*4", 14),
    ("3/4", F(3, 4)),
    ("(1+2)*3", 9),
])
def test_precedence(src, value):
    assert evaluate(parse_expr(src), {}) == value


@pytest.mark.parametrize("src,offset", [("x+*y", 2), ("(x+1", 4), ("x^-1", 2), ("x^(1/2)", 2), ("", 0)])
def test_syntax_errors_report_offset(src, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr(src)
    assert info.value.offset == offset


def test_unknown_variable():
    with pytest.raises(ExprSyntaxError, match="unknown variable"):
        parse_expr("x+z")
    with pytest.raises(ExprSyntaxError):
        parse_expr("h+x", allowed_vars={"x"})


def test_sqrt_gated():
    with pytest.raises(ExprSyntaxError, match="sqrt"):
        parse_expr("sqrt(x)")
    e = parse_expr("sqrt(x^2+1)", allow_sqrt=True)
    assert evaluate_float(e, {"x": 3.0}) == pytest.approx(10**0.5)


def test_rationalfn_reduced_forms():
    f = expr_to_rationalfn("(x^2+y^2)/(1+2*y)")
    assert sp.simplify(to_sympy(f.num) / to_sympy(f.den) - (X**2 + Y**2) / (1 + 2 * Y)) == 0
    assert f.den.degree == 1 and f.num.degree == 2
    one = expr_to_rationalfn("x/x")
    assert one.num.is_const() and one.den.is_const() and one.num.const_value() / one.den.const_value() == 1
    xy = expr_to_rationalfn("(x^2-y^2)/(x-y)")
    assert to_sympy(xy.num) / to_sympy(xy.den) == X + Y


def test_rationalfn_errors():
    with pytest.raises(ZeroDivisionError):
        expr_to_rationalfn("1/(x-x)")
    with pytest.raises(ExprError):
        expr_to_rationalfn(parse_expr("sqrt(x)", allow_sqrt=True))


# -- round trip ------------------------------------------------------------

_leaf = st.one_of(
    st.sampled_from(["x", "y", "eps"]).map(Expr.var),
    st.fractions(min_value=-5, max_value=5, max_denominator=7).map(Expr.num),
)


def _extend(children):
    return st.one_of(
        st.tuples(st.sampled_from("+-*/"), children, children).map(lambda t: Expr(t[0], (t[1], t[2]))),
        st.tuples(children, st.integers(0, 3)).map(lambda t: Expr("^", t)),
        children.map(lambda c: Expr("neg", (c,))),
    )


exprs = st.recursive(_leaf, _extend, max_leaves=12)


@settings(max_examples=200, deadline=None)
@given(exprs)
def test_print_parse_round_trip(e):
    back = parse_expr(to_text(e))
    # after one normalizing pass, printing and parsing is a fixed point
    assert parse_expr(to_text(back)) == back
    env = {"x": F(2, 3), "y": F(-5, 7), "eps": F(11, 13)}
    try:
        v = evaluate(e, env)
    except ZeroDivisionError:
        return
    assert evaluate(back, env) == v


@pytest.mark.parametrize("src", ["x^3*y - 2/(1+y^2)", "sqrt(x^2+y)/(1-x*y)^3 - x", "-(x+y)^4*sqrt(1-2*y)",
                                 "(x-y)/(x+y)", "7"])
def test_diff_matches_sympy(src):
    e = parse_expr(src, allow_sqrt=True)
    ref = sp.sympify(to_text(e).replace("^", "**"), locals={"x": X, "y": Y})
    for name, sym in (("x", X), ("y", Y)):
        got = sp.sympify(to_text(diff(e, name)).replace("^", "**"), locals={"x": X, "y": Y})
        assert sp.simplify(got - sp.diff(ref, sym)) == 0
