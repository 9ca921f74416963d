"""Expression trees for formulas in x, y, t, u, v, eps, h.

The grammar is small: rational literals, named variables, + - * /, integer
powers with ^, parentheses and an optional sqrt(...).  Precedence from
tightest to loosest is ^, unary minus, * and /, + and -.  ^ associates to the
right and everything else to the left, so -x^2 means -(x^2).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from .poly import Poly2
from .radicals import exact_sqrt, is_exact

DEFAULT_VARS = frozenset({"x", "y", "t", "u", "v", "eps", "h"})


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, msg: str, offset: int):
        super().__init__(f"{msg} at byte {offset}")
        self.offset = offset


class Expr:
    """Immutable expression node.

    op is one of 'num', 'var', '+', '-', '*', '/', 'neg', '^', 'sqrt'.  For
    'num' the single arg is a Fraction, for 'var' a name, for '^' the second
    arg is a nonnegative int.
    """

    __slots__ = ("op", "args")

    def __init__(self, op: str, args: tuple):
        self.op = op
        self.args = args

    # -- smart constructors, with light constant folding ----------------
    @staticmethod
    def num(v) -> "Expr":
        return Expr("num", (Fraction(v),))

    @staticmethod
    def var(name: str) -> "Expr":
        return Expr("var", (name,))

    def __add__(self, other):
        return Expr("+", (self, _wrap(other)))

    def __radd__(self, other):
        return Expr("+", (_wrap(other), self))

    def __sub__(self, other):
        return Expr("-", (self, _wrap(other)))

    def __rsub__(self, other):
        return Expr("-", (_wrap(other), self))

    def __mul__(self, other):
        return Expr("*", (self, _wrap(other)))

    def __rmul__(self, other):
        return Expr("*", (_wrap(other), self))

    def __truediv__(self, other):
        return _div(self, _wrap(other))

    def __rtruediv__(self, other):
        return _div(_wrap(other), self)

    def __neg__(self):
        return _neg(self)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ExprError("exponent must be a nonnegative integer")
        return Expr("^", (self, n))

    def __eq__(self, other):
        return isinstance(other, Expr) and self.op == other.op and self.args == other.args

    def __hash__(self):
        return hash((self.op, self.args))

    def __repr__(self):
        return f"Expr({to_text(self)!r})"

    def __str__(self):
        return to_text(self)

    # -- queries --------------------------------------------------------
    def variables(self) -> set[str]:
        if self.op == "var":
            return {self.args[0]}
        if self.op == "num":
            return set()
        out: set[str] = set()
        for a in self.args:
            if isinstance(a, Expr):
                out |= a.variables()
        return out

    def has_sqrt(self) -> bool:
        if self.op == "sqrt":
            return True
        return any(isinstance(a, Expr) and a.has_sqrt() for a in self.args)

    def subs(self, mapping: Mapping[str, "Expr"]) -> "Expr":
        if self.op == "var":
            return mapping.get(self.args[0], self)
        if self.op == "num":
            return self
        return Expr(self.op, tuple(a.subs(mapping) if isinstance(a, Expr) else a for a in self.args))


def _wrap(v) -> Expr:
    if isinstance(v, Expr):
        return v
    return Expr.num(v)


def _neg(e: Expr) -> Expr:
    if e.op == "num":
        return Expr.num(-e.args[0])
    return Expr("neg", (e,))


def _div(a: Expr, b: Expr) -> Expr:
    if a.op == "num" and b.op == "num" and b.args[0] != 0:
        return Expr.num(a.args[0] / b.args[0])
    return Expr("/", (a, b))


def sqrt(e) -> Expr:
    return Expr("sqrt", (_wrap(e),))


def _is_num(e: Expr, v) -> bool:
    return e.op == "num" and e.args[0] == v


def _sum(a: Expr, b: Expr) -> Expr:
    if _is_num(a, 0):
        return b
    if _is_num(b, 0):
        return a
    return a + b


def _prod(a: Expr, b: Expr) -> Expr:
    if _is_num(a, 0) or _is_num(b, 0):
        return Expr.num(0)
    if _is_num(a, 1):
        return b
    if _is_num(b, 1):
        return a
    return a * b


def diff(e: Expr, name: str) -> Expr:
    """Symbolic partial derivative d e / d name (no simplification beyond 0 and 1)."""
    op = e.op
    if op == "num":
        return Expr.num(0)
    if op == "var":
        return Expr.num(1 if e.args[0] == name else 0)
    if op == "neg":
        d = diff(e.args[0], name)
        return d if _is_num(d, 0) else _neg(d)
    if op == "sqrt":
        d = diff(e.args[0], name)
        if _is_num(d, 0):
            return d
        return d / (Expr.num(2) * e)
    if op == "^":
        base, n = e.args
        if n == 0:
            return Expr.num(0)
        d = diff(base, name)
        if _is_num(d, 0):
            return d
        inner = base if n == 2 else Expr("^", (base, n - 1))
        return _prod(_prod(Expr.num(n), inner), d)
    a, b = e.args
    da, db = diff(a, name), diff(b, name)
    if op == "+":
        return _sum(da, db)
    if op == "-":
        if _is_num(db, 0):
            return da
        return da - db if not _is_num(da, 0) else _neg(db)
    if op == "*":
        return _sum(_prod(da, b), _prod(a, db))
    # quotient rule
    if _is_num(db, 0):
        return _div(da, b) if not _is_num(da, 0) else da
    return (_prod(da, b) - _prod(a, db)) / Expr("^", (b, 2))


# ---------------------------------------------------------------------------
# tokenizer and recursive-descent parser
# ---------------------------------------------------------------------------

def _tokenize(src: str):
    data = src.encode("utf-8")
    i, n = 0, len(data)
    toks = []
    while i < n:
        ch = chr(data[i])
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and chr(data[j]).isdigit():
                j += 1
            toks.append(("int", int(data[i:j]), i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (chr(data[j]).isalnum() or chr(data[j]) == "_"):
                j += 1
            toks.append(("name", data[i:j].decode(), i))
            i = j
            continue
        if ch in "+-*/^()":
            # '**' is accepted as a synonym for '^'
            if ch == "*" and i + 1 < n and chr(data[i + 1]) == "*":
                toks.append(("op", "^", i))
                i += 2
                continue
            toks.append(("op", ch, i))
            i += 1
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", i)
    toks.append(("end", None, n))
    return toks


class _Parser:
    def __init__(self, src: str, allowed: frozenset, allow_sqrt: bool):
        self.toks = _tokenize(src)
        self.pos = 0
        self.allowed = allowed
        self.allow_sqrt = allow_sqrt

    def peek(self):
        return self.toks[self.pos]

    def take(self):
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op):
        kind, val, off = self.take()
        if kind != "op" or val != op:
            raise ExprSyntaxError(f"expected {op!r}", off)

    def parse(self) -> Expr:
        e = self.additive()
        kind, _, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError("unexpected trailing input", off)
        return e

    def additive(self) -> Expr:
        left = self.multiplicative()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                right = self.multiplicative()
                left = Expr("+" if val == "+" else "-", (left, right))
            else:
                return left

    def multiplicative(self) -> Expr:
        left = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                right = self.unary()
                left = left * right if val == "*" else _div(left, right)
            else:
                return left

    def unary(self) -> Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return _neg(self.unary())
        if kind == "op" and val == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            k2, v2, off2 = self.peek()
            neg = False
            if k2 == "op" and v2 == "-":
                neg = True
            exp_expr = self.unary_exponent()
            if neg or exp_expr.op != "num" or exp_expr.args[0].denominator != 1 or exp_expr.args[0] < 0:
                raise ExprSyntaxError("exponent must be a nonnegative integer literal", off2)
            return Expr("^", (base, int(exp_expr.args[0])))
        return base

    def unary_exponent(self) -> Expr:
        # right-associative: a^b^c = a^(b^c); the exponent itself is folded
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return _neg(self.unary_exponent())
        base = self.atom()
        kind, val, off = self.peek()
        if kind == "op" and val == "^":
            self.take()
            inner = self.unary_exponent()
            if base.op == "num" and inner.op == "num" and inner.args[0].denominator == 1 and inner.args[0] >= 0:
                return Expr.num(base.args[0] ** int(inner.args[0]))
            raise ExprSyntaxError("exponent must be a nonnegative integer literal", off)
        return base

    def atom(self) -> Expr:
        kind, val, off = self.take()
        if kind == "int":
            return Expr.num(val)
        if kind == "name":
            if val == "sqrt":
                if not self.allow_sqrt:
                    raise ExprSyntaxError("sqrt is not allowed here", off)
                self.expect_op("(")
                inner = self.additive()
                self.expect_op(")")
                return Expr("sqrt", (inner,))
            if val not in self.allowed:
                raise ExprSyntaxError(f"unknown variable {val!r}", off)
            return Expr.var(val)
        if kind == "op" and val == "(":
            e = self.additive()
            self.expect_op(")")
            return e
        if kind == "end":
            raise ExprSyntaxError("unexpected end of input", off)
        raise ExprSyntaxError(f"unexpected token {val!r}", off)


def parse_expr(src: str, allowed_vars: Iterable[str] = DEFAULT_VARS, allow_sqrt: bool = False) -> Expr:
    if not src or not src.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(src, frozenset(allowed_vars), allow_sqrt).parse()


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def to_text(e: Expr) -> str:
    return _fmt(e, 0)


def _fmt(e: Expr, ctx: int) -> str:
    op = e.op
    if op == "num":
        v = e.args[0]
        if v.denominator == 1 and v >= 0:
            return str(v.numerator)
        s = str(v)
        return f"({s})"
    if op == "var":
        return e.args[0]
    if op == "sqrt":
        return f"sqrt({_fmt(e.args[0], 0)})"
    prec = _PREC[op]
    if op == "neg":
        s = "-" + _fmt(e.args[0], prec)
    elif op == "^":
        s = f"{_fmt(e.args[0], prec + 1)}^{e.args[1]}"
    else:
        a, b = e.args
        # left-assoc: right operand needs parens at equal precedence
        s = f"{_fmt(a, prec)} {op} {_fmt(b, prec + 1)}"
    return f"({s})" if prec < ctx else s


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def evaluate(e: Expr, env: Mapping[str, object]):
    """Numeric value of e.  Exact inputs give exact outputs where possible;
    sqrt of a non-square stays exact inside a single quadratic extension and
    drops to float otherwise."""
    op = e.op
    if op == "num":
        return e.args[0]
    if op == "var":
        try:
            return env[e.args[0]]
        except KeyError:
            raise ExprError(f"no value for variable {e.args[0]!r}") from None
    if op == "neg":
        return -evaluate(e.args[0], env)
    if op == "^":
        return evaluate(e.args[0], env) ** e.args[1]
    if op == "sqrt":
        return exact_sqrt(evaluate(e.args[0], env))
    a = evaluate(e.args[0], env)
    b = evaluate(e.args[1], env)
    try:
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
    except TypeError:
        # two different quadratic extensions met; continue in floating point
        a, b = float(a), float(b)
        return a + b if op == "+" else (a - b if op == "-" else a * b)
    if b == 0:
        raise ZeroDivisionError(f"division by zero in {to_text(e)}")
    try:
        return a / b
    except TypeError:
        return float(a) / float(b)


def evaluate_float(e: Expr, env: Mapping[str, object]) -> float:
    fenv = {k: float(v) for k, v in env.items()}
    return float(_eval_float(e, fenv))


def _eval_float(e: Expr, env) -> float:
    import math

    op = e.op
    if op == "num":
        return float(e.args[0])
    if op == "var":
        try:
            return env[e.args[0]]
        except KeyError:
            raise ExprError(f"no value for variable {e.args[0]!r}") from None
    if op == "neg":
        return -_eval_float(e.args[0], env)
    if op == "^":
        return _eval_float(e.args[0], env) ** e.args[1]
    if op == "sqrt":
        r = _eval_float(e.args[0], env)
        if r < 0:
            raise ValueError(f"negative radicand in {to_text(e)}")
        return math.sqrt(r)
    a = _eval_float(e.args[0], env)
    b = _eval_float(e.args[1], env)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if b == 0:
        raise ZeroDivisionError(f"division by zero in {to_text(e)}")
    return a / b


def compile_float(e: Expr, names: tuple[str, ...]):
    """Turn e into a plain Python function of the given names, for hot loops."""
    import math

    def emit(n: Expr) -> str:
        op = n.op
        if op == "num":
            return repr(float(n.args[0]))
        if op == "var":
            return f"_v_{n.args[0]}"
        if op == "neg":
            return f"(-{emit(n.args[0])})"
        if op == "^":
            return f"({emit(n.args[0])}**{n.args[1]})"
        if op == "sqrt":
            return f"_sqrt({emit(n.args[0])})"
        return f"({emit(n.args[0])}{n.op}{emit(n.args[1])})"

    args = ", ".join(f"_v_{nm}" for nm in names)
    code = f"lambda {args}: {emit(e)}"
    return eval(code, {"_sqrt": math.sqrt})


# ---------------------------------------------------------------------------
# conversion to polynomials and rational functions in two slot variables
# ---------------------------------------------------------------------------

def expr_to_fraction_pair(e: Expr, env: Mapping[str, object] | None = None,
                          slots: tuple[str, str] = ("x", "y")) -> tuple[Poly2, Poly2]:
    """(num, den) polynomials in the two slot variables, not reduced.

    Every other variable must have a value in env.  sqrt is allowed only over
    subexpressions free of the slot variables; it is then evaluated exactly
    when possible.
    """
    env = dict(env or {})
    return _to_pair(e, env, slots)


def _to_pair(e: Expr, env, slots) -> tuple[Poly2, Poly2]:
    op = e.op
    one = Poly2.one()
    if op == "num":
        return Poly2.const(e.args[0]), one
    if op == "var":
        name = e.args[0]
        if name == slots[0]:
            return Poly2.x(), one
        if name == slots[1]:
            return Poly2.y(), one
        if name not in env:
            raise ExprError(f"no value for variable {name!r}")
        return Poly2.const(env[name]), one
    if op == "sqrt":
        if e.args[0].variables() & set(slots):
            raise ExprError("sqrt of a non-constant expression has no rational form")
        return Poly2.const(_const_sqrt(e.args[0], env)), one
    if op == "neg":
        n, d = _to_pair(e.args[0], env, slots)
        return -n, d
    if op == "^":
        n, d = _to_pair(e.args[0], env, slots)
        k = e.args[1]
        return n ** k, d ** k
    n1, d1 = _to_pair(e.args[0], env, slots)
    n2, d2 = _to_pair(e.args[1], env, slots)
    if op in "+-":
        if d1 == d2:
            return (n1 + n2 if op == "+" else n1 - n2), d1
        if d2.is_const():
            c = d2.const_value()
            n2s, d2s = n2 * (1 / c), one
            if d2s == d1:
                return (n1 + n2s if op == "+" else n1 - n2s), d1
            n1c = n1
            return (n1c + n2s * d1 if op == "+" else n1c - n2s * d1), d1
        if d1.is_const():
            c = d1.const_value()
            n1s = n1 * (1 / c)
            return (n1s * d2 + n2 if op == "+" else n1s * d2 - n2), d2
        num = n1 * d2 + n2 * d1 if op == "+" else n1 * d2 - n2 * d1
        return num, d1 * d2
    if op == "*":
        return n1 * n2, d1 * d2
    if op == "/":
        if n2.is_zero():
            raise ZeroDivisionError(f"division by an identically zero expression in {to_text(e)}")
        return n1 * d2, d1 * n2
    raise ExprError(f"unknown operator {op}")


def _const_sqrt(arg: Expr, env):
    v = evaluate(arg, env)
    if is_exact(v):
        return exact_sqrt(v)
    return exact_sqrt(float(v))


def expr_to_poly(e: Expr, env: Mapping[str, object] | None = None,
                 slots: tuple[str, str] = ("x", "y")) -> Poly2:
    n, d = expr_to_fraction_pair(e, env, slots)
    if not d.is_const():
        raise ExprError(f"not a polynomial: {to_text(e)}")
    return n * (1 / d.const_value())


def poly_to_expr(p: Poly2, names: tuple[str, str] = ("x", "y")) -> Expr:
    terms = []
    for (i, j) in sorted(p.terms, reverse=True):
        c = p.terms[(i, j)]
        mono = None
        for name, k in ((names[0], i), (names[1], j)):
            if k:
                f = Expr.var(name) if k == 1 else Expr.var(name) ** k
                mono = f if mono is None else mono * f
        if mono is None:
            terms.append(Expr.num(c))
        elif c == 1:
            terms.append(mono)
        elif c == -1:
            terms.append(_neg(mono))
        else:
            terms.append(Expr.num(c) * mono)
    if not terms:
        return Expr.num(0)
    out = terms[0]
    for t in terms[1:]:
        if t.op == "neg":
            out = out - t.args[0]
        elif t.op == "num" and t.args[0] < 0:
            out = out - Expr.num(-t.args[0])
        else:
            out = out + t
    return out
