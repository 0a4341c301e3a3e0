"""Formula parsing, symbolic differentiation and evaluation.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?          # right associative
    atom   := number | 'x' | name '(' expr ')' | '(' expr ')'

Exponents must be non-negative integer constants.  Decimal literals become
exact rationals.  The parser folds unary minus, division and powers whose
operands are all constants, so ``-1/3`` is the single constant ``-1/3``; this
keeps ``parse(to_text(e)) == e`` for every parsed tree.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .exactpoly import Polynomial


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"syntax error at position {position}: {message}")
        self.position = position
        self.reason = message


class EvaluationError(ArithmeticError):
    """Raised when an expression is evaluated outside its domain."""


_PREC = {
    "add": 1, "sub": 1,
    "mul": 2, "div": 2,
    "neg": 3,
    "pow": 4,
    "const": 5, "x": 5, "exp": 5, "atan": 5,
}


@dataclass(frozen=True, eq=True)
class Expr:
    op: str
    args: tuple = ()
    value: Optional[Fraction] = None
    _hash: int = field(default=0, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.op, self.args, self.value)))

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Expr({to_text(self)!r})"

    def __str__(self):
        return to_text(self)

    # arithmetic sugar for building trees in code
    def __add__(self, other):
        return Expr("add", (self, _lift(other)))

    def __radd__(self, other):
        return Expr("add", (_lift(other), self))

    def __sub__(self, other):
        return Expr("sub", (self, _lift(other)))

    def __rsub__(self, other):
        return Expr("sub", (_lift(other), self))

    def __mul__(self, other):
        return Expr("mul", (self, _lift(other)))

    def __rmul__(self, other):
        return Expr("mul", (_lift(other), self))

    def __truediv__(self, other):
        return Expr("div", (self, _lift(other)))

    def __rtruediv__(self, other):
        return Expr("div", (_lift(other), self))

    def __neg__(self):
        return Expr("neg", (self,))

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        return Expr("pow", (self,), Fraction(n))


def const(v) -> Expr:
    return Expr("const", (), Fraction(v))


X = Expr("x")


def exp(e: Expr) -> Expr:
    return Expr("exp", (_lift(e),))


def atan(e: Expr) -> Expr:
    return Expr("atan", (_lift(e),))


def _lift(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, float):
        return const(Fraction(repr(v)))
    return const(v)


# -- parsing ----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>\*\*|[-+*/^()]))"
)
_FUNCS = {"exp", "atan", "arctan"}


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        start = m.start(kind)
        tok = m.group(kind)
        if tok == "**":
            tok = "^"
        tokens.append((kind, tok, start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, op):
        kind, tok, pos = self.peek()
        if tok != op or kind != "op":
            what = "end of input" if kind == "end" else repr(tok)
            raise ParseError(f"expected {op!r}, found {what}", pos)
        self.take()

    def parse(self) -> Expr:
        e = self.expr()
        kind, tok, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {tok!r}", pos)
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = "add" if self.take()[1] == "+" else "sub"
            left = Expr(op, (left, self.term()))
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            right = self.unary()
            if op == "*":
                left = Expr("mul", (left, right))
            elif left.op == "const" and right.op == "const" and right.value != 0:
                left = const(left.value / right.value)
            else:
                left = Expr("div", (left, right))
        return left

    def unary(self) -> Expr:
        kind, tok, _ = self.peek()
        if kind == "op" and tok == "-":
            self.take()
            inner = self.unary()
            if inner.op == "const":
                return const(-inner.value)
            return Expr("neg", (inner,))
        if kind == "op" and tok == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, tok, pos = self.peek()
        if kind == "op" and tok == "^":
            self.take()
            epos = self.peek()[2]
            if self.peek()[0] == "end":
                raise ParseError("expected exponent, found end of input", epos)
            expo = self.unary()
            if expo.op != "const":
                raise ParseError("exponent must be a non-negative integer constant", epos)
            if expo.value < 0:
                raise ParseError("negative exponent", epos)
            if expo.value.denominator != 1:
                raise ParseError("fractional exponent", epos)
            if base.op == "const":
                return const(base.value ** int(expo.value))
            return Expr("pow", (base,), expo.value)
        return base

    def atom(self) -> Expr:
        kind, tok, pos = self.take()
        if kind == "num":
            return const(Fraction(tok))
        if kind == "name":
            if tok == "x":
                return X
            if tok in _FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Expr("atan" if tok == "arctan" else tok, (arg,))
            raise ParseError(f"unknown identifier {tok!r}", pos)
        if kind == "op" and tok == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "end":
            raise ParseError("expected operand, found end of input", pos)
        raise ParseError(f"expected operand, found {tok!r}", pos)


def parse(text: str) -> Expr:
    """Parse a formula in ``x`` into an expression tree."""
    return _Parser(text).parse()


# -- printing ---------------------------------------------------------------


def _const_text(v: Fraction) -> str:
    if v.denominator == 1 and v >= 0:
        return str(v.numerator)
    return f"({v})"


def to_text(e: Expr) -> str:
    """Render ``e`` with the minimum parentheses that preserve its tree."""
    op = e.op
    if op == "const":
        return _const_text(e.value)
    if op == "x":
        return "x"
    if op in ("exp", "atan"):
        return f"{op}({to_text(e.args[0])})"
    if op == "neg":
        (a,) = e.args
        inner = to_text(a)
        if _PREC[a.op] < _PREC["neg"] or (a.op == "const"):
            inner = f"({inner})"
        return f"-{inner}"
    if op == "pow":
        (a,) = e.args
        base = to_text(a)
        if _PREC[a.op] <= _PREC["pow"] and a.op != "const":
            base = f"({base})"
        return f"{base}^{e.value.numerator}"
    a, b = e.args
    p = _PREC[op]
    left = to_text(a)
    right = to_text(b)
    if _PREC[a.op] < p:
        left = f"({left})"
    if _PREC[b.op] <= p:
        right = f"({right})"
    sym = {"add": " + ", "sub": " - ", "mul": "*", "div": "/"}[op]
    return f"{left}{sym}{right}"


# -- differentiation --------------------------------------------------------

_ZERO = const(0)
_ONE = const(1)


def _is_const(e: Expr, v) -> bool:
    return e.op == "const" and e.value == v


def _add(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    return Expr("add", (a, b))


def _sub(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 0):
        return a
    if _is_const(a, 0):
        return _neg(b)
    return Expr("sub", (a, b))


def _neg(a: Expr) -> Expr:
    if a.op == "const":
        return const(-a.value)
    if a.op == "neg":
        return a.args[0]
    return Expr("neg", (a,))


def _mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0) or _is_const(b, 0):
        return _ZERO
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    if a.op == "const" and b.op == "const":
        return const(a.value * b.value)
    return Expr("mul", (a, b))


def _div(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0):
        return _ZERO
    if _is_const(b, 1):
        return a
    return Expr("div", (a, b))


def _pow(a: Expr, n: int) -> Expr:
    if n == 0:
        return _ONE
    if n == 1:
        return a
    return Expr("pow", (a,), Fraction(n))


def differentiate(e: Expr) -> Expr:
    """Exact derivative with respect to x (lightly simplified, not canonical)."""
    op = e.op
    if op == "const":
        return _ZERO
    if op == "x":
        return _ONE
    if op == "add":
        return _add(differentiate(e.args[0]), differentiate(e.args[1]))
    if op == "sub":
        return _sub(differentiate(e.args[0]), differentiate(e.args[1]))
    if op == "neg":
        return _neg(differentiate(e.args[0]))
    if op == "mul":
        a, b = e.args
        return _add(_mul(differentiate(a), b), _mul(a, differentiate(b)))
    if op == "div":
        a, b = e.args
        da, db = differentiate(a), differentiate(b)
        if db.op == "const" and db.value == 0:
            return _div(da, b)
        return _div(_sub(_mul(da, b), _mul(a, db)), _pow(b, 2))
    if op == "pow":
        (a,) = e.args
        n = int(e.value)
        if n == 0:
            return _ZERO
        return _mul(_mul(const(n), _pow(a, n - 1)), differentiate(a))
    if op == "exp":
        (a,) = e.args
        return _mul(e, differentiate(a))
    if op == "atan":
        (a,) = e.args
        return _div(differentiate(a), _add(_ONE, _pow(a, 2)))
    raise ValueError(f"unknown node {op!r}")


# -- evaluation -------------------------------------------------------------


def _exp_scalar(v):
    try:
        return math.exp(v)
    except OverflowError:
        return math.inf


def _pow_scalar(v, n):
    try:
        return v**n
    except OverflowError:
        return math.copysign(math.inf, v) if n % 2 else math.inf


def _div_scalar(a, b):
    if b == 0:
        raise EvaluationError("division by zero")
    return a / b


def _div_array(a, b):
    if np.any(b == 0):
        raise EvaluationError("division by zero")
    return a / b


def _emit(e: Expr, out: list, memo: dict) -> str:
    """Emit straight-line code for ``e``; returns the name holding its value."""
    if e in memo:
        return memo[e]
    op = e.op
    if op == "const":
        name = repr(float(e.value))
        memo[e] = name
        return name
    if op == "x":
        return "x"
    args = [_emit(a, out, memo) for a in e.args]
    if op == "add":
        code = f"{args[0]} + {args[1]}"
    elif op == "sub":
        code = f"{args[0]} - {args[1]}"
    elif op == "mul":
        code = f"{args[0]} * {args[1]}"
    elif op == "div":
        code = f"_div({args[0]}, {args[1]})"
    elif op == "neg":
        code = f"-{args[0]}"
    elif op == "pow":
        code = f"_pow({args[0]}, {int(e.value)})"
    elif op == "exp":
        code = f"_exp({args[0]})"
    elif op == "atan":
        code = f"_atan({args[0]})"
    else:
        raise ValueError(f"unknown node {op!r}")
    name = f"v{len(out)}"
    out.append(f"    {name} = {code}")
    memo[e] = name
    return name


_SCALAR_NS = {"_div": _div_scalar, "_pow": _pow_scalar, "_exp": _exp_scalar, "_atan": math.atan}
_ARRAY_NS = {"_div": _div_array, "_pow": np.power, "_exp": np.exp, "_atan": np.arctan}


def compile_expr(e: Expr, vectorized: bool = False):
    """Compile ``e`` into a Python callable of one argument.

    The scalar form works on floats; the vectorized form takes a numpy array and
    always returns an array of the same shape.  Both raise
    :class:`EvaluationError` on division by zero and let overflow become inf.
    """
    lines: list[str] = []
    result = _emit(e, lines, {})
    if vectorized:
        body = "\n".join(lines)
        src = (
            "def _f(x):\n"
            "    x = _np.asarray(x, dtype=float)\n"
            "    with _np.errstate(over='ignore', invalid='ignore'):\n"
            + "\n".join("    " + ln for ln in lines)
            + ("\n" if lines else "")
            + f"        return _np.broadcast_to({result}, x.shape).astype(float)\n"
        )
        ns = dict(_ARRAY_NS, _np=np)
    else:
        src = "def _f(x):\n" + "\n".join(lines) + ("\n" if lines else "") + f"    return float({result})\n"
        ns = dict(_SCALAR_NS)
    exec(src, ns)  # noqa: S102 - source built from our own tree
    return ns["_f"]


def evaluate(e: Expr, x: float) -> float:
    """Evaluate ``e`` at ``x`` in double precision."""
    return compile_expr(e)(float(x))


# -- polynomial recognition -------------------------------------------------


def as_polynomial(e: Expr) -> Optional[Polynomial]:
    """Exact coefficients if ``e`` expands to a polynomial, else ``None``."""
    op = e.op
    if op == "const":
        return Polynomial((e.value,))
    if op == "x":
        return Polynomial.x()
    if op in ("exp", "atan"):
        return None
    if op == "neg":
        p = as_polynomial(e.args[0])
        return None if p is None else -p
    if op == "pow":
        p = as_polynomial(e.args[0])
        return None if p is None else p ** int(e.value)
    a = as_polynomial(e.args[0])
    if a is None:
        return None
    b = as_polynomial(e.args[1])
    if b is None:
        return None
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b.degree != 0:
            return None
        return a * (1 / b.lc)
    raise ValueError(f"unknown node {op!r}")


def as_rational_pair(e: Expr) -> Optional[tuple[Polynomial, Polynomial]]:
    """``(numerator, denominator)`` if ``e`` is a rational function of x."""
    op = e.op
    if op in ("const", "x"):
        return as_polynomial(e), Polynomial((1,))
    if op in ("exp", "atan"):
        return None
    if op == "neg":
        r = as_rational_pair(e.args[0])
        return None if r is None else (-r[0], r[1])
    if op == "pow":
        r = as_rational_pair(e.args[0])
        n = int(e.value)
        return None if r is None else (r[0] ** n, r[1] ** n)
    ra = as_rational_pair(e.args[0])
    rb = as_rational_pair(e.args[1])
    if ra is None or rb is None:
        return None
    (pa, qa), (pb, qb) = ra, rb
    if op == "add":
        return pa * qb + pb * qa, qa * qb
    if op == "sub":
        return pa * qb - pb * qa, qa * qb
    if op == "mul":
        return pa * pb, qa * qb
    if op == "div":
        if pb.is_zero():
            return None
        return pa * qb, qa * pb
    raise ValueError(f"unknown node {op!r}")


def poly_to_expr(p: Polynomial) -> Expr:
    """Horner-free sum of monomials, highest power first."""
    terms = []
    for k in range(p.degree, -1, -1):
        c = p.coeffs[k]
        if c == 0:
            continue
        mono = _pow(X, k) if k else None
        if mono is None:
            term = const(c)
        elif c == 1:
            term = mono
        else:
            term = Expr("mul", (const(c), mono))
        terms.append(term)
    if not terms:
        return _ZERO
    out = terms[0]
    for t in terms[1:]:
        out = Expr("add", (out, t))
    return out
