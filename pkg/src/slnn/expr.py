"""Small arithmetic expressions in ``eta`` and ``xi``.

Grammar, loosest binding first::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?          right-associative
    atom   := NUMBER | 'eta' | 'xi' | FUNC '(' expr ')' | '(' expr ')'

``FUNC`` is one of sin, cos, exp, ln, sqrt.  Exponents must be constant; they
are folded to a literal at parse time, so ``eta^(-1/2)`` is fine and
``eta^xi`` is rejected.

Evaluation accepts floats or numpy arrays for both variables and broadcasts.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import EvalDomainError, ExprSyntaxError, UnknownIdentifierError

__all__ = [
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Pow",
    "Call",
    "Expr",
    "VARIABLES",
    "FUNCTIONS",
    "parse",
    "evaluate",
    "differentiate",
    "differentiate_xi",
    "to_source",
    "variables",
]

VARIABLES = ("eta", "xi")
FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt")


@dataclass(frozen=True)
class Num:
    value: float

    def __str__(self):
        return to_source(self)


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Neg:
    arg: Expr

    def __str__(self):
        return to_source(self)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: Expr
    right: Expr

    def __str__(self):
        return to_source(self)


@dataclass(frozen=True)
class Pow:
    base: Expr
    exponent: float

    def __str__(self):
        return to_source(self)


@dataclass(frozen=True)
class Call:
    func: str
    arg: Expr

    def __str__(self):
        return to_source(self)


Expr = Union[Num, Var, Neg, BinOp, Pow, Call]


# --------------------------------------------------------------------------
# tokenizer / parser

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str  # num, ident, op, eof
    text: str
    offset: int


def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


def _tokenize(source: str) -> list[_Tok]:
    toks = []
    i = 0
    while i < len(source):
        m = _TOKEN.match(source, i)
        if m is None:
            raise ExprSyntaxError(
                f"unexpected character {source[i]!r}", _byte_offset(source, i), source
            )
        if m.lastgroup != "ws":
            toks.append(_Tok(m.lastgroup, m.group(), _byte_offset(source, i)))
        i = m.end()
    toks.append(_Tok("eof", "", _byte_offset(source, len(source))))
    return toks


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.toks = _tokenize(source)
        self.pos = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.pos]

    def _error(self, expected: str):
        tok = self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ExprSyntaxError(f"expected {expected}, found {found}", tok.offset, self.source)

    def _accept(self, *ops):
        if self.tok.kind == "op" and self.tok.text in ops:
            self.pos += 1
            return self.toks[self.pos - 1].text
        return None

    def parse(self) -> Expr:
        node = self.expr()
        if self.tok.kind != "eof":
            self._error("an operator or end of input")
        return node

    def expr(self):
        node = self.term()
        while (op := self._accept("+", "-")) is not None:
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while (op := self._accept("*", "/")) is not None:
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self._accept("-") is not None:
            return Neg(self.unary())
        if self._accept("+") is not None:
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self._accept("^") is None:
            return base
        start = self.tok.offset
        exponent = self.unary()
        if variables(exponent):
            raise ExprSyntaxError("exponent must be a constant", start, self.source)
        try:
            value = float(evaluate(exponent, 0.0, 0.0))
        except EvalDomainError as exc:
            raise ExprSyntaxError(f"constant exponent is undefined ({exc})", start, self.source)
        return Pow(base, value)

    def atom(self):
        tok = self.tok
        if tok.kind == "num":
            self.pos += 1
            value = float(tok.text)
            if not np.isfinite(value):
                raise ExprSyntaxError(f"numeric literal {tok.text} overflows", tok.offset, self.source)
            return Num(value)
        if tok.kind == "ident":
            self.pos += 1
            if tok.text in VARIABLES:
                return Var(tok.text)
            if tok.text in FUNCTIONS:
                if self._accept("(") is None:
                    self._error(f"'(' after {tok.text}")
                arg = self.expr()
                if self._accept(")") is None:
                    self._error("')'")
                return Call(tok.text, arg)
            raise UnknownIdentifierError(tok.text, tok.offset, self.source)
        if self._accept("(") is not None:
            node = self.expr()
            if self._accept(")") is None:
                self._error("')'")
            return node
        self._error("a number, variable, function or '('")


def parse(source: str) -> Expr:
    if not source or not source.strip():
        raise ExprSyntaxError("empty expression", 0, source or "")
    return _Parser(source).parse()


# --------------------------------------------------------------------------
# printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _fmt_number(v: float) -> str:
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _prec(node: Expr) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    if isinstance(node, Pow):
        return 4
    if isinstance(node, Num) and node.value < 0:
        return 0
    return 5


def _wrap(node: Expr, parens: bool) -> str:
    s = to_source(node)
    return f"({s})" if parens else s


def to_source(node: Expr) -> str:
    """Render an expression that parses back to the same tree."""
    if isinstance(node, Num):
        return _fmt_number(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return "-" + _wrap(node.arg, _prec(node.arg) < 3)
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        return (
            _wrap(node.left, _prec(node.left) < p)
            + node.op
            + _wrap(node.right, _prec(node.right) <= p)
        )
    if isinstance(node, Pow):
        e = _fmt_number(node.exponent)
        if node.exponent < 0:
            e = f"({e})"
        return _wrap(node.base, _prec(node.base) <= 4) + "^" + e
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def variables(node: Expr) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, (Neg, Call)):
        return variables(node.arg)
    if isinstance(node, Pow):
        return variables(node.base)
    return variables(node.left) | variables(node.right)


# --------------------------------------------------------------------------
# evaluation

_UNARY = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "ln": np.log, "sqrt": np.sqrt}


def _eval(node, env):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -_eval(node.arg, env)
    if isinstance(node, BinOp):
        left = _eval(node.left, env)
        right = _eval(node.right, env)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if np.any(np.asarray(right) == 0):
            raise EvalDomainError("division by zero", to_source(node))
        return left / right
    if isinstance(node, Pow):
        base = _eval(node.base, env)
        e = node.exponent
        if e < 0 and np.any(np.asarray(base) == 0):
            raise EvalDomainError("zero raised to a negative power", to_source(node))
        if e.is_integer():
            return np.power(base, int(e))
        if np.any(np.asarray(base) < 0):
            raise EvalDomainError("negative base with fractional exponent", to_source(node))
        return np.power(base, e)
    if isinstance(node, Call):
        arg = _eval(node.arg, env)
        if node.func == "ln" and np.any(np.asarray(arg) <= 0):
            raise EvalDomainError("ln of a non-positive argument", to_source(node))
        if node.func == "sqrt" and np.any(np.asarray(arg) < 0):
            raise EvalDomainError("sqrt of a negative argument", to_source(node))
        return _UNARY[node.func](arg)
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(node: Expr, eta=0.0, xi=0.0):
    """Evaluate at ``(eta, xi)``; scalars in give a float out, arrays broadcast."""
    scalar = np.ndim(eta) == 0 and np.ndim(xi) == 0
    env = {
        "eta": np.asarray(eta, dtype=float),
        "xi": np.asarray(xi, dtype=float),
    }
    if scalar:
        env = {k: np.float64(v) for k, v in env.items()}
    with np.errstate(over="ignore", invalid="ignore"):
        out = _eval(node, env)
    if scalar:
        return float(out)
    return np.broadcast_to(out, np.broadcast(env["eta"], env["xi"]).shape).astype(float)


# --------------------------------------------------------------------------
# differentiation

ZERO = Num(0.0)
ONE = Num(1.0)


def _num(node, value=None):
    return isinstance(node, Num) and (value is None or node.value == value)


def _add(u, v):
    if _num(u) and _num(v):
        return Num(u.value + v.value)
    if _num(u, 0.0):
        return v
    if _num(v, 0.0):
        return u
    return BinOp("+", u, v)


def _sub(u, v):
    if _num(u) and _num(v):
        return Num(u.value - v.value)
    if _num(v, 0.0):
        return u
    if _num(u, 0.0):
        return _neg(v)
    return BinOp("-", u, v)


def _neg(u):
    if _num(u):
        return Num(-u.value)
    if isinstance(u, Neg):
        return u.arg
    return Neg(u)


def _mul(u, v):
    if _num(u) and _num(v):
        return Num(u.value * v.value)
    if _num(u, 0.0) or _num(v, 0.0):
        return ZERO
    if _num(u, 1.0):
        return v
    if _num(v, 1.0):
        return u
    return BinOp("*", u, v)


def _div(u, v):
    if _num(u, 0.0):
        return ZERO
    if _num(v, 1.0):
        return u
    return BinOp("/", u, v)


def _pow(u, e: float):
    if e == 0.0:
        return ONE
    if e == 1.0:
        return u
    return Pow(u, e)


def differentiate(node: Expr, var: str) -> Expr:
    """Symbolic partial derivative with light constant folding."""
    d = lambda n: differentiate(n, var)  # noqa: E731
    if isinstance(node, Num):
        return ZERO
    if isinstance(node, Var):
        return ONE if node.name == var else ZERO
    if isinstance(node, Neg):
        return _neg(d(node.arg))
    if isinstance(node, BinOp):
        u, v = node.left, node.right
        du, dv = d(u), d(v)
        if node.op == "+":
            return _add(du, dv)
        if node.op == "-":
            return _sub(du, dv)
        if node.op == "*":
            return _add(_mul(du, v), _mul(u, dv))
        # quotient rule, split so a constant denominator stays simple
        return _sub(_div(du, v), _div(_mul(u, dv), _pow(v, 2.0)))
    if isinstance(node, Pow):
        du = d(node.base)
        e = node.exponent
        return _mul(_mul(Num(e), _pow(node.base, e - 1.0)), du)
    if isinstance(node, Call):
        u = node.arg
        du = d(u)
        if _num(du, 0.0):
            return ZERO
        if node.func == "sin":
            return _mul(Call("cos", u), du)
        if node.func == "cos":
            return _neg(_mul(Call("sin", u), du))
        if node.func == "exp":
            return _mul(node, du)
        if node.func == "ln":
            return _div(du, u)
        if node.func == "sqrt":
            return _div(du, _mul(Num(2.0), node))
    raise TypeError(f"not an expression node: {node!r}")


def differentiate_xi(node: Expr) -> Expr:
    return differentiate(node, "xi")
