"""Closed-form coordinate expressions and second-order forward-mode jets.

Expressions are immutable trees over variables ``t1..tn`` (or another prefix),
the constants ``pi`` and ``e``, the arithmetic operators ``+ - * / ^`` with
``^`` binding tightest and associating right, unary minus, and the functions
sin cos tan exp log sqrt atan sinh cosh.

Evaluation propagates value, gradient and Hessian in one pass.  Points may be
a single parameter vector of shape ``(n,)`` or a batch of shape ``(n, ...)``;
jet fields then carry matching trailing axes, which is what makes quadrature
over large tensor grids cheap.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ExprDomainError, ExprSyntaxError

__all__ = [
    "Expr", "Num", "Const", "Var", "Neg", "BinOp", "Call", "Jet2",
    "parse", "to_text", "eval_jet2", "eval_value", "substitute",
    "const_value",
]


class Expr:
    """Marker base class for expression nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Const(Expr):
    name: str  # "pi" or "e"


@dataclass(frozen=True)
class Var(Expr):
    index: int  # 0-based slot into the parameter vector


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - * / ^
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr


CONSTANTS = {"pi": math.pi, "e": math.e}

# func -> (f, f', f'') as numpy-vectorized callables
FUNCTIONS = {
    "sin": (np.sin, np.cos, lambda u: -np.sin(u)),
    "cos": (np.cos, lambda u: -np.sin(u), lambda u: -np.cos(u)),
    "tan": (np.tan, lambda u: 1.0 / np.cos(u) ** 2,
            lambda u: 2.0 * np.tan(u) / np.cos(u) ** 2),
    "exp": (np.exp, np.exp, np.exp),
    "log": (np.log, lambda u: 1.0 / u, lambda u: -1.0 / u ** 2),
    "sqrt": (np.sqrt, lambda u: 0.5 / np.sqrt(u),
             lambda u: -0.25 * u ** -1.5),
    "atan": (np.arctan, lambda u: 1.0 / (1.0 + u ** 2),
             lambda u: -2.0 * u / (1.0 + u ** 2) ** 2),
    "sinh": (np.sinh, np.cosh, np.sinh),
    "cosh": (np.cosh, np.sinh, np.cosh),
}


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(r"""
    (?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[+\-*/^()])
  | (?P<ws>\s+)
""", re.VERBOSE)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    """Return (kind, lexeme, offset) triples; offsets are 1-based."""
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(
                f"unexpected character {text[pos]!r} at offset {pos + 1}",
                location={"offset": pos + 1})
        pos = m.end()
        kind = m.lastgroup
        if kind == "ws":
            continue
        toks.append((kind, m.group(), m.start() + 1))
    toks.append(("end", "", len(text) + 1))
    return toks


class _Parser:
    def __init__(self, text: str, arity: int, var_prefix: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.arity = arity
        self.var_prefix = var_prefix

    def peek(self):
        return self.toks[self.i]

    def advance(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, msg: str, offset: int):
        raise ExprSyntaxError(f"{msg} at offset {offset}",
                              location={"offset": offset})

    def parse_sum(self) -> Expr:
        e = self.parse_term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.advance()[1]
            e = BinOp(op, e, self.parse_term())
        return e

    def parse_term(self) -> Expr:
        e = self.parse_unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.advance()[1]
            e = BinOp(op, e, self.parse_unary())
        return e

    def parse_unary(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.advance()
            inner = self.parse_unary()
            # fold a negated literal into the literal itself; power binds
            # tighter, so "-2^2" never reaches here with a bare Num
            if isinstance(inner, Num):
                return Num(-inner.value)
            return Neg(inner)
        return self.parse_power()

    def parse_power(self) -> Expr:
        e = self.parse_atom()
        if self.peek()[:2] == ("op", "^"):
            self.advance()
            # exponent may carry its own sign; right-associative
            return BinOp("^", e, self.parse_unary())
        return e

    def parse_atom(self) -> Expr:
        kind, lex, off = self.advance()
        if kind == "num":
            return Num(float(lex))
        if kind == "op" and lex == "(":
            e = self.parse_sum()
            kind, lex, off = self.advance()
            if (kind, lex) != ("op", ")"):
                self.fail("expected ')'", off)
            return e
        if kind == "name":
            if lex in CONSTANTS:
                return Const(lex)
            if lex in FUNCTIONS:
                kind2, lex2, off2 = self.advance()
                if (kind2, lex2) != ("op", "("):
                    self.fail(f"function {lex!r} needs '('", off2)
                arg = self.parse_sum()
                kind2, lex2, off2 = self.advance()
                if (kind2, lex2) != ("op", ")"):
                    self.fail("expected ')'", off2)
                return Call(lex, arg)
            m = re.fullmatch(re.escape(self.var_prefix) + r"(\d+)", lex)
            if m:
                idx = int(m.group(1))
                if not 1 <= idx <= self.arity:
                    self.fail(
                        f"variable {lex!r} out of range for arity {self.arity}",
                        off)
                return Var(idx - 1)
            self.fail(f"unknown name {lex!r}", off)
        self.fail(f"unexpected token {lex!r}" if lex else "unexpected end of input",
                  off)


def parse(text: str, arity: int, var_prefix: str = "t") -> Expr:
    """Parse ``text`` into an Expr with variables ``<prefix>1..<prefix><arity>``.

    Syntax errors carry the 1-based byte offset of the offending token.
    """
    p = _Parser(text, arity, var_prefix)
    e = p.parse_sum()
    kind, lex, off = p.peek()
    if kind != "end":
        p.fail(f"unexpected token {lex!r}", off)
    return e


def to_text(e: Expr, var_prefix: str = "t") -> str:
    """Canonical fully-parenthesized rendering; parse(to_text(e)) == e."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Const):
        return e.name
    if isinstance(e, Var):
        return f"{var_prefix}{e.index + 1}"
    if isinstance(e, Neg):
        return f"(-{to_text(e.arg, var_prefix)})"
    if isinstance(e, BinOp):
        return f"({to_text(e.left, var_prefix)} {e.op} {to_text(e.right, var_prefix)})"
    if isinstance(e, Call):
        return f"{e.func}({to_text(e.arg, var_prefix)})"
    raise TypeError(f"not an Expr: {e!r}")


def substitute(e: Expr, replacements: dict[int, Expr]) -> Expr:
    """Replace Var(i) by replacements[i] where present (used for
    reparametrizations and for composing perturbations)."""
    if isinstance(e, Var):
        return replacements.get(e.index, e)
    if isinstance(e, Neg):
        return Neg(substitute(e.arg, replacements))
    if isinstance(e, BinOp):
        return BinOp(e.op, substitute(e.left, replacements),
                     substitute(e.right, replacements))
    if isinstance(e, Call):
        return Call(e.func, substitute(e.arg, replacements))
    return e


def const_value(e: Expr) -> float | None:
    """Value of a variable-free expression, else None."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Const):
        return CONSTANTS[e.name]
    if isinstance(e, Var):
        return None
    if isinstance(e, Neg):
        v = const_value(e.arg)
        return None if v is None else -v
    if isinstance(e, BinOp):
        a, b = const_value(e.left), const_value(e.right)
        if a is None or b is None:
            return None
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            if b == 0:
                raise ExprDomainError(f"division by zero in {to_text(e)}")
            return a / b
        if e.op == "^":
            return float(a) ** float(b)
    if isinstance(e, Call):
        v = const_value(e.arg)
        if v is None:
            return None
        return float(FUNCTIONS[e.func][0](v))
    raise TypeError(f"not an Expr: {e!r}")


# ---------------------------------------------------------------------------
# jets

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class Jet2:
    """Value, gradient and (symmetric) Hessian at a point or point batch."""

    value: ArrayLike
    grad: np.ndarray   # (n, ...) leading axis over variables
    hess: np.ndarray   # (n, n, ...)


def _outer(ga: np.ndarray, gb: np.ndarray) -> np.ndarray:
    # (n,...) x (n,...) -> (n,n,...)
    return ga[:, None] * gb[None, :]


def _first_bad(mask: np.ndarray, pts: np.ndarray) -> dict:
    flat = np.argwhere(np.asarray(mask).reshape(-1))
    if flat.size == 0:
        return {}
    j = int(flat[0][0])
    t = pts.reshape(pts.shape[0], -1)[:, j]
    return {"t": [float(v) for v in t]}


def _eval(e: Expr, pts: np.ndarray):
    n = pts.shape[0]
    shape = pts.shape[1:]

    def zeros_g():
        return np.zeros((n,) + shape)

    def zeros_h():
        return np.zeros((n, n) + shape)

    if isinstance(e, Num):
        return np.full(shape, e.value), zeros_g(), zeros_h()
    if isinstance(e, Const):
        return np.full(shape, CONSTANTS[e.name]), zeros_g(), zeros_h()
    if isinstance(e, Var):
        g = zeros_g()
        g[e.index] = 1.0
        return pts[e.index].copy(), g, zeros_h()
    if isinstance(e, Neg):
        v, g, h = _eval(e.arg, pts)
        return -v, -g, -h
    if isinstance(e, BinOp):
        if e.op == "^":
            return _eval_pow(e, pts)
        va, ga, ha = _eval(e.left, pts)
        vb, gb, hb = _eval(e.right, pts)
        if e.op == "+":
            return va + vb, ga + gb, ha + hb
        if e.op == "-":
            return va - vb, ga - gb, ha - hb
        if e.op == "*":
            return (va * vb, ga * vb + va * gb,
                    ha * vb + va * hb + _outer(ga, gb) + _outer(gb, ga))
        if e.op == "/":
            bad = vb == 0.0
            if np.any(bad):
                raise ExprDomainError(
                    f"division by zero in {to_text(e)}",
                    location=_first_bad(bad, pts))
            v = va / vb
            g = (ga - v * gb) / vb
            h = (ha - _outer(g, gb) - _outer(gb, g) - v * hb) / vb
            return v, g, h
    if isinstance(e, Call):
        u, gu, hu = _eval(e.arg, pts)
        if e.func in ("log", "sqrt"):
            bad = u <= 0.0
            if np.any(bad):
                raise ExprDomainError(
                    f"{e.func} of non-positive argument in {to_text(e)}",
                    location=_first_bad(bad, pts))
        f, f1, f2 = FUNCTIONS[e.func]
        d1 = f1(u)
        return f(u), d1 * gu, d1 * hu + f2(u) * _outer(gu, gu)
    raise TypeError(f"not an Expr: {e!r}")


def _eval_pow(e: BinOp, pts: np.ndarray):
    k = const_value(e.right)
    va, ga, ha = _eval(e.left, pts)
    if k is not None and float(k).is_integer():
        k = int(k)
        # integer exponents are valid for any base
        if k < 0 and np.any(va == 0.0):
            raise ExprDomainError(
                f"zero base with negative exponent in {to_text(e)}",
                location=_first_bad(va == 0.0, pts))
        if k == 0:
            z = np.zeros_like(ga)
            return np.ones_like(va), z, np.zeros_like(ha)
        v = va ** k
        d1 = k * va ** (k - 1)
        d2 = k * (k - 1) * (va ** (k - 2) if k != 1 else np.zeros_like(va))
        return v, d1 * ga, d1 * ha + d2 * _outer(ga, ga)
    # general exponent: positive base only
    bad = va <= 0.0
    if np.any(bad):
        raise ExprDomainError(
            f"non-integer exponent needs positive base in {to_text(e)}",
            location=_first_bad(bad, pts))
    vb, gb, hb = _eval(e.right, pts)
    lv = np.log(va)
    v = np.exp(vb * lv)
    q = gb * lv + vb * ga / va
    # dq_ij = hb_ij*log a + (gb_i ga_j + ga_i gb_j)/a + b*ha_ij/a - b*ga_i ga_j/a^2
    dq = (hb * lv + (_outer(gb, ga) + _outer(ga, gb)) / va
          + vb * ha / va - vb * _outer(ga, ga) / va ** 2)
    return v, v * q, v * (_outer(q, q) + dq)


def eval_jet2(e: Expr, point) -> Jet2:
    """Evaluate value/gradient/Hessian at ``point``.

    ``point`` has shape (n,) for a single evaluation or (n, ...) for a batch;
    the returned jet fields carry the same trailing axes.
    """
    pts = np.asarray(point, dtype=float)
    if pts.ndim == 0:
        raise ValueError("point must have shape (n,) or (n, ...)")
    v, g, h = _eval(e, pts)
    if pts.ndim == 1:
        return Jet2(float(v), g, h)
    return Jet2(v, g, h)


def _eval_value(e: Expr, pts: np.ndarray):
    shape = pts.shape[1:]
    if isinstance(e, Num):
        return np.full(shape, e.value)
    if isinstance(e, Const):
        return np.full(shape, CONSTANTS[e.name])
    if isinstance(e, Var):
        return pts[e.index].copy()
    if isinstance(e, Neg):
        return -_eval_value(e.arg, pts)
    if isinstance(e, BinOp):
        if e.op == "^":
            k = const_value(e.right)
            va = _eval_value(e.left, pts)
            if k is not None and float(k).is_integer():
                k = int(k)
                if k < 0 and np.any(va == 0.0):
                    raise ExprDomainError(
                        f"zero base with negative exponent in {to_text(e)}",
                        location=_first_bad(va == 0.0, pts))
                return va ** k
            bad = va <= 0.0
            if np.any(bad):
                raise ExprDomainError(
                    f"non-integer exponent needs positive base in {to_text(e)}",
                    location=_first_bad(bad, pts))
            return va ** _eval_value(e.right, pts)
        va = _eval_value(e.left, pts)
        vb = _eval_value(e.right, pts)
        if e.op == "+":
            return va + vb
        if e.op == "-":
            return va - vb
        if e.op == "*":
            return va * vb
        bad = vb == 0.0
        if np.any(bad):
            raise ExprDomainError(f"division by zero in {to_text(e)}",
                                  location=_first_bad(bad, pts))
        return va / vb
    if isinstance(e, Call):
        u = _eval_value(e.arg, pts)
        if e.func in ("log", "sqrt"):
            bad = u <= 0.0
            if np.any(bad):
                raise ExprDomainError(
                    f"{e.func} of non-positive argument in {to_text(e)}",
                    location=_first_bad(bad, pts))
        return FUNCTIONS[e.func][0](u)
    raise TypeError(f"not an Expr: {e!r}")


def eval_value(e: Expr, point) -> ArrayLike:
    """Evaluate the value alone; cheaper than a jet on large batches."""
    pts = np.asarray(point, dtype=float)
    if pts.ndim == 0:
        raise ValueError("point must have shape (n,) or (n, ...)")
    v = _eval_value(e, pts)
    return float(v) if pts.ndim == 1 else v
