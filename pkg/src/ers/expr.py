"""Arithmetic expressions for the command line: parsing, printing and
compilation to either backend.

Grammar, loosest binding first::

    sum    := prod (('+' | '-') prod)*
    prod   := power ('*' power)*
    power  := unary ('^' INT)*
    unary  := '-' unary | atom
    atom   := literal | name '(' args ')' | name | '(' sum ')'

Literals are ``a``, ``a/b`` or ``a/b^e`` with a power-of-two denominator, or
decimals such as ``0.25``.  Subtraction is sugar for adding a negation.  The
name ``third`` is reserved for the exact constant 1/3.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

from . import boehm
from . import signed_digit as sd

THIRD = "third"
FUNCTIONS = {"neg": 1, "mid": 2, "abs": 1, "pow": 2}


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class BackendError(ValueError):
    """A construct the chosen backend cannot express."""


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class DyadicLit:
    num: int
    exp: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.num, 2 ** self.exp) if self.exp >= 0 else Fraction(self.num * 2 ** -self.exp)


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mid:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    n: int


@dataclass(frozen=True)
class Abs:
    arg: "Expr"


Expr = Union[Var, DyadicLit, Neg, Add, Mul, Mid, Pow, Abs]


# tokens

_TOKEN = re.compile(r"\s*(?:(\d+\.\d+|\d+)|([A-Za-z_][A-Za-z_0-9]*)|(<=|>=|[-+*/^(),]))")


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    src = src.rstrip()
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            pos += len(src[pos:]) - len(src[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", pos)
        start = m.start(m.lastindex)
        kind = ("num", "name", "sym")[m.lastindex - 1]
        out.append((kind, m.group(m.lastindex), start))
        pos = m.end()
    out.append(("end", "", len(src)))
    return out


def _dyadic(value: Fraction, pos: int) -> DyadicLit:
    den = value.denominator
    if den & (den - 1):
        raise ExprSyntaxError(f"literal {value} is not dyadic", pos)
    return DyadicLit(value.numerator, den.bit_length() - 1)


class _Parser:
    def __init__(self, src: str):
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, sym: str) -> None:
        kind, text, pos = self.take()
        if text != sym or kind != "sym":
            raise ExprSyntaxError(f"expected {sym!r}, got {text or 'end of input'!r}", pos)

    def at_sym(self, *syms: str) -> bool:
        kind, text, _ = self.peek()
        return kind == "sym" and text in syms

    def integer(self) -> int:
        kind, text, pos = self.take()
        if kind != "num" or "." in text:
            raise ExprSyntaxError("expected an integer", pos)
        return int(text)

    def sum(self) -> Expr:
        e = self.prod()
        while self.at_sym("+", "-"):
            op = self.take()[1]
            rhs = self.prod()
            e = Add(e, rhs if op == "+" else Neg(rhs))
        return e

    def prod(self) -> Expr:
        e = self.power()
        while self.at_sym("*"):
            self.take()
            e = Mul(e, self.power())
        return e

    def power(self) -> Expr:
        e = self.unary()
        while self.at_sym("^"):
            self.take()
            e = Pow(e, self.integer())
        return e

    def unary(self) -> Expr:
        if self.at_sym("-"):
            self.take()
            return Neg(self.unary())
        return self.atom()

    def literal(self, text: str, pos: int) -> DyadicLit:
        value = Fraction(text)
        if self.at_sym("/"):
            self.take()
            den = self.integer()
            if self.at_sym("^"):
                self.take()
                den = den ** self.integer()
            if den == 0:
                raise ExprSyntaxError("zero denominator", pos)
            value /= den
        return _dyadic(value, pos)

    def atom(self) -> Expr:
        kind, text, pos = self.take()
        if kind == "num":
            return self.literal(text, pos)
        if kind == "name":
            if not self.at_sym("("):
                if text in FUNCTIONS:
                    raise ExprSyntaxError(f"function {text} needs arguments", pos)
                return Var(text)
            if text not in FUNCTIONS:
                raise ExprSyntaxError(f"unknown function {text!r}", pos)
            self.take()
            args = [self.sum()]
            while self.at_sym(","):
                self.take()
                if text == "pow" and len(args) == 1:
                    args.append(self.integer())
                else:
                    args.append(self.sum())
            self.expect(")")
            if len(args) != FUNCTIONS[text]:
                raise ExprSyntaxError(f"{text} takes {FUNCTIONS[text]} arguments", pos)
            if text == "neg":
                return Neg(args[0])
            if text == "abs":
                return Abs(args[0])
            if text == "mid":
                return Mid(args[0], args[1])
            return Pow(args[0], args[1])
        if kind == "sym" and text == "(":
            e = self.sum()
            self.expect(")")
            return e
        raise ExprSyntaxError(f"unexpected {text or 'end of input'!r}", pos)


def parse_expr(src: str) -> Expr:
    p = _Parser(src)
    e = p.sum()
    kind, text, pos = p.peek()
    if kind != "end":
        raise ExprSyntaxError(f"unexpected {text!r}", pos)
    return e


def to_source(e: Expr) -> str:
    """Fully bracketed source text that parses back to ``e``."""
    if isinstance(e, Var):
        return e.name
    if isinstance(e, DyadicLit):
        if e.num < 0 or e.exp < 0:
            return to_source(Neg(DyadicLit(-e.num, e.exp))) if e.num < 0 else str(e.num * 2 ** -e.exp)
        return f"{e.num}/2^{e.exp}"
    if isinstance(e, Neg):
        return f"neg({to_source(e.arg)})"
    if isinstance(e, Abs):
        return f"abs({to_source(e.arg)})"
    if isinstance(e, Mid):
        return f"mid({to_source(e.left)}, {to_source(e.right)})"
    if isinstance(e, Pow):
        return f"pow({to_source(e.base)}, {e.n})"
    if isinstance(e, Add):
        return f"({to_source(e.left)} + {to_source(e.right)})"
    if isinstance(e, Mul):
        return f"({to_source(e.left)} * {to_source(e.right)})"
    raise TypeError(e)


def free_vars(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return set() if e.name == THIRD else {e.name}
    if isinstance(e, DyadicLit):
        return set()
    if isinstance(e, (Neg, Abs)):
        return free_vars(e.arg)
    if isinstance(e, Pow):
        return free_vars(e.base)
    return free_vars(e.left) | free_vars(e.right)


# predicates

@dataclass(frozen=True)
class Predicate:
    lhs: Expr
    rhs: Expr
    relation: str  # le, ge or close


def parse_predicate(src: str) -> Predicate:
    """``A <= B``, ``A >= B``, or ``abs(A - B) <= eps`` for closeness."""
    m = re.search(r"<=|>=", src)
    if not m:
        raise ExprSyntaxError("expected '<=' or '>='", len(src))
    left, right = src[:m.start()], src[m.end():]
    rel = "le" if m.group() == "<=" else "ge"
    lhs = parse_expr(left)
    if right.strip() == "eps":
        if rel != "le" or not isinstance(lhs, Abs):
            raise ExprSyntaxError("'eps' needs the form abs(A - B) <= eps", m.end())
        inner = lhs.arg
        if isinstance(inner, Add) and isinstance(inner.right, Neg):
            return Predicate(inner.left, inner.right.arg, "close")
        return Predicate(inner, DyadicLit(0, 0), "close")
    try:
        rhs = parse_expr(right)
    except ExprSyntaxError as err:
        raise ExprSyntaxError(str(err).rsplit(" at position", 1)[0], err.pos + m.end()) from None
    return Predicate(lhs, rhs, rel)


# compilation

_THIRD_TB = boehm.tb_third()


def to_term(e: Expr, variables) -> boehm.Term:
    """Boehm term for ``e``; ``variables`` is a list of names (numbered in
    order) or a mapping from names to terms."""
    env = variables if isinstance(variables, dict) else {v: boehm.var(i) for i, v in enumerate(variables)}
    return _term(e, env)


def _term(e: Expr, env: dict) -> boehm.Term:
    if isinstance(e, Var):
        if e.name == THIRD:
            return boehm.enc(_THIRD_TB)
        if e.name not in env:
            raise BackendError(f"unbound variable {e.name!r}")
        return env[e.name]
    if isinstance(e, DyadicLit):
        return boehm.const(boehm.Dyadic(e.num, e.exp))
    if isinstance(e, Neg):
        return -_term(e.arg, env)
    if isinstance(e, Abs):
        return boehm.t_abs(_term(e.arg, env))
    if isinstance(e, Pow):
        if e.n == 0:
            return boehm.const(1)
        return boehm.t_pow(_term(e.base, env), e.n)
    if isinstance(e, Mid):
        return boehm.t_mid(_term(e.left, env), _term(e.right, env))
    if isinstance(e, Add):
        return _term(e.left, env) + _term(e.right, env)
    if isinstance(e, Mul):
        return _term(e.left, env) * _term(e.right, env)
    raise TypeError(e)


def compile_boehm(e: Expr, variables: list[str]) -> boehm.CFunction:
    return boehm.CFunction.of(to_term(e, variables), len(variables))


@dataclass
class SDFunction:
    """Stream function with its modulus: ``modulus(eps)`` maps each variable
    to the prefix length its inputs must share for eps-close outputs."""
    fn: Callable[..., sd.Stream]
    modulus: Callable[[int], dict[str, int]]
    variables: list[str]

    def __call__(self, *xs: sd.Stream) -> sd.Stream:
        return self.fn(*xs)

    def delta(self, eps: int) -> int:
        req = self.modulus(eps)
        return max([req.get(v, 0) for v in self.variables], default=0)


def _merge_req(a: dict[str, int], b: dict[str, int]) -> dict[str, int]:
    out = dict(a)
    for k, v in b.items():
        out[k] = max(out.get(k, 0), v)
    return out


def _sd_parts(e: Expr, variables: list[str]):
    """(builder(env) -> stream, requirement(eps) -> {var: prefix length})."""
    if isinstance(e, Var):
        if e.name == THIRD:
            return (lambda env: sd.third()), (lambda eps: {})
        if e.name not in variables:
            raise BackendError(f"unbound variable {e.name!r}")
        name = e.name
        return (lambda env: env[name]), (lambda eps: {name: eps} if eps > 0 else {})
    if isinstance(e, DyadicLit):
        if not -1 <= e.value <= 1:
            raise BackendError(f"literal {e.value} outside [-1, 1]")
        value = e.value
        return (lambda env: sd.from_dyadic(value)), (lambda eps: {})
    if isinstance(e, (Add, Abs)):
        word = "addition" if isinstance(e, Add) else "abs"
        raise BackendError(f"{word} unavailable on signed-digit backend")
    if isinstance(e, Neg):
        b, r = _sd_parts(e.arg, variables)
        return (lambda env: sd.neg(b(env))), (lambda eps: r(sd.neg_modulus(eps)))
    if isinstance(e, Pow):
        if e.n == 0:
            return _sd_parts(DyadicLit(1, 0), variables)
        acc = e.base
        for _ in range(e.n - 1):
            acc = Mul(e.base, acc)
        return _sd_parts(acc, variables)
    if isinstance(e, (Mid, Mul)):
        bl, rl = _sd_parts(e.left, variables)
        br, rr = _sd_parts(e.right, variables)
        if isinstance(e, Mid):
            def req(eps):
                if eps <= 0:
                    return {}
                da, db = sd.mid_modulus(eps)
                return _merge_req(rl(da), rr(db))
            return (lambda env: sd.mid(bl(env), br(env))), req

        def req_mul(eps):
            if eps <= 0:
                return {}
            da, db = sd.mul_modulus(eps)
            return _merge_req(rl(da), rr(db))
        return (lambda env: sd.mul(bl(env), br(env))), req_mul
    raise TypeError(e)


def compile_sd(e: Expr, variables: list[str]) -> SDFunction:
    build, req = _sd_parts(e, variables)

    def fn(*xs: sd.Stream) -> sd.Stream:
        if len(xs) != len(variables):
            raise ValueError(f"expected {len(variables)} arguments, got {len(xs)}")
        return build(dict(zip(variables, xs)))
    return SDFunction(fn, req, list(variables))


def compile_expr(e: Expr, backend: str, variables: list[str] | None = None):
    if variables is None:
        variables = sorted(free_vars(e))
    if backend == "boehm":
        return compile_boehm(e, variables)
    if backend == "signed-digit":
        return compile_sd(e, variables)
    raise ValueError(f"unknown backend {backend!r}")
