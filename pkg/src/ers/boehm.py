"""Ternary Boehm encodings: integer sequences ``x`` where ``(x[n], n)`` names the
interval ``[x[n]/2**n, (x[n]+2)/2**n]`` and each code sits below the previous one.

Arithmetic is built from dyadic interval approximators.  An approximator maps
input interval codes to an output interval code; ``complete`` turns it into a
function on encodings by reading inputs at the levels its modulus asks for and
rounding the output to a ternary code.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence


class ContractViolation(RuntimeError):
    """An approximator produced an output too wide for its declared modulus."""


# codes

class Dyadic(NamedTuple):
    num: int
    exp: int

    @staticmethod
    def of(value: Fraction | int | str) -> "Dyadic":
        if isinstance(value, str):
            return parse_dyadic(value)
        q = Fraction(value)
        den = q.denominator
        if den & (den - 1):
            raise ValueError(f"{q} is not dyadic")
        return Dyadic(q.numerator, den.bit_length() - 1)

    def normalised(self) -> "Dyadic":
        return Dyadic.of(self.fraction())

    def fraction(self) -> Fraction:
        if self.exp >= 0:
            return Fraction(self.num, 1 << self.exp)
        return Fraction(self.num << -self.exp)

    def __str__(self) -> str:
        d = self.normalised()
        return f"{d.num}/2^{d.exp}"


def parse_dyadic(text: str) -> Dyadic:
    """Accept ``num/2^exp``, integers, and decimals with a power-of-two denominator."""
    t = text.strip()
    if "/2^" in t:
        a, b = t.split("/2^")
        return Dyadic(int(a), int(b)).normalised()
    return Dyadic.of(Fraction(t))


class DyadicCode(NamedTuple):
    """Interval ``[k/2**p, c/2**p]``."""
    k: int
    c: int
    p: int

    def bounds(self) -> tuple[Fraction, Fraction]:
        return scaled(self.k, self.p), scaled(self.c, self.p)

    def width(self) -> Fraction:
        return scaled(self.c - self.k, self.p)


class TernaryCode(NamedTuple):
    """Interval ``[k/2**p, (k+2)/2**p]``."""
    k: int
    p: int

    def __str__(self) -> str:
        return f"{self.k}@{self.p}"

    def dyadic(self) -> DyadicCode:
        return DyadicCode(self.k, self.k + 2, self.p)

    def midpoint(self) -> Fraction:
        return scaled(self.k + 1, self.p)


def parse_code(text: str) -> TernaryCode:
    k, p = text.strip().split("@")
    return TernaryCode(int(k), int(p))


def scaled(k: int, p: int) -> Fraction:
    return Fraction(k, 1 << p) if p >= 0 else Fraction(k << -p)


def to_dyadic_interval(code: TernaryCode) -> tuple[Dyadic, Dyadic]:
    return Dyadic(code.k, code.p).normalised(), Dyadic(code.k + 2, code.p).normalised()


# structural operations

def down_left(k: int) -> int:
    return 2 * k


def down_mid(k: int) -> int:
    return 2 * k + 1


def down_right(k: int) -> int:
    return 2 * k + 2


def up_right(k: int) -> int:
    # floor division; matches the negsucc clause on negatives
    return k >> 1


def up_left(k: int) -> int:
    return up_right(k - 1)


def below(n: int, m: int) -> bool:
    return 2 * m <= n <= 2 * m + 2


def lift(k: int, levels: int) -> int:
    """``levels`` applications of up_right."""
    return k >> levels


def covers(outer: DyadicCode, inner: DyadicCode) -> bool:
    lo_o, hi_o = outer.bounds()
    lo_i, hi_i = inner.bounds()
    return lo_o <= lo_i and hi_i <= hi_o


def join_prime(d: DyadicCode) -> TernaryCode:
    """Narrowest ternary code covering ``d``, at level at most ``d.p + 1``."""
    k, c, p = d
    if k > c:
        raise ValueError(f"empty dyadic code {d}")
    # a level-q code has width 2**(1-q); start from the finest level whose width can fit
    span = c - k
    q = p + 1 if span == 0 else min(p + 1, p + 1 - (span - 1).bit_length())
    while True:
        shift = q - p
        kk = k << shift if shift >= 0 else k >> -shift
        # cover check: kk/2^q <= k/2^p and c/2^p <= (kk+2)/2^q
        if shift >= 0:
            ok = (kk + 2) >= (c << shift)
        else:
            ok = ((kk + 2) << -shift) >= c
        if ok:
            return TernaryCode(kk, q)
        q -= 1


# encodings

class TBEncoding:
    """Lazily computed, memoised ternary Boehm encoding."""

    __slots__ = ("_fn", "_cache")

    def __init__(self, fn: Callable[[int], int]):
        self._fn = fn
        self._cache: dict[int, int] = {}

    def at(self, n: int) -> int:
        v = self._cache.get(n)
        if v is None:
            v = self._fn(n)
            self._cache.setdefault(n, v)
        return v

    def code(self, n: int) -> TernaryCode:
        return TernaryCode(self.at(n), n)

    def interval(self, n: int) -> tuple[Fraction, Fraction]:
        return self.code(n).dyadic().bounds()

    def __repr__(self) -> str:
        return f"TBEncoding(at(0)={self.at(0)})"


@dataclass(frozen=True)
class CompactTB:
    """An encoding known to pass through ``anchor``."""
    enc: TBEncoding
    anchor: TernaryCode

    def at(self, n: int) -> int:
        return self.enc.at(n)

    def code(self, n: int) -> TernaryCode:
        return self.enc.code(n)


def _extend(k: int, p: int, n: int) -> int:
    # left-endpoint extension below p, up_right lifting above it
    return k << (n - p) if n >= p else k >> (p - n)


def tb_from_int(z: int) -> TBEncoding:
    return TBEncoding(lambda n: _extend(z, 0, n))


def tb_from_dyadic(d: Dyadic | Fraction | int) -> TBEncoding:
    if not isinstance(d, Dyadic):
        d = Dyadic.of(d)
    num, exp = d
    # floor(d * 2**n)
    return TBEncoding(lambda n: num << (n - exp) if n >= exp else num >> (exp - n))


def tb_third() -> TBEncoding:
    """1/3, via floor(2**n / 3)."""
    return TBEncoding(lambda n: (1 << n) // 3 if n >= 0 else 0)


def tb_from_ternary_code(code: TernaryCode) -> CompactTB:
    k, p = code
    return CompactTB(TBEncoding(lambda n: _extend(k, p, n)), code)


def path_code(anchor: TernaryCode, code: TernaryCode, n: int) -> int:
    """Level-n code on a below-chain from ``anchor`` down to ``code``.

    Between the two levels the chain follows the left-most route that still
    reaches ``code``; above the anchor it lifts with up_right and below
    ``code`` it extends by left endpoints.
    """
    ak, ap = anchor
    k, p = code
    if n <= ap:
        return ak >> (ap - n)
    if n >= p:
        return k << (n - p)
    s, t = p - ap, n - ap
    off = k - (ak << s)
    # offsets below the anchor at relative level t run over 0 .. 2**(t+1) - 2
    return (ak << t) + min(off >> (s - t), (2 << t) - 2)


def complete_candidate(anchor: TernaryCode, code: TernaryCode) -> CompactTB:
    """Encoding through both ``anchor`` and ``code`` (any code below it)."""
    if not is_below_anchor(anchor, code):
        raise ValueError(f"{code} is not below {anchor}")
    return CompactTB(TBEncoding(lambda n: path_code(anchor, code, n)), anchor)


def net(anchor: TernaryCode, delta: int) -> list[TernaryCode]:
    return list(iter_net(anchor, delta))


def iter_net(anchor: TernaryCode, delta: int):
    k, p = anchor
    if delta < p:
        raise ValueError(f"net level {delta} below anchor level {p}")
    base = k << (delta - p)
    for j in range(1 << (delta - p)):
        yield TernaryCode(base + 2 * j, delta)


def iter_codes(anchor: TernaryCode, delta: int):
    """Every level-delta code below ``anchor``, ascending.

    Completed functions read their inputs' exact codes, so these 2**(s+1) - 1
    codes (s = delta - anchor level) are all the inputs they can tell apart;
    the net holds only the even ones.
    """
    k, p = anchor
    if delta < p:
        raise ValueError(f"level {delta} below anchor level {p}")
    s = delta - p
    base = k << s
    for kk in range(base, base + (2 << s) - 1):
        yield TernaryCode(kk, delta)


def is_below_anchor(anchor: TernaryCode, code: TernaryCode) -> bool:
    k, p = anchor
    if code.p < p:
        return False
    off = code.k - (k << (code.p - p))
    return 0 <= off <= (2 << (code.p - p)) - 2


def in_net(anchor: TernaryCode, code: TernaryCode) -> bool:
    k, p = anchor
    if code.p < p:
        return False
    off = code.k - (k << (code.p - p))
    return off % 2 == 0 and 0 <= off < (2 << (code.p - p))


def tb_closeness(x: TBEncoding, y: TBEncoding, eps: int) -> bool:
    return abs(x.at(eps) - y.at(eps)) <= 1


def tb_approx_leq(x: TBEncoding, y: TBEncoding, eps: int) -> bool:
    return x.at(eps) <= y.at(eps)


# conversions with signed-digit streams

def sd_to_tb(alpha) -> CompactTB:
    from .signed_digit import integer_approx  # local: keeps module import order flexible

    def at(n: int) -> int:
        if n <= 0:
            return -1 >> -n
        return integer_approx(alpha, n)
    return CompactTB(TBEncoding(at), TernaryCode(-1, 0))


def tb_to_sd(x: CompactTB):
    from .signed_digit import Stream

    k, i = x.anchor

    def gen():
        prev = k
        n = i
        while True:
            nxt = x.at(n + 1)
            if not below(nxt, prev):
                raise ValueError(f"level {n + 1} code {nxt} is not below {prev}")
            yield nxt - 2 * prev - 1
            prev = nxt
            n += 1
    return Stream(gen())


# interval primitives on (k, c, p) triples

def _align(a, b):
    ka, ca, pa = a
    kb, cb, pb = b
    if pa == pb:
        return ka, ca, kb, cb, pa
    if pa < pb:
        s = pb - pa
        return ka << s, ca << s, kb, cb, pb
    s = pa - pb
    return ka, ca, kb << s, cb << s, pa


def iv_neg(a):
    return (-a[1], -a[0], a[2])


def iv_add(a, b):
    ka, ca, kb, cb, p = _align(a, b)
    return (ka + kb, ca + cb, p)


def iv_mid(a, b):
    ka, ca, kb, cb, p = _align(a, b)
    return (ka + kb, ca + cb, p + 1)


def iv_mul(a, b):
    k1, c1, p1 = a
    k2, c2, p2 = b
    x, y, z, w = k1 * k2, k1 * c2, c1 * k2, c1 * c2
    return (min(x, y, z, w), max(x, y, z, w), p1 + p2)


def iv_abs(a):
    k, c, p = a
    if k >= 0:
        return a
    if c <= 0:
        return (-c, -k, p)
    return (0, max(-k, c), p)


def iv_pow(a, n: int):
    k, c, p = a
    if n % 2 or k >= 0:
        return (k ** n, c ** n, p * n)
    if c <= 0:
        return (c ** n, k ** n, p * n)
    return (0, max(k ** n, c ** n), p * n)


def _magnitude(a) -> Fraction:
    k, c, p = a
    return scaled(max(abs(k), abs(c)), p)


# approximators

Gain = Callable[[Sequence[tuple]], tuple]


@dataclass(frozen=True)
class Approximator:
    """Dyadic interval approximator with a width-sensitivity bound.

    ``gain(boxes)`` returns per-input factors g_i such that, for inputs inside
    ``boxes``, the output width is at most ``sum(g_i * width_i)``.  The modulus
    follows from it: every input is read at the level that makes the output
    width at most ``1/2**n``.
    """
    arity: int
    fn: Callable[..., tuple]
    gain: Gain
    name: str = "f"

    def apply(self, *codes: DyadicCode) -> DyadicCode:
        return DyadicCode(*self.fn(*codes))

    def shift(self, boxes: Sequence[tuple] | None = None) -> int:
        """``s`` with modulus(n) = n + s for every input."""
        g = sum(self.gain(boxes), Fraction(0))
        if g == 0:
            return 0
        # need 2*g / 2**L <= 1/2**n, i.e. 2**(L-n) >= 2*g
        return ceil_log2(2 * g)

    def modulus(self, n: int, boxes: Sequence[tuple] | None = None) -> tuple[int, ...]:
        L = n + self.shift(boxes)
        return (L,) * self.arity


def ceil_log2(t: Fraction) -> int:
    """Smallest s with 2**s >= t > 0."""
    s = t.numerator.bit_length() - t.denominator.bit_length()
    while Fraction(2) ** s < t:
        s += 1
    while Fraction(2) ** (s - 1) >= t:
        s -= 1
    return s


def _needs_boxes(boxes, name):
    if boxes is None:
        raise ValueError(f"{name} modulus needs magnitude bounds for its inputs")
    return boxes


def approximator_neg() -> Approximator:
    return Approximator(1, iv_neg, lambda boxes: (Fraction(1),), "neg")


def approximator_add() -> Approximator:
    return Approximator(2, iv_add, lambda boxes: (Fraction(1), Fraction(1)), "add")


def approximator_mid() -> Approximator:
    return Approximator(2, iv_mid, lambda boxes: (Fraction(1, 2), Fraction(1, 2)), "mid")


def approximator_abs() -> Approximator:
    return Approximator(1, iv_abs, lambda boxes: (Fraction(1),), "abs")


def approximator_mul() -> Approximator:
    def gain(boxes):
        a, b = _needs_boxes(boxes, "mul")
        return (_magnitude(b), _magnitude(a))
    return Approximator(2, iv_mul, gain, "mul")


def approximator_pow(n: int) -> Approximator:
    if n < 1:
        raise ValueError("pow exponent must be at least 1")

    def gain(boxes):
        (a,) = _needs_boxes(boxes, "pow")
        return (n * _magnitude(a) ** (n - 1),)
    return Approximator(1, lambda a: iv_pow(a, n), gain, f"pow{n}")


# symbolic terms: bottom-up composition of approximators

class Term:
    """Expression over variables, exact dyadic constants and fixed encodings."""

    __slots__ = ("kind", "arg", "kids")

    def __init__(self, kind: str, arg=None, kids: tuple["Term", ...] = ()):
        self.kind = kind
        self.arg = arg
        self.kids = kids

    def __add__(self, other):
        return Term("add", None, (self, as_term(other)))

    def __radd__(self, other):
        return as_term(other) + self

    def __sub__(self, other):
        return self + (-as_term(other))

    def __rsub__(self, other):
        return as_term(other) - self

    def __neg__(self):
        return Term("neg", None, (self,))

    def __mul__(self, other):
        return Term("mul", None, (self, as_term(other)))

    def __rmul__(self, other):
        return as_term(other) * self

    def __pow__(self, n: int):
        return Term("pow", n, (self,))

    def has_vars(self) -> bool:
        if self.kind == "var":
            return True
        return any(k.has_vars() for k in self.kids)

    def __repr__(self) -> str:
        if self.kind == "var":
            return f"v{self.arg}"
        if self.kind == "const":
            return str(self.arg)
        if self.kind == "enc":
            return "enc"
        if self.kind == "pow":
            return f"pow({self.kids[0]!r},{self.arg})"
        return f"{self.kind}({','.join(repr(k) for k in self.kids)})"


def var(i: int = 0) -> Term:
    return Term("var", i)


def const(d: Dyadic | Fraction | int) -> Term:
    if not isinstance(d, Dyadic):
        d = Dyadic.of(d)
    return Term("const", d)


def enc(x: TBEncoding) -> Term:
    return Term("enc", x)


def as_term(x) -> Term:
    if isinstance(x, Term):
        return x
    if isinstance(x, TBEncoding):
        return enc(x)
    if isinstance(x, CompactTB):
        return enc(x.enc)
    return const(x)


def t_mid(a, b) -> Term:
    return Term("mid", None, (as_term(a), as_term(b)))


def t_abs(a) -> Term:
    return Term("abs", None, (as_term(a),))


def t_pow(a, n: int) -> Term:
    return Term("pow", n, (as_term(a),))


_BINARY = {"add": iv_add, "mid": iv_mid, "mul": iv_mul}
_UNARY = {"neg": iv_neg, "abs": iv_abs}


def _compile_term(t: Term, slot_of: Callable[[Term], int]):
    """Return (evaluate(args) -> triple, gain(boxes) -> {slot: factor}, box(boxes) -> triple)."""
    if t.kind in ("var", "enc"):
        i = slot_of(t)
        return (lambda args: args[i]), (lambda boxes: {i: Fraction(1)}), (lambda boxes: boxes[i])
    if t.kind == "const":
        num, exp = t.arg
        val = (num, num, exp)
        return (lambda args: val), (lambda boxes: {}), (lambda boxes: val)
    subs = [_compile_term(k, slot_of) for k in t.kids]
    if t.kind in _UNARY:
        op = _UNARY[t.kind]
        (ev, gn, bx), = subs
        return (lambda args: op(ev(args))), gn, (lambda boxes: op(bx(boxes)))
    if t.kind == "pow":
        n = t.arg
        (ev, gn, bx), = subs

        def gain_pow(boxes):
            factor = n * _magnitude(bx(boxes)) ** (n - 1)
            return {i: factor * g for i, g in gn(boxes).items()}
        return (lambda args: iv_pow(ev(args), n)), gain_pow, (lambda boxes: iv_pow(bx(boxes), n))
    if t.kind in _BINARY:
        op = _BINARY[t.kind]
        (ea, ga, ba), (eb, gb, bb) = subs
        if t.kind == "mul":
            def gain_bin(boxes):
                ma, mb = _magnitude(ba(boxes)), _magnitude(bb(boxes))
                return _merge(ga(boxes), mb, gb(boxes), ma)
        elif t.kind == "mid":
            def gain_bin(boxes):
                return _merge(ga(boxes), Fraction(1, 2), gb(boxes), Fraction(1, 2))
        else:
            def gain_bin(boxes):
                return _merge(ga(boxes), Fraction(1), gb(boxes), Fraction(1))
        return (lambda args: op(ea(args), eb(args))), gain_bin, (lambda boxes: op(ba(boxes), bb(boxes)))
    raise ValueError(f"unknown term kind {t.kind}")


def _merge(ga: dict, fa: Fraction, gb: dict, fb: Fraction) -> dict:
    out = {i: fa * g for i, g in ga.items()}
    for i, g in gb.items():
        out[i] = out.get(i, Fraction(0)) + fb * g
    return out


def compose(term: Term, nvars: int) -> tuple[Approximator, tuple[TBEncoding, ...]]:
    """Compile a term into one approximator over its variables followed by its
    fixed encodings; the encodings are returned so the caller can bind them."""
    encs: list[TBEncoding] = []
    enc_ids: dict[int, int] = {}

    def slot_of(t: Term) -> int:
        if t.kind == "var":
            if not 0 <= t.arg < nvars:
                raise ValueError(f"variable {t.arg} outside 0..{nvars - 1}")
            return t.arg
        key = id(t.arg)
        if key not in enc_ids:
            enc_ids[key] = nvars + len(encs)
            encs.append(t.arg)
        return enc_ids[key]

    ev, gn, _ = _compile_term(term, slot_of)
    arity = nvars + len(encs)

    def fn(*codes):
        return ev(codes)

    def gain(boxes):
        g = gn(boxes)
        return tuple(g.get(i, Fraction(0)) for i in range(arity))

    return Approximator(arity, fn, gain, repr(term)), tuple(encs)


# completion

def round_to_code(k: int, c: int, p: int, n: int) -> int:
    """Level-n ternary code centred on the midpoint of [k/2**p, c/2**p]:
    floor(mid * 2**n + 1/2) - 1."""
    e = p + 1 - n  # midpoint * 2**n = (k + c) / 2**e
    s = k + c
    if e >= 0:
        return ((2 * s + (1 << e)) >> (e + 1)) - 1
    return (s << -e) - 1


def code_range(out: tuple, n: int) -> tuple[int, int]:
    """Every code ``round_to_code`` can give for a sub-interval of ``out``."""
    k, c, p = out
    return round_to_code(k, k, p, n), round_to_code(c, c, p, n)


class Completion:
    """Shared state of ``complete``: boxes, modulus shift and base level.

    Output level n reads every input at level n + 1 + shift, producing an
    interval of width at most 1/2**(n+1); rounding its midpoint to the nearest
    level-n code keeps consecutive codes in the below relation because the
    midpoints of nested intervals that narrow move by at most 1/2**(n+1).
    Below the base level, inputs would be read outside their boxes, so the
    output is lifted from the base instead.
    """

    __slots__ = ("approx", "box_levels", "shift", "base")

    def __init__(self, approx: Approximator, boxes: Sequence[tuple], box_levels: Sequence[int]):
        self.approx = approx
        self.box_levels = tuple(box_levels)
        self.shift = approx.shift(boxes)
        self.base = (max(self.box_levels) if self.box_levels else 0) - 1 - self.shift

    def input_level(self, n: int) -> int:
        return max(n, self.base) + 1 + self.shift

    def code_from(self, n: int, codes: Sequence[tuple]) -> int:
        """Output code at level n >= base from inputs read at input_level(n)."""
        out = self.approx.fn(*codes)
        g = round_to_code(out[0], out[1], out[2], n)
        k, c, p = out
        # covered iff g/2^n <= k/2^p and c/2^p <= (g+2)/2^n
        if p >= n:
            ok = (g << (p - n)) <= k and c <= ((g + 2) << (p - n))
        else:
            ok = g <= (k << (n - p)) and (c << (n - p)) <= g + 2
        if not ok:
            raise ContractViolation(f"output {out} does not fit level {n} code {g}")
        return g


def complete(approx: Approximator, *args: TBEncoding | CompactTB,
             box_levels: Sequence[int] | None = None) -> TBEncoding:
    """Lift an approximator to encodings.

    ``box_levels[i]`` is the level whose code of argument i bounds its
    magnitude (default 0); all finer codes lie inside it.
    """
    if len(args) != approx.arity:
        raise ValueError(f"expected {approx.arity} arguments, got {len(args)}")
    encs = [a.enc if isinstance(a, CompactTB) else a for a in args]
    if box_levels is None:
        box_levels = [0] * len(encs)
    boxes = [(e.at(b), e.at(b) + 2, b) for e, b in zip(encs, box_levels)]
    state = Completion(approx, boxes, box_levels)

    def at(n: int) -> int:
        if n < state.base:
            return out.at(state.base) >> (state.base - n)
        L = state.input_level(n)
        codes = [(v, v + 2, L) for v in (e.at(L) for e in encs)]
        return state.code_from(n, codes)

    out = TBEncoding(at)
    return out


@dataclass
class CFunction:
    """Approximator with some trailing arguments bound to fixed encodings."""
    approximator: Approximator
    bound: tuple[TBEncoding, ...] = ()
    _states: dict = field(default_factory=dict, repr=False)

    @property
    def nvars(self) -> int:
        return self.approximator.arity - len(self.bound)

    @staticmethod
    def of(term: Term, nvars: int = 1) -> "CFunction":
        approx, encs = compose(term, nvars)
        return CFunction(approx, encs)

    def state(self, box_levels: Sequence[int], var_codes: Sequence[int]) -> Completion:
        key = (tuple(box_levels), tuple(var_codes))
        st = self._states.get(key)
        if st is None:
            boxes = [(k, k + 2, b) for k, b in zip(var_codes, box_levels)]
            boxes += [(e.at(0), e.at(0) + 2, 0) for e in self.bound]
            st = Completion(self.approximator, boxes, list(box_levels) + [0] * len(self.bound))
            self._states[key] = st
        return st

    def for_anchor(self, anchors: Sequence[TernaryCode]) -> Completion:
        return self.state([a.p for a in anchors], [a.k for a in anchors])

    def modulus(self, n: int, anchors: Sequence[TernaryCode]) -> int:
        """Input level read for output level n, uniform over the anchors."""
        return self.for_anchor(anchors).input_level(n)

    def bound_codes(self, L: int) -> list[tuple]:
        return [(v, v + 2, L) for v in (e.at(L) for e in self.bound)]

    def code_at(self, n: int, anchors: Sequence[TernaryCode], var_codes: Sequence[int]) -> int:
        """Level-n output code when the variables' codes at modulus(n) are ``var_codes``."""
        st = self.for_anchor(anchors)
        L = st.input_level(n)
        codes = [(v, v + 2, L) for v in var_codes] + self.bound_codes(L)
        if n >= st.base:
            return st.code_from(n, codes)
        return st.code_from(st.base, codes) >> (st.base - n)

    def bound_interval(self, n: int, anchors: Sequence[TernaryCode], var_boxes: Sequence[tuple]) -> tuple:
        """Output enclosure for variables ranging over ``var_boxes`` with the
        bound encodings read as at output level n."""
        L = self.for_anchor(anchors).input_level(n)
        return self.approximator.fn(*var_boxes, *self.bound_codes(L))

    def __call__(self, *xs: TBEncoding | CompactTB, box_levels: Sequence[int] | None = None) -> TBEncoding:
        if len(xs) != self.nvars:
            raise ValueError(f"expected {self.nvars} arguments, got {len(xs)}")
        if box_levels is None:
            box_levels = [x.anchor.p if isinstance(x, CompactTB) else 0 for x in xs]
        return complete(self.approximator, *xs, *self.bound,
                        box_levels=list(box_levels) + [0] * len(self.bound))
