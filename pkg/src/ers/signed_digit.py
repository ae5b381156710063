"""Ternary signed-digit streams over [-1, 1].

A stream ``a`` denotes ``sum(a[n] / 2**(n+1))``.  Streams are lazy and cache
every digit they produce, so repeated reads are free and always agree.
Intermediate quinary (-2..2) and nonary (-4..4) streams reuse the same class.
"""

from __future__ import annotations

import threading
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Iterable, Iterator, Sequence

DIGITS = (-1, 0, 1)


class Stream:
    """Memoised infinite sequence produced by a generator.

    The generator must be pure: the cache fill order never changes a value.
    """

    __slots__ = ("_source", "_cache", "_lock")

    def __init__(self, source: Iterator[Any]):
        self._source = source
        self._cache: list[Any] = []
        self._lock = threading.Lock()

    def at(self, n: int) -> Any:
        cache = self._cache
        if n < len(cache):
            return cache[n]
        if n < 0:
            raise IndexError(n)
        with self._lock:
            while len(cache) <= n:
                cache.append(next(self._source))
        return cache[n]

    def prefix(self, n: int) -> list[Any]:
        if n > 0:
            self.at(n - 1)
        return self._cache[:n]

    def __iter__(self) -> Iterator[Any]:
        i = 0
        while True:
            yield self.at(i)
            i += 1

    def drop(self, n: int) -> "Stream":
        def gen():
            i = n
            while True:
                yield self.at(i)
                i += 1
        return Stream(gen())

    def __repr__(self) -> str:
        return "Stream(" + ",".join(str(d) for d in self.prefix(8)) + ",...)"


SDStream = Stream


def repeat(d: Any) -> Stream:
    def gen():
        while True:
            yield d
    return Stream(gen())


def from_prefix(digits: Sequence[int], tail: int) -> Stream:
    """Finite prefix followed by ``tail`` forever."""
    digits = list(digits)

    def gen():
        yield from digits
        while True:
            yield tail
    return Stream(gen())


def from_function(f: Callable[[int], Any]) -> Stream:
    def gen():
        i = 0
        while True:
            yield f(i)
            i += 1
    return Stream(gen())


def parse_digits(text: str) -> Stream:
    """Parse fixtures like ``"0,1,-1,..."``; a trailing ``...`` repeats the last digit."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if parts and parts[-1] == "...":
        ds = [int(p) for p in parts[:-1]]
        if not ds:
            raise ValueError("no digits before '...'")
        return from_prefix(ds, ds[-1])
    return from_prefix([int(p) for p in parts], 0)


# digit arithmetic

def flip(d: int) -> int:
    return -d


def add3(a: int, b: int) -> int:
    return a + b


def add5(a: int, b: int) -> int:
    return a + b


def neg(a: Stream) -> Stream:
    return Stream(-d for d in a)


def zip_with(f: Callable[[Any, Any], Any], a: Stream, b: Stream) -> Stream:
    return Stream(f(x, y) for x, y in zip(a, b))


# div2' table: (pending digit, next digit) -> (output digit, new pending digit).
# Rows for even pending digits emit half of it and keep the next digit as is.
_DIV2_STEP: dict[tuple[int, int], tuple[int, int]] = {}
for _b in range(-2, 3):
    _DIV2_STEP[(-2, _b)] = (-1, _b)
    _DIV2_STEP[(0, _b)] = (0, _b)
    _DIV2_STEP[(2, _b)] = (1, _b)
_DIV2_STEP.update({
    (-1, -2): (-1, 0), (-1, -1): (-1, 1), (-1, 0): (0, -2), (-1, 1): (0, -1), (-1, 2): (0, 0),
    (1, -2): (0, 0), (1, -1): (0, 1), (1, 0): (0, 2), (1, 1): (1, -1), (1, 2): (1, 0),
})


def _div4_step(x: int, y: int) -> tuple[int, int]:
    # 2x + y = 8d + z with |z| <= 4 keeps the tail inside the nonary range
    t = 2 * x + y
    if t < -4:
        return -1, t + 8
    if t > 4:
        return 1, t - 8
    return 0, t


_DIV4_STEP: dict[tuple[int, int], tuple[int, int]] = {
    (x, y): _div4_step(x, y) for x in range(-4, 5) for y in range(-4, 5)
}


def _carry_automaton(table: dict[tuple[int, int], tuple[int, int]], src: Stream) -> Stream:
    def gen():
        it = iter(src)
        pending = next(it)
        for d in it:
            out, pending = table[(pending, d)]
            yield out
    return Stream(gen())


def div2(b: Stream) -> Stream:
    """Halve a quinary stream into a signed-digit stream."""
    return _carry_automaton(_DIV2_STEP, b)


def div4(g: Stream) -> Stream:
    """Quarter a nonary stream into a signed-digit stream."""
    return _carry_automaton(_DIV4_STEP, g)


def mid(a: Stream, b: Stream) -> Stream:
    return div2(zip_with(add3, a, b))


def big_mid_prime(zeta: Stream) -> Stream:
    """Nonary stream for the infinitary midpoint; ``zeta`` is a stream of streams."""
    def gen():
        head = zeta.at(0)
        i = 1
        while True:
            nxt = zeta.at(i)
            a, b, c = head.at(0), head.at(1), nxt.at(0)
            yield add5(add3(a, a), add3(b, c))
            head = mid(head.drop(2), nxt.drop(1))
            i += 1
    return Stream(gen())


def big_mid(zeta: Stream) -> Stream:
    """Weighted midpoint ``sum(zeta[n] / 2**(n+1))``."""
    return div4(big_mid_prime(zeta))


def digit_mul(d: int, b: Stream) -> Stream:
    if d == -1:
        return neg(b)
    if d == 0:
        return repeat(0)
    return b


def mul(a: Stream, b: Stream) -> Stream:
    return big_mid(Stream(digit_mul(d, b) for d in a))


# moduli of uniform continuity: output prefix length -> input prefix length(s)

def neg_modulus(eps: int) -> int:
    return eps


def div4_modulus(eps: int) -> int:
    return eps + 1


def div2_modulus(eps: int) -> int:
    return eps + 1


def mid_modulus(eps: int) -> tuple[int, int]:
    d = div2_modulus(eps)
    return d, d


@lru_cache(maxsize=None)
def big_mid_prime_modulus(eps: int) -> tuple[int, int]:
    """(d, delta): the first d streams must agree on their delta-prefixes."""
    if eps <= 0:
        return 0, 0
    if eps == 1:
        return 2, 2
    d, delta = big_mid_prime_modulus(eps - 1)
    # head digit reads zeta0[0:2], zeta1[0:1]; the tail is a mid of zeta0[2:], zeta1[1:]
    # followed by zeta[2:], so its own requirement shifts by one stream and three digits
    return max(2, d + 1), max(2, delta + 3)


def big_mid_modulus(eps: int) -> tuple[int, int]:
    # div4 reads one nonary digit ahead
    return big_mid_prime_modulus(eps + 1)


def mul_modulus(eps: int) -> tuple[int, int]:
    """Prefix lengths of (first, second) argument."""
    return big_mid_modulus(eps)


# closeness, order and conversions

def prefix_eq(a: Stream, b: Stream, n: int) -> bool:
    return all(a.at(i) == b.at(i) for i in range(n))


def closeness(a: Stream, b: Stream, cap: int) -> int:
    """Length of the longest common prefix, capped."""
    n = 0
    while n < cap and a.at(n) == b.at(n):
        n += 1
    return n


def integer_approx(a: Stream, n: int) -> int:
    """Level-n ternary code k with value in [k/2**n, (k+2)/2**n]."""
    k = -1
    for i in range(n):
        k = 2 * k + a.at(i) + 1
    return k


def approx_leq(a: Stream, b: Stream, eps: int) -> bool:
    return integer_approx(a, eps) <= integer_approx(b, eps)


def from_binary(bits: Iterable[int] | Callable[[int], int]) -> Stream:
    if callable(bits):
        return from_function(lambda i: 1 if bits(i) else -1)
    return Stream(1 if b else -1 for b in bits)


def from_dyadic(d: Fraction | int) -> Stream:
    """Greedy expansion: each digit minimises the remaining residual (ties go to 0)."""
    d = Fraction(d)
    if not -1 <= d <= 1:
        raise ValueError(f"{d} outside [-1, 1]")
    if d.denominator & (d.denominator - 1):
        raise ValueError(f"{d} is not dyadic")

    def gen():
        r = d
        while True:
            t = 2 * r
            best = min(DIGITS, key=lambda a: (abs(t - a), abs(a)))
            r = t - best
            yield best
    return Stream(gen())


def third() -> Stream:
    """1/3 = 0.010101... in binary."""
    return from_function(lambda i: i % 2)


def prefix_value(a: Stream, n: int) -> Fraction:
    return sum((Fraction(a.at(i), 2 ** (i + 1)) for i in range(n)), Fraction(0))


def to_rational_interval(a: Stream, n: int) -> tuple[Fraction, Fraction]:
    s = prefix_value(a, n)
    r = Fraction(1, 2 ** n)
    return s - r, s + r


def format_digits(a: Stream, n: int) -> str:
    return ",".join(str(d) for d in a.prefix(n))


ZERO = repeat(0)
