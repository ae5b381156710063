"""Independent oracles shared by the tests: exact Fraction arithmetic and
random fixture generators.  Nothing here calls the interval code under test."""

from __future__ import annotations

import random
from fractions import Fraction

from ers import signed_digit as sd


def random_dyadic(rng: random.Random, depth: int = 10, lo: Fraction = Fraction(-1), hi: Fraction = Fraction(1)) -> Fraction:
    scale = 2 ** depth
    a, b = int(lo * scale), int(hi * scale)
    return Fraction(rng.randint(a, b), scale)


def random_digits(rng: random.Random, n: int) -> list[int]:
    return [rng.choice((-1, 0, 1)) for _ in range(n)]


def stream_of(digits: list[int], tail: int = 0) -> sd.Stream:
    return sd.from_prefix(digits, tail)


def digits_value(digits: list[int]) -> Fraction:
    return sum((Fraction(d, 2 ** (i + 1)) for i, d in enumerate(digits)), Fraction(0))


def in_prefix_interval(stream: sd.Stream, n: int, x: Fraction) -> bool:
    """x lies within 2^-n of the value of the first n digits."""
    s = digits_value(stream.prefix(n))
    return abs(x - s) <= Fraction(1, 2 ** n)


def code_contains(k: int, p: int, x: Fraction) -> bool:
    return Fraction(k, 1) / 2 ** p <= x <= Fraction(k + 2, 1) / 2 ** p if p >= 0 else \
        Fraction(k * 2 ** -p) <= x <= Fraction((k + 2) * 2 ** -p)


def is_below(n: int, m: int) -> bool:
    return 2 * m <= n <= 2 * m + 2


def agreeing_pair(rng: random.Random, n: int, extra: int = 60) -> tuple[sd.Stream, sd.Stream]:
    """Two streams sharing exactly their first n digits (then free)."""
    common = random_digits(rng, n)
    a = common + random_digits(rng, extra)
    b = common + random_digits(rng, extra)
    return stream_of(a, rng.choice((-1, 0, 1))), stream_of(b, rng.choice((-1, 0, 1)))
