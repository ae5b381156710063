"""Approximate global minimisation and maximisation over a compact anchor.

Values are compared through their level-eps codes, so the result is an
eps-global optimum: no other point's value code beats it.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .boehm import (
    CFunction,
    CompactTB,
    DyadicCode,
    TernaryCode,
    complete_candidate,
    down_left,
    down_right,
    iter_codes,
    path_code,
    scaled,
)


@dataclass
class OptResult:
    arg_code: TernaryCode
    arg: CompactTB
    value_code: TernaryCode
    evaluated: int = 0


@dataclass(frozen=True)
class BnBNode:
    code: TernaryCode
    lower: Fraction
    upper: Fraction

    @property
    def bound(self) -> tuple[Fraction, Fraction]:
        return self.lower, self.upper


def value_code(f: CFunction, anchor: TernaryCode, code: TernaryCode, eps: int) -> int:
    """Level-eps code of f at the completion of ``code`` through ``anchor``."""
    L = f.modulus(eps, (anchor,))
    return f.code_at(eps, (anchor,), [path_code(anchor, code, L)])


def global_min_exhaustive(f: CFunction, anchor: TernaryCode, eps: int,
                          maximise: bool = False) -> OptResult:
    anchors = (anchor,)
    delta = f.modulus(eps, anchors)
    best_code = None
    best = None
    count = 0
    for code in iter_codes(anchor, delta):
        count += 1
        v = f.code_at(eps, anchors, [code.k])
        # strict comparison: the first candidate wins ties
        if best is None or (v > best if maximise else v < best):
            best, best_code = v, code
    return OptResult(best_code, complete_candidate(anchor, best_code), TernaryCode(best, eps), count)


def global_max_exhaustive(f: CFunction, anchor: TernaryCode, eps: int) -> OptResult:
    return global_min_exhaustive(f, anchor, eps, maximise=True)


def fits_level(d: DyadicCode, eps: int) -> bool:
    """Whether some level-eps ternary code covers the dyadic interval ``d``."""
    k, c, p = d
    if eps >= p:
        return (c << (eps - p)) <= (k << (eps - p)) + 2
    s = p - eps
    return c <= ((k >> s) + 2) << s


def _node_bound(f: CFunction, anchor: TernaryCode, code: TernaryCode, eps: int,
                maximise: bool) -> tuple[Fraction, Fraction, DyadicCode]:
    k, c, p = f.bound_interval(eps, (anchor,), [(code.k, code.k + 2, code.p)])
    if maximise:
        k, c = -c, -k
    return scaled(k, p), scaled(c, p), DyadicCode(k, c, p)


def bnb_trace(f: CFunction, anchor: TernaryCode, eps: int,
              maximise: bool = False) -> Iterator[tuple[str, object]]:
    """Run branch-and-bound, yielding ("alive", live node dict) after every
    step and finally ("result", code).  The dict is shared; copy it to keep it.

    Maximisation minimises the negated bounds, which swaps the roles of
    lower and upper ends without changing the function itself.
    """
    anchors = (anchor,)
    delta = f.modulus(eps, anchors)

    alive: dict[TernaryCode, BnBNode] = {}
    by_width: list[tuple[int, int]] = []      # (level, k): widest first, then leftmost
    by_lower: list[tuple[Fraction, Fraction, int, int]] = []
    min_upper = [None]
    fits: dict[TernaryCode, bool] = {}

    def insert(code: TernaryCode) -> None:
        lo, hi, dc = _node_bound(f, anchor, code, eps, maximise)
        if min_upper[0] is None or hi < min_upper[0]:
            min_upper[0] = hi
        if lo > min_upper[0]:
            return
        alive[code] = BnBNode(code, lo, hi)
        fits[code] = fits_level(dc, eps)
        heapq.heappush(by_width, (code.p, code.k))
        heapq.heappush(by_lower, (lo, scaled(code.k, code.p), code.p, code.k))

    def live(code: TernaryCode) -> bool:
        node = alive.get(code)
        if node is None:
            return False
        if node.lower > min_upper[0]:
            # strict: a node whose lower bound equals the best upper bound stays
            del alive[code]
            return False
        return True

    insert(anchor)
    while True:
        while not live(TernaryCode(by_lower[0][3], by_lower[0][2])):
            heapq.heappop(by_lower)
        _, _, p, k = by_lower[0]
        best = TernaryCode(k, p)
        yield "alive", alive
        if best.p >= delta or fits[best]:
            yield "result", best
            return
        while not live(TernaryCode(by_width[0][1], by_width[0][0])):
            heapq.heappop(by_width)
        p, k = heapq.heappop(by_width)
        node = TernaryCode(k, p)
        del alive[node]
        insert(TernaryCode(down_left(k), p + 1))
        insert(TernaryCode(down_right(k), p + 1))


def global_min_bnb(f: CFunction, anchor: TernaryCode, eps: int, maximise: bool = False) -> OptResult:
    steps = 0
    best = None
    for kind, payload in bnb_trace(f, anchor, eps, maximise):
        if kind == "result":
            best = payload
        else:
            steps += 1
    v = value_code(f, anchor, best, eps)
    return OptResult(best, complete_candidate(anchor, best), TernaryCode(v, eps), steps)


def global_max_bnb(f: CFunction, anchor: TernaryCode, eps: int) -> OptResult:
    return global_min_bnb(f, anchor, eps, maximise=True)


def global_max(f: CFunction, anchor: TernaryCode, eps: int, algo: str = "exhaustive") -> OptResult:
    return optimise(f, anchor, eps, algo, maximise=True)


def optimise(f: CFunction, anchor: TernaryCode, eps: int, algo: str = "exhaustive",
             maximise: bool = False) -> OptResult:
    if algo == "exhaustive":
        return global_min_exhaustive(f, anchor, eps, maximise)
    if algo == "bnb":
        return global_min_bnb(f, anchor, eps, maximise)
    raise ValueError(f"unknown optimisation algorithm {algo!r}")


# signed-digit optimisation over binary candidates

@dataclass
class SDOptResult:
    arg: object
    prefix: list[int]
    value_code: TernaryCode
    evaluated: int = 0


def global_min_sd(f, delta: int, eps: int, maximise: bool = False) -> SDOptResult:
    """eps-global optimum of a stream function with input modulus ``delta``,
    comparing outputs by their level-eps integer approximations."""
    from . import signed_digit as sd

    best = best_arg = None
    for i in range(1 << delta):
        cand = sd.from_prefix([1 if (i >> j) & 1 else -1 for j in range(delta)], -1)
        v = sd.integer_approx(f(cand), eps)
        if best is None or (v > best if maximise else v < best):
            best, best_arg = v, cand
    return SDOptResult(best_arg, best_arg.prefix(delta), TernaryCode(best, eps), 1 << delta)
