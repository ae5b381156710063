"""Search for encodings satisfying uniformly continuous predicates.

A predicate with modulus ``delta`` cannot tell apart encodings with the same
level-``delta`` code, so trying one candidate per code is enough: if none of
them satisfies it, nothing does.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

from . import signed_digit as sd
from .boehm import (
    CFunction,
    TBEncoding,
    TernaryCode,
    code_range,
    complete_candidate,
    down_left,
    down_mid,
    down_right,
    iter_codes,
    path_code,
)

# three-valued verdicts of interval_form
UNKNOWN = None


@dataclass
class UCPredicate:
    """Decidable predicate with a modulus of uniform continuity.

    ``decide_code`` is an optional fast path taking net codes instead of
    completed encodings; it must agree with ``decide`` on completions.
    """
    decide: Callable[..., bool]
    modulus: Any
    interval_form: Optional[Callable[..., Optional[bool]]] = None
    decide_code: Optional[Callable[..., bool]] = None
    calls: int = field(default=0, compare=False)

    def check(self, *xs) -> bool:
        self.calls += 1
        return self.decide(*xs)


@dataclass
class SearchResult:
    found: bool
    codes: tuple[TernaryCode, ...] | None = None
    witness: tuple[Any, ...] | None = None
    prefix: list[int] | None = None
    tested: int = 0

    @property
    def code(self) -> TernaryCode | None:
        return self.codes[0] if self.codes else None


# relations on output codes

def holds(relation: str, a: int, b: int) -> bool:
    if relation == "le":
        return a <= b
    if relation == "ge":
        return a >= b
    if relation == "close":
        return abs(a - b) <= 1
    raise ValueError(f"unknown relation {relation!r}")


def holds_range(relation: str, a: tuple[int, int], b: tuple[int, int]) -> Optional[bool]:
    (amin, amax), (bmin, bmax) = a, b
    if relation == "le":
        if amax <= bmin:
            return True
        return False if amin > bmax else UNKNOWN
    if relation == "ge":
        if amin >= bmax:
            return True
        return False if amax < bmin else UNKNOWN
    if relation == "close":
        if amax - bmin <= 1 and bmax - amin <= 1:
            return True
        return False if amin - bmax > 1 or bmin - amax > 1 else UNKNOWN
    raise ValueError(f"unknown relation {relation!r}")


def tb_predicate(lhs: CFunction, rhs: CFunction | TBEncoding, relation: str, eps: int,
                 anchors: Sequence[TernaryCode]) -> UCPredicate:
    """Compare the level-eps codes of two completed functions.

    ``rhs`` may also be a fixed encoding, compared through its own level-eps
    code.  Inputs are expected to pass through ``anchors``; the magnitude
    bounds behind the modulus come from them.
    """
    anchors = tuple(anchors)
    nv = len(anchors)
    fixed = rhs.at(eps) if isinstance(rhs, TBEncoding) else None
    Ll = lhs.modulus(eps, anchors)
    Lr = anchors[0].p if fixed is not None else rhs.modulus(eps, anchors)
    delta = max(Ll, Lr)

    def verdict(read: Callable[[int, int], int]) -> bool:
        a = lhs.code_at(eps, anchors, [read(i, Ll) for i in range(nv)])
        if fixed is not None:
            return holds(relation, a, fixed)
        b = rhs.code_at(eps, anchors, [read(i, Lr) for i in range(nv)])
        return holds(relation, a, b)

    def decide(*xs) -> bool:
        return verdict(lambda i, L: xs[i].at(L))

    def decide_code(*codes: TernaryCode) -> bool:
        return verdict(lambda i, L: path_code(anchors[i], codes[i], L))

    def side_range(f: CFunction, L: int, codes: Sequence[TernaryCode]) -> tuple[int, int]:
        boxes = []
        for a, c in zip(anchors, codes):
            if c.p <= L:
                boxes.append((c.k, c.k + 2, c.p))
            else:
                v = path_code(a, c, L)
                boxes.append((v, v + 2, L))
        return code_range(f.bound_interval(eps, anchors, boxes), eps)

    def interval_form(*codes: TernaryCode) -> Optional[bool]:
        right = (fixed, fixed) if fixed is not None else side_range(rhs, Lr, codes)
        return holds_range(relation, side_range(lhs, Ll, codes), right)

    modulus = delta if nv == 1 else (delta,) * nv
    return UCPredicate(decide, modulus, interval_form, decide_code)


# Boehm searchers

def _decide_candidate(pred: UCPredicate, anchor: TernaryCode, code: TernaryCode) -> bool:
    pred.calls += 1
    if pred.decide_code is not None:
        return pred.decide_code(code)
    return pred.decide(complete_candidate(anchor, code))


def search_tb_exhaustive(anchor: TernaryCode, pred: UCPredicate) -> SearchResult:
    delta = pred.modulus
    if delta < anchor.p:
        raise ValueError(f"modulus {delta} below anchor level {anchor.p}")
    tested = 0
    for code in iter_codes(anchor, delta):
        tested += 1
        if _decide_candidate(pred, anchor, code):
            return SearchResult(True, (code,), (complete_candidate(anchor, code),), tested=tested)
    return SearchResult(False, tested=tested)


def search_tb_pair(anchor_x: TernaryCode, anchor_y: TernaryCode, pred: UCPredicate) -> SearchResult:
    """Outer candidate x, inner search for y given x."""
    dx, dy = pred.modulus
    if dx < anchor_x.p or dy < anchor_y.p:
        raise ValueError("modulus below anchor level")
    tested = 0
    for cx in iter_codes(anchor_x, dx):
        for cy in iter_codes(anchor_y, dy):
            tested += 1
            pred.calls += 1
            if pred.decide_code is not None:
                ok = pred.decide_code(cx, cy)
            else:
                ok = pred.decide(complete_candidate(anchor_x, cx), complete_candidate(anchor_y, cy))
            if ok:
                return SearchResult(True, (cx, cy),
                                    (complete_candidate(anchor_x, cx), complete_candidate(anchor_y, cy)),
                                    tested=tested)
    return SearchResult(False, tested=tested)


def search_branching(anchor: TernaryCode, pred: UCPredicate) -> SearchResult:
    """Breadth-first refinement of the anchor, pruned by ``interval_form``.

    Boxes split into all three children (left, mid, right) so that every
    level-delta code stays below some unpruned box; shared children are
    visited once.
    """
    if pred.interval_form is None:
        raise ValueError("branching search needs a predicate with interval_form")
    delta = pred.modulus
    if delta < anchor.p:
        raise ValueError(f"modulus {delta} below anchor level {anchor.p}")
    queue = deque([anchor])
    seen = {anchor}
    tested = 0
    while queue:
        code = queue.popleft()
        tested += 1
        v = pred.interval_form(code)
        if v is True:
            return SearchResult(True, (code,), (complete_candidate(anchor, code),), tested=tested)
        if v is False:
            continue
        if code.p == delta:
            if _decide_candidate(pred, anchor, code):
                return SearchResult(True, (code,), (complete_candidate(anchor, code),), tested=tested)
            continue
        for child in (down_left(code.k), down_mid(code.k), down_right(code.k)):
            c = TernaryCode(child, code.p + 1)
            if c not in seen:
                seen.add(c)
                queue.append(c)
    return SearchResult(False, tested=tested)


# signed-digit searchers over binary prefixes

def _binary_completion(bits: Sequence[int]) -> sd.Stream:
    # unset bits are 0, which from_binary maps to -1
    return sd.from_prefix([1 if b else -1 for b in bits], -1)


def search_sd_exhaustive(pred: UCPredicate) -> SearchResult:
    """Try every binary prefix of length delta.

    Candidates are counted with the head digit varying fastest, so candidate
    i has bit j equal to bit j of i.
    """
    delta = pred.modulus
    for i in range(1 << delta):
        bits = [(i >> j) & 1 for j in range(delta)]
        cand = _binary_completion(bits)
        if pred.check(cand):
            return SearchResult(True, witness=(cand,), prefix=cand.prefix(delta), tested=i + 1)
    return SearchResult(False, tested=1 << delta)


def search_sd_decreasing_modulus(pred: UCPredicate) -> SearchResult:
    """Choose the head bit first (0 before 1), then search the tail with
    modulus one less.  Always returns a candidate; ``found`` reports whether
    it satisfies the predicate."""
    decide = pred.check

    def solve(prefix: list[int], delta: int) -> list[int]:
        if delta == 0:
            return []
        tail0 = solve(prefix + [0], delta - 1)
        if decide(_binary_completion(prefix + [0] + tail0)):
            return [0] + tail0
        return [1] + solve(prefix + [1], delta - 1)

    delta = pred.modulus
    bits = solve([], delta)
    cand = _binary_completion(bits)
    return SearchResult(decide(cand), witness=(cand,), prefix=cand.prefix(delta), tested=pred.calls)
