import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ers import signed_digit as sd
from ers.boehm import (
    CFunction,
    CompactTB,
    ContractViolation,
    Approximator,
    Dyadic,
    DyadicCode,
    TBEncoding,
    TernaryCode,
    approximator_abs,
    approximator_add,
    approximator_mid,
    approximator_mul,
    approximator_neg,
    approximator_pow,
    below,
    ceil_log2,
    complete,
    complete_candidate,
    const,
    covers,
    down_left,
    down_mid,
    down_right,
    enc,
    in_net,
    join_prime,
    lift,
    net,
    parse_code,
    parse_dyadic,
    path_code,
    round_to_code,
    sd_to_tb,
    t_abs,
    t_mid,
    t_pow,
    tb_approx_leq,
    tb_closeness,
    tb_from_dyadic,
    tb_from_int,
    tb_from_ternary_code,
    tb_third,
    tb_to_sd,
    to_dyadic_interval,
    up_left,
    up_right,
    var,
)
from helpers import code_contains

ints = st.integers(-10 ** 6, 10 ** 6)


def chain_ok(x, lo: int, hi: int) -> bool:
    return all(below(x.at(n + 1), x.at(n)) for n in range(lo, hi))


# structure

def test_structural_examples():
    assert down_left(3) == 6 and down_right(3) == 8 and down_mid(3) == 7
    assert up_right(5) == 2
    assert up_right(-3) == -2
    assert covers(DyadicCode(-4, 0, 2), DyadicCode(-3, -1, 3))


@given(ints)
def test_structural_algebra(k):
    assert up_right(down_left(k)) == k
    assert up_right(down_right(k)) == k + 1
    assert up_left(down_right(k)) == k
    for child in (down_left(k), down_mid(k), down_right(k)):
        assert below(child, k)


def test_below_examples():
    assert below(6, 3) and below(8, 3) and not below(9, 3)


@given(ints, st.integers(-20, 20), st.integers(0, 20))
def test_lifting_covers(k, p, m):
    lifted = lift(k, m)
    assert covers(DyadicCode(lifted, lifted + 2, p - m), DyadicCode(k, k + 2, p))


def test_dyadic_parsing_and_intervals():
    assert parse_dyadic("3/2^2") == Dyadic(3, 2)
    assert parse_dyadic("0.25") == Dyadic(1, 2)
    assert parse_code("-1@0") == TernaryCode(-1, 0)
    assert str(TernaryCode(42, 1)) == "42@1"
    assert to_dyadic_interval(TernaryCode(-1, 0)) == (Dyadic(-1, 0), Dyadic(1, 0))
    lo, hi = to_dyadic_interval(TernaryCode(42, 1))
    assert (lo.fraction(), hi.fraction()) == (21, 22)
    lo, hi = to_dyadic_interval(TernaryCode(0, 3))
    assert (lo.fraction(), hi.fraction()) == (0, Fraction(1, 4))


# encodings

def test_tb_from_int():
    two = tb_from_int(2)
    assert [two.at(n) for n in (0, 1, 2)] == [2, 4, 8]
    assert two.at(-1) == 1
    assert all(tb_from_int(0).at(n) == 0 for n in range(10))


def test_tb_from_ternary_code():
    c = tb_from_ternary_code(TernaryCode(42, 1))
    assert (c.at(1), c.at(2), c.at(0)) == (42, 84, 21)
    assert below(c.at(2), c.at(1))
    a = tb_from_ternary_code(TernaryCode(-1, 0))
    assert [a.at(n) for n in range(4)] == [-1, -2, -4, -8]


def test_tb_from_dyadic():
    assert all(tb_from_dyadic(0).at(n) == tb_from_int(0).at(n) for n in range(-3, 8))
    h = tb_from_dyadic(Fraction(1, 2))
    assert h.at(1) in (0, 1) and code_contains(h.at(1), 1, Fraction(1, 2))
    assert code_contains(tb_from_dyadic(Fraction(-3, 4)).at(5), 5, Fraction(-3, 4))


@given(st.integers(-2 ** 12, 2 ** 12), st.integers(0, 8))
def test_constructors_are_ternary(num, exp):
    d = Fraction(num, 2 ** exp)
    for x in (tb_from_int(num), tb_from_dyadic(d), tb_from_ternary_code(TernaryCode(num, exp)), tb_third()):
        assert chain_ok(x, -8, 30)
    x = tb_from_dyadic(d)
    assert all(code_contains(x.at(n), n, d) for n in range(-4, 24))


def test_tb_third_contains_one_third():
    t = tb_third()
    assert all(code_contains(t.at(n), n, Fraction(1, 3)) for n in range(-4, 40))


def test_closeness_and_order():
    x = tb_from_dyadic(Fraction(5, 8))
    assert tb_closeness(x, x, 7)
    assert tb_closeness(tb_from_int(0), tb_from_int(1), 0)
    assert not tb_closeness(tb_from_int(0), tb_from_int(1), 3)
    assert tb_approx_leq(x, x, 4)
    assert tb_approx_leq(tb_from_int(1), tb_from_int(2), 4)


@given(st.integers(-999, 999), st.integers(-999, 999), st.integers(0, 12))
def test_approx_leq_linear(a, b, e):
    x, y = tb_from_dyadic(Fraction(a, 64)), tb_from_dyadic(Fraction(b, 64))
    assert tb_approx_leq(x, y, e) or tb_approx_leq(y, x, e)


# nets and candidates

def test_net_examples():
    a = TernaryCode(-1, 0)
    assert net(a, 0) == [a]
    assert net(a, 1) == [TernaryCode(-2, 1), TernaryCode(0, 1)]
    assert [c.k for c in net(a, 2)] == [-4, -2, 0, 2]
    with pytest.raises(ValueError):
        net(a, -1)


@given(st.integers(-50, 50), st.integers(-3, 3), st.integers(0, 6))
def test_net_covers_anchor_in_order(k, p, extra):
    anchor = TernaryCode(k, p)
    codes = net(anchor, p + extra)
    assert len(codes) == 2 ** extra
    lo, hi = anchor.dyadic().bounds()
    assert codes[0].dyadic().bounds()[0] == lo
    assert codes[-1].dyadic().bounds()[1] == hi
    for a, b in zip(codes, codes[1:]):
        assert a.dyadic().bounds()[1] == b.dyadic().bounds()[0]
    assert all(in_net(anchor, c) for c in codes)


@given(st.integers(-20, 20), st.integers(-2, 2), st.integers(0, 6), st.data())
def test_candidate_passes_through_anchor_and_code(k, p, extra, data):
    anchor = TernaryCode(k, p)
    code = data.draw(st.sampled_from(net(anchor, p + extra)))
    x = complete_candidate(anchor, code)
    assert x.at(p) == k and x.at(code.p) == code.k
    assert chain_ok(x, p - 6, code.p + 6)
    assert all(path_code(anchor, code, n) == x.at(n) for n in range(p - 3, code.p + 3))


# interval primitives and approximators

def test_approximator_examples():
    assert approximator_neg().apply(DyadicCode(3, 5, 2)) == DyadicCode(-5, -3, 2)
    assert approximator_add().apply(DyadicCode(1, 3, 2), DyadicCode(2, 4, 2)) == DyadicCode(3, 7, 2)
    m = approximator_mul().apply(DyadicCode(2, 4, 1), DyadicCode(2, 4, 1))
    assert m.bounds() == (1, 4)
    assert approximator_abs().apply(DyadicCode(-3, 1, 0)).bounds() == (0, 3)
    assert approximator_pow(2).apply(DyadicCode(-3, 1, 0)).bounds() == (0, 9)


def test_approximator_moduli():
    assert approximator_neg().modulus(5) == (6,)
    assert approximator_add().modulus(5) == (7, 7)
    assert approximator_mid().modulus(5) == (6, 6)
    with pytest.raises(ValueError):
        approximator_mul().modulus(3)
    boxes = [(2, 4, 1), (-2, 0, 0)]
    # magnitudes 2 and 1: gain 3, need 2**s >= 6
    assert approximator_mul().modulus(3, boxes) == (6, 6)
    assert ceil_log2(Fraction(1)) == 0 and ceil_log2(Fraction(5)) == 3 and ceil_log2(Fraction(1, 3)) == -1


def test_join_prime_examples():
    assert join_prime(DyadicCode(3, 5, 4)) == TernaryCode(3, 4)
    assert join_prime(DyadicCode(1, 6, 3)) == TernaryCode(0, 1)
    assert join_prime(DyadicCode(7, 7, 3)) == TernaryCode(14, 4)


def _frac(k: int, p: int) -> Fraction:
    return Fraction(k) / Fraction(2) ** p


def _covered_at(q: int, lo: Fraction, hi: Fraction) -> bool:
    # the rightmost level-q code starting at or left of lo reaches furthest
    kk = math.floor(lo * Fraction(2) ** q)
    return _frac(kk + 2, q) >= hi


@given(st.integers(-500, 500), st.integers(0, 40), st.integers(-4, 8))
def test_join_prime_is_narrowest_cover(k, span, p):
    d = DyadicCode(k, k + span, p)
    j = join_prime(d)
    assert covers(j.dyadic(), d)
    assert j.p <= p + 1
    lo, hi = _frac(k, p), _frac(k + span, p)
    assert not any(_covered_at(q, lo, hi) for q in range(j.p + 1, p + 2))


@given(st.integers(-2000, 2000), st.integers(0, 400), st.integers(-3, 10), st.integers(-5, 14))
def test_round_to_code_covers_narrow_intervals(k, span, p, n):
    # intervals at most half a level-n code wide always get a cover
    if _frac(span, p) > _frac(1, n):
        return
    g = round_to_code(k, k + span, p, n)
    assert _frac(g, n) <= _frac(k, p) and _frac(k + span, p) <= _frac(g + 2, n)


@given(st.lists(st.tuples(st.integers(-64, 64), st.integers(0, 8)), min_size=2, max_size=2), st.data())
def test_approximators_refine_monotonically(args, data):
    outer = [DyadicCode(k, k + w, 4) for k, w in args]
    inner = []
    for o in outer:
        k2 = data.draw(st.integers(4 * o.k, 4 * o.c))
        c2 = data.draw(st.integers(k2, 4 * o.c))
        inner.append(DyadicCode(k2, c2, 6))
    for ap in (approximator_add(), approximator_mid(), approximator_mul()):
        assert covers(ap.apply(*outer), ap.apply(*inner))
    for ap in (approximator_neg(), approximator_abs(), approximator_pow(3), approximator_pow(4)):
        assert covers(ap.apply(outer[0]), ap.apply(inner[0]))


# completion

def test_complete_examples():
    n2 = complete(approximator_neg(), tb_from_int(2))
    assert all(code_contains(n2.at(n), n, Fraction(-2)) for n in range(11))
    s = complete(approximator_add(), tb_from_int(1), tb_from_int(2))
    assert code_contains(s.at(10), 10, Fraction(3))
    h = tb_from_dyadic(Fraction(1, 2))
    p = complete(approximator_mul(), h, h)
    assert code_contains(p.at(12), 12, Fraction(1, 4))


def test_cfunction_modulus_for_neg_and_add():
    a = (TernaryCode(-1, 0),)
    neg_f = CFunction.of(-var(0), 1)
    # approximator modulus n+1, read one level finer by the completion
    assert [neg_f.modulus(n, a) for n in range(1, 6)] == [n + 2 for n in range(1, 6)]
    add_f = CFunction.of(var(0) + var(1), 2)
    assert add_f.modulus(4, a * 2) == 7


def test_contract_violation_is_detected():
    lying = Approximator(1, lambda a: (a[0] - 64, a[1] + 64, a[2]), lambda boxes: (Fraction(1),), "wide")
    with pytest.raises(ContractViolation):
        complete(lying, tb_from_int(0)).at(3)


TERMS = [
    lambda x: -x,
    lambda x: x * x,
    lambda x: t_mid(x, const(Fraction(1, 4))),
    lambda x: t_pow(x, 3) - x + const(1),
    lambda x: t_abs(x - const(Fraction(3, 8))),
    lambda x: x * enc(tb_third()),
]
EXACT = [
    lambda v: -v,
    lambda v: v * v,
    lambda v: (v + Fraction(1, 4)) / 2,
    lambda v: v ** 3 - v + 1,
    lambda v: abs(v - Fraction(3, 8)),
    None,
]


@given(st.integers(-256, 256), st.sampled_from(range(len(TERMS))))
def test_cfunctions_are_sound_and_ternary(num, i):
    v = Fraction(num, 256)
    f = CFunction.of(TERMS[i](var(0)), 1)
    out = f(tb_from_dyadic(v))
    assert chain_ok(out, -8, 24)
    if EXACT[i] is not None:
        y = EXACT[i](v)
        assert all(code_contains(out.at(n), n, y) for n in range(-4, 25))
    else:
        lo, hi = out.interval(20)
        assert lo <= v / 3 + Fraction(1, 2 ** 18) and v / 3 - Fraction(1, 2 ** 18) <= hi


def test_anchor_boxes_give_tighter_moduli():
    f = CFunction.of(var(0) * var(0), 1)
    wide = f.modulus(10, (TernaryCode(-1, -1),))
    narrow = f.modulus(10, (TernaryCode(0, 4),))
    assert narrow < wide


def test_code_at_agrees_with_completion_on_candidates():
    anchor = TernaryCode(-1, 0)
    f = CFunction.of(t_pow(var(0), 2) - const(Fraction(1, 2)), 1)
    rng = random.Random(3)
    for _ in range(50):
        eps = rng.randint(0, 10)
        L = f.modulus(eps, (anchor,))
        code = rng.choice(net(anchor, L))
        x = complete_candidate(anchor, code)
        assert f.code_at(eps, (anchor,), [code.k]) == f(x).at(eps)


# conversions

def test_sd_to_tb_examples():
    z = sd_to_tb(sd.ZERO)
    k = -1
    for n in range(1, 12):
        k = down_mid(k)
        assert z.at(n) == k


@given(st.lists(st.sampled_from([-1, 0, 1]), min_size=20, max_size=20))
def test_conversions_round_trip(ds):
    a = sd.from_prefix(ds, 0)
    x = sd_to_tb(a)
    assert all(x.at(n) == sd.integer_approx(a, n) for n in range(21))
    assert tb_to_sd(x).prefix(20) == ds


def test_tb_to_sd_rejects_non_chains():
    bad = CompactTB(TBEncoding(lambda n: 5 if n == 1 else -1), TernaryCode(-1, 0))
    with pytest.raises(ValueError):
        tb_to_sd(bad).prefix(2)


def test_candidate_must_lie_below_anchor():
    with pytest.raises(ValueError):
        complete_candidate(TernaryCode(-1, 0), TernaryCode(177, 7))
