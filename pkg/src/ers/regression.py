"""Parametric regression: pick parameters whose model matches an oracle on a
finite set of observations.

Two losses are supported.  ``abs_sum`` works on Boehm encodings and sums the
distances between model and oracle outputs.  ``least_closeness`` works on
signed-digit streams and takes the worst prefix agreement over the
observations.

For ``abs_sum`` the model is written with terms: ``model(p, x)`` receives one
term per parameter followed by the observation term and returns a term.  The
oracle is a black box from encodings to encodings; it is only ever evaluated
at the observations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Sequence

from . import signed_digit as sd
from .boehm import (
    CFunction,
    TBEncoding,
    Term,
    TernaryCode,
    as_term,
    const,
    enc,
    t_abs,
    tb_from_dyadic,
    tb_from_int,
    var,
)
from .optimisation import OptResult, optimise
from .search_engine import (
    SearchResult,
    UCPredicate,
    search_sd_decreasing_modulus,
    search_sd_exhaustive,
    search_tb_exhaustive,
    search_tb_pair,
    tb_predicate,
)

ABS_SUM = "abs_sum"
LEAST_CLOSENESS = "least_closeness"


@dataclass
class LossSpec:
    kind: str
    observations: Sequence[Any]
    cap: int = 64

    def __post_init__(self):
        if not self.observations:
            raise ValueError("regression needs at least one observation")
        if self.kind not in (ABS_SUM, LEAST_CLOSENESS):
            raise ValueError(f"unknown loss {self.kind!r}")


def _obs_term(x) -> Term:
    if isinstance(x, (TBEncoding, Term)):
        return as_term(x)
    return const(x)


def _obs_encoding(x) -> TBEncoding:
    if isinstance(x, TBEncoding):
        return x
    return tb_from_dyadic(x)


def loss_term(model: Callable[..., Term], oracle: Callable[[TBEncoding], TBEncoding],
              spec: LossSpec, nparams: int = 1) -> Term:
    """Sum over observations of |model(p, x_i) - oracle(x_i)| as a term in p."""
    if spec.kind != ABS_SUM:
        raise ValueError("loss_term needs the abs_sum loss")
    params = [var(i) for i in range(nparams)]
    total = None
    for x in spec.observations:
        out = oracle(_obs_encoding(x))
        term = t_abs(model(*params, _obs_term(x)) - enc(out))
        total = term if total is None else total + term
    return total


def loss_function(model, oracle, spec: LossSpec, nparams: int = 1) -> CFunction:
    return CFunction.of(loss_term(model, oracle, spec, nparams), nparams)


def loss(model, oracle, spec: LossSpec, p) -> Any:
    """Loss at parameter ``p`` (an encoding, or a tuple of them).

    abs_sum returns the loss encoding; least_closeness returns the capped
    closeness level.
    """
    ps = p if isinstance(p, tuple) else (p,)
    if spec.kind == ABS_SUM:
        return loss_function(model, oracle, spec, len(ps))(*ps)
    return least_closeness(model, oracle, spec, ps)


def least_closeness(model: Callable[..., sd.Stream], oracle: Callable[[sd.Stream], sd.Stream],
                    spec: LossSpec, ps: Sequence[sd.Stream], cap: int | None = None) -> int:
    cap = spec.cap if cap is None else cap
    level = cap
    for x in spec.observations:
        level = min(level, sd.closeness(model(*ps, x), oracle(x), level))
        if level == 0:
            break
    return level


def regress_opt(model, oracle, spec: LossSpec, anchor: TernaryCode | None, eps: int,
                algo: str = "exhaustive", delta: int | None = None) -> OptResult | SearchResult:
    """eps-best parameter: minimise abs_sum, or maximise least_closeness.

    The signed-digit variant needs the parameter modulus ``delta`` and returns
    a SearchResult whose prefix is the best binary candidate.
    """
    if spec.kind == ABS_SUM:
        f = loss_function(model, oracle, spec, 1)
        return optimise(f, anchor, eps, algo)
    if delta is None:
        raise ValueError("least_closeness regression needs the parameter modulus delta")
    best = None
    best_prefix = None
    tested = 0
    for i in range(1 << delta):
        bits = [(i >> j) & 1 for j in range(delta)]
        cand = sd.from_prefix([1 if b else -1 for b in bits], -1)
        tested += 1
        v = least_closeness(model, oracle, spec, (cand,), cap=eps)
        if best is None or v > best:
            best, best_prefix = v, cand
            if v >= eps:
                break
    return SearchResult(best >= eps, witness=(best_prefix,), prefix=best_prefix.prefix(delta), tested=tested)


def regress_search(model, oracle, spec: LossSpec, anchors: Sequence[TernaryCode] | None, eps: int,
                   delta: int | None = None, algo: str = "exhaustive") -> SearchResult:
    """Find parameters whose loss is eps-close to zero (abs_sum), or whose
    least closeness reaches eps (least_closeness)."""
    if spec.kind == ABS_SUM:
        anchors = tuple(anchors)
        f = loss_function(model, oracle, spec, len(anchors))
        pred = tb_predicate(f, tb_from_int(0), "close", eps, anchors)
        if len(anchors) == 1:
            return search_tb_exhaustive(anchors[0], pred)
        if len(anchors) == 2:
            return search_tb_pair(anchors[0], anchors[1], pred)
        raise ValueError("at most two parameters are supported")
    if delta is None:
        raise ValueError("least_closeness regression needs the parameter modulus delta")
    pred = UCPredicate(lambda p: least_closeness(model, oracle, spec, (p,), cap=eps) >= eps, delta)
    if algo == "decreasing":
        return search_sd_decreasing_modulus(pred)
    return search_sd_exhaustive(pred)


def distort_input(oracle: Callable[[TBEncoding], TBEncoding], psi: Callable[[TBEncoding], TBEncoding]):
    """The oracle seen through a distortion of its input: x -> oracle(psi(x))."""
    return lambda x: oracle(psi(x))


def term_function(build: Callable[[Term], Term]) -> Callable[[TBEncoding], TBEncoding]:
    """Encoding-level function from a one-variable term builder."""
    f = CFunction.of(build(var(0)), 1)
    return lambda x: f(x)
