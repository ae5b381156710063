"""``ers``: search, optimise and regress from the command line.

Each run prints a TSV table with one row per epsilon and variable.  Failures
exit non-zero with a JSON object on stderr: 2 for usage errors (bad flags,
expressions the backend cannot compile), 3 for contract violations and other
internal errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction
from typing import Sequence

from . import regression as reg
from . import signed_digit as sd
from .boehm import (
    CFunction,
    ContractViolation,
    Dyadic,
    TernaryCode,
    parse_code,
    path_code,
)
from .expr import (
    BackendError,
    ExprSyntaxError,
    compile_boehm,
    compile_sd,
    free_vars,
    parse_expr,
    parse_predicate,
    to_term,
)
from .optimisation import global_min_sd, optimise
from .search_engine import (
    UCPredicate,
    search_branching,
    search_sd_decreasing_modulus,
    search_sd_exhaustive,
    search_tb_exhaustive,
    search_tb_pair,
    tb_predicate,
)

HEADER = ["epsilon", "code_k", "code_p", "dyadic", "value_k", "value_p", "elapsed_ms"]
NA = "NA"
PREDICTOR = "x"

# options whose values may start with '-' (such as -1@0) and would otherwise
# be mistaken for flags
_VALUE_FLAGS = ("--interval", "--obs", "--eps")


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _glue_values(argv: Sequence[str]) -> list[str]:
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            if nxt is None:
                raise UsageError(f"{tok} needs a value")
            out.append(f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ers", description="Exact-real search, optimisation and regression.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--backend", choices=["boehm", "signed-digit"], default="boehm")
        sp.add_argument("--interval", action="append", default=None,
                        help="compact anchor k@p, once per variable (default -1@0)")
        sp.add_argument("--eps", required=True, help="precision, or a comma-separated list")
        sp.add_argument("--output", help="write the table here instead of stdout")
        sp.add_argument("--no-timing", action="store_true", help="print NA for elapsed_ms")

    s = sub.add_parser("search", help="find an input satisfying a predicate")
    common(s)
    s.add_argument("--pred", required=True)
    s.add_argument("--algo", choices=["exhaustive", "branch", "decreasing"], default="exhaustive")

    o = sub.add_parser("optimise", help="eps-global minimum (or maximum) of a function")
    common(o)
    o.add_argument("--fn", required=True)
    o.add_argument("--algo", choices=["exhaustive", "bnb"], default="exhaustive")
    o.add_argument("--maximise", action="store_true")

    r = sub.add_parser("regress", help="fit model parameters to an oracle")
    common(r)
    r.add_argument("--model", required=True, help="expression in the parameters and x")
    r.add_argument("--oracle", required=True, help="expression in x")
    r.add_argument("--obs", default="-1,0,1", help="comma-separated observation points")
    r.add_argument("--distort", help="input distortion, an expression in x")
    r.add_argument("--loss", choices=["abs_sum", "least_closeness"])
    r.add_argument("--method", choices=["opt", "search"], default="opt")
    r.add_argument("--algo", choices=["exhaustive", "bnb", "decreasing"], default="exhaustive")
    return p


# argument helpers

def _eps_list(text: str) -> list[int]:
    try:
        out = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad --eps {text!r}") from None
    if not out or any(e < 0 for e in out):
        raise UsageError("--eps needs non-negative integers")
    return out


def _anchors(args, nvars: int) -> tuple[TernaryCode, ...]:
    texts = args.interval or ["-1@0"]
    if len(texts) == 1:
        texts = texts * nvars
    if len(texts) != nvars:
        raise UsageError(f"{len(texts)} intervals for {nvars} variables")
    try:
        anchors = tuple(parse_code(t) for t in texts)
    except ValueError:
        raise UsageError(f"bad --interval {texts!r}") from None
    if args.backend == "signed-digit" and any(a != TernaryCode(-1, 0) for a in anchors):
        raise UsageError("the signed-digit backend only covers the interval -1@0")
    return anchors


def _observations(text: str) -> list[Fraction]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        e = parse_expr(part)
        lit = _literal_value(e)
        if lit is None:
            raise UsageError(f"observation {part!r} is not a dyadic literal")
        out.append(lit)
    if not out:
        raise UsageError("--obs needs at least one point")
    return out


def _literal_value(e) -> Fraction | None:
    from .expr import DyadicLit, Neg
    if isinstance(e, DyadicLit):
        return e.value
    if isinstance(e, Neg):
        v = _literal_value(e.arg)
        return None if v is None else -v
    return None


def _check_threads() -> None:
    raw = os.environ.get("ERS_THREADS")
    if raw is None:
        return
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise UsageError(f"ERS_THREADS must be a positive integer, got {raw!r}")
    # the engine runs sequentially, so any positive cap is already respected


# rows

def _code_cells(code: TernaryCode | None) -> list[str]:
    if code is None:
        return [NA, NA, NA]
    return [str(code.k), str(code.p), str(Dyadic(code.k + 1, code.p).normalised())]


def _value_cells(value: TernaryCode | None) -> list[str]:
    if value is None:
        return [NA, NA]
    return [str(value.k), str(value.p)]


class Table:
    def __init__(self, digits: bool, timing: bool):
        self.digits = digits
        self.timing = timing
        self.rows: list[list[str]] = []

    def add(self, eps: int, code, value, elapsed: float, digits: str | None = None) -> None:
        row = [str(eps)] + _code_cells(code) + _value_cells(value)
        row.append(str(int(round(elapsed * 1000))) if self.timing else NA)
        if self.digits:
            row.append(digits if digits is not None else NA)
        self.rows.append(row)

    def render(self) -> str:
        header = HEADER + (["digits"] if self.digits else [])
        return "\n".join("\t".join(r) for r in [header] + self.rows) + "\n"


def _digits_text(prefix: list[int]) -> str:
    # explicit prefix, then the completion digit that repeats forever
    return ",".join(str(d) for d in list(prefix) + [-1]) + ",..."


def _sd_code(stream: sd.Stream, n: int) -> TernaryCode:
    return TernaryCode(sd.integer_approx(stream, n), n)


# commands

def _vars_of(*exprs) -> list[str]:
    names: set[str] = set()
    for e in exprs:
        names |= free_vars(e)
    return sorted(names)


def run_search(args, table: Table) -> None:
    pred = parse_predicate(args.pred)
    variables = _vars_of(pred.lhs, pred.rhs)
    if not variables:
        raise UsageError("the predicate has no variable")
    if args.backend == "signed-digit":
        if len(variables) != 1:
            raise UsageError("signed-digit search takes one variable")
        if args.algo == "branch":
            raise UsageError("branching search needs the boehm backend")
        _anchors(args, 1)
        lhs, rhs = compile_sd(pred.lhs, variables), compile_sd(pred.rhs, variables)
        for eps in _eps_list(args.eps):
            t0 = time.perf_counter()
            delta = max(lhs.delta(eps), rhs.delta(eps))
            up = _sd_relation(pred.relation, lhs, rhs, eps, delta)
            res = (search_sd_decreasing_modulus if args.algo == "decreasing" else search_sd_exhaustive)(up)
            elapsed = time.perf_counter() - t0
            if res.found:
                w = res.witness[0]
                table.add(eps, _sd_code(w, delta), _sd_code(lhs(w), eps), elapsed, _digits_text(res.prefix))
            else:
                table.add(eps, None, None, elapsed)
        return
    if args.algo == "decreasing":
        raise UsageError("decreasing-modulus search needs the signed-digit backend")
    if len(variables) > 2:
        raise UsageError("search takes at most two variables")
    if len(variables) == 2 and args.algo != "exhaustive":
        raise UsageError("two-variable search is exhaustive only")
    anchors = _anchors(args, len(variables))
    lhs, rhs = compile_boehm(pred.lhs, variables), compile_boehm(pred.rhs, variables)
    for eps in _eps_list(args.eps):
        t0 = time.perf_counter()
        up = tb_predicate(lhs, rhs, pred.relation, eps, anchors)
        if len(variables) == 2:
            res = search_tb_pair(anchors[0], anchors[1], up)
        elif args.algo == "branch":
            res = search_branching(anchors[0], up)
        else:
            res = search_tb_exhaustive(anchors[0], up)
        elapsed = time.perf_counter() - t0
        if not res.found:
            for _ in variables:
                table.add(eps, None, None, elapsed)
            continue
        value = _boehm_value(lhs, anchors, res.codes, eps)
        for code in res.codes:
            table.add(eps, code, value, elapsed)


def _boehm_value(f: CFunction, anchors, codes, eps: int) -> TernaryCode:
    L = f.modulus(eps, anchors)
    v = f.code_at(eps, anchors, [path_code(a, c, L) for a, c in zip(anchors, codes)])
    return TernaryCode(v, eps)


def _sd_relation(relation: str, lhs, rhs, eps: int, delta: int) -> UCPredicate:
    def decide(x):
        a, b = lhs(x), rhs(x)
        if relation == "le":
            return sd.approx_leq(a, b, eps)
        if relation == "ge":
            return sd.approx_leq(b, a, eps)
        return sd.closeness(a, b, eps) >= eps
    return UCPredicate(decide, delta)


def run_optimise(args, table: Table) -> None:
    e = parse_expr(args.fn)
    variables = _vars_of(e)
    if len(variables) != 1:
        raise UsageError("optimise takes a function of exactly one variable")
    anchors = _anchors(args, 1)
    if args.backend == "signed-digit":
        if args.algo == "bnb":
            raise UsageError("branch-and-bound needs the boehm backend")
        f = compile_sd(e, variables)
        for eps in _eps_list(args.eps):
            t0 = time.perf_counter()
            delta = f.delta(eps)
            res = global_min_sd(f, delta, eps, args.maximise)
            elapsed = time.perf_counter() - t0
            table.add(eps, _sd_code(res.arg, delta), res.value_code, elapsed, _digits_text(res.prefix))
        return
    f = compile_boehm(e, variables)
    for eps in _eps_list(args.eps):
        t0 = time.perf_counter()
        res = optimise(f, anchors[0], eps, args.algo, maximise=args.maximise)
        elapsed = time.perf_counter() - t0
        table.add(eps, res.arg_code, res.value_code, elapsed)


def run_regress(args, table: Table) -> None:
    model_e = parse_expr(args.model)
    oracle_e = parse_expr(args.oracle)
    distort_e = parse_expr(args.distort) if args.distort else None
    for name, e in (("oracle", oracle_e), ("distort", distort_e)):
        if e is not None and not free_vars(e) <= {PREDICTOR}:
            raise UsageError(f"--{name} may only use the variable {PREDICTOR}")
    params = sorted(free_vars(model_e) - {PREDICTOR})
    if not params:
        raise UsageError("the model has no parameter")
    obs = _observations(args.obs)
    anchors = _anchors(args, len(params))
    if args.method == "opt" and len(params) != 1:
        raise UsageError("regression by optimisation takes one parameter")
    if args.method == "search" and args.algo == "bnb":
        raise UsageError("bnb applies to --method opt only")

    if args.backend == "signed-digit":
        _regress_sd(args, table, model_e, oracle_e, distort_e, params, obs)
        return
    if args.loss == "least_closeness":
        raise UsageError("least_closeness loss needs the signed-digit backend")
    if args.algo == "decreasing":
        raise UsageError("decreasing-modulus search needs the signed-digit backend")

    def model(*ts):
        env = dict(zip(params, ts[:-1]))
        env[PREDICTOR] = ts[-1]
        return to_term(model_e, env)
    oracle = reg.term_function(lambda x: to_term(oracle_e, {PREDICTOR: x}))
    if distort_e is not None:
        oracle = reg.distort_input(oracle, reg.term_function(lambda x: to_term(distort_e, {PREDICTOR: x})))
    spec = reg.LossSpec(reg.ABS_SUM, obs)
    loss_f = reg.loss_function(model, oracle, spec, len(params))

    for eps in _eps_list(args.eps):
        t0 = time.perf_counter()
        if args.method == "opt":
            res = reg.regress_opt(model, oracle, spec, anchors[0], eps, args.algo)
            elapsed = time.perf_counter() - t0
            table.add(eps, res.arg_code, res.value_code, elapsed)
            continue
        res = reg.regress_search(model, oracle, spec, anchors, eps)
        elapsed = time.perf_counter() - t0
        if not res.found:
            for _ in params:
                table.add(eps, None, None, elapsed)
            continue
        value = _boehm_value(loss_f, anchors, res.codes, eps)
        for code in res.codes:
            table.add(eps, code, value, elapsed)


def _regress_sd(args, table, model_e, oracle_e, distort_e, params, obs) -> None:
    if len(params) != 1:
        raise UsageError("signed-digit regression takes one parameter")
    if args.loss == "abs_sum":
        raise UsageError("abs_sum loss needs the boehm backend")
    if args.algo == "bnb":
        raise UsageError("branch-and-bound needs the boehm backend")
    if any(not -1 <= v <= 1 for v in obs):
        raise UsageError("signed-digit observations must lie in [-1, 1]")
    model = compile_sd(model_e, params + [PREDICTOR])
    oracle = compile_sd(oracle_e, [PREDICTOR])
    if distort_e is not None:
        oracle = reg.distort_input(oracle, compile_sd(distort_e, [PREDICTOR]))
    spec = reg.LossSpec(reg.LEAST_CLOSENESS, [sd.from_dyadic(v) for v in obs])
    for eps in _eps_list(args.eps):
        t0 = time.perf_counter()
        delta = model.modulus(eps).get(params[0], 0)
        if args.method == "opt":
            res = reg.regress_opt(model, oracle, spec, None, eps, delta=delta)
        else:
            res = reg.regress_search(model, oracle, spec, None, eps, delta=delta, algo=args.algo)
        elapsed = time.perf_counter() - t0
        if args.method == "search" and not res.found:
            table.add(eps, None, None, elapsed)
            continue
        w = res.witness[0]
        level = reg.least_closeness(model, oracle, spec, (w,), cap=eps)
        table.add(eps, _sd_code(w, delta), TernaryCode(level, eps), elapsed, _digits_text(res.prefix))


COMMANDS = {"search": run_search, "optimise": run_optimise, "regress": run_regress}


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        _check_threads()
        args = build_parser().parse_args(_glue_values(argv))
        table = Table(digits=args.backend == "signed-digit", timing=not args.no_timing)
        COMMANDS[args.command](args, table)
    except (UsageError, ExprSyntaxError, BackendError) as err:
        return _fail("usage", str(err), 2)
    except ContractViolation as err:
        return _fail("contract", str(err), 3)
    except Exception as err:  # noqa: BLE001 - reported as a machine-readable failure
        return _fail("internal", f"{type(err).__name__}: {err}", 3)
    text = table.render()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
