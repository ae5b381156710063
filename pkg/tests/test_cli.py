import json

import pytest

from ers import cli
from ers.boehm import ContractViolation

HEADER = "epsilon\tcode_k\tcode_p\tdyadic\tvalue_k\tvalue_p\telapsed_ms"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(out):
    lines = out.splitlines()
    assert lines[0].startswith(HEADER)
    return [line.split("\t") for line in lines[1:]]


def test_search_table(capsys):
    code, out, _ = run(capsys, "search", "--interval", "-1@0", "--eps", "4,6",
                       "--pred", "abs(x*x - 1/2^1) <= eps", "--no-timing")
    assert code == 0
    table = rows(out)
    assert [r[0] for r in table] == ["4", "6"]
    for r in table:
        k, p = int(r[1]), int(r[2])
        num, den = r[3].split("/2^")
        # dyadic column is (k + 1) / 2^p in lowest terms
        assert int(num) * 2 ** p == (k + 1) * 2 ** int(den)
        assert r[6] == "NA"


def test_output_is_byte_stable(capsys, tmp_path):
    argv = ["optimise", "--interval", "-1@-1", "--eps", "8", "--fn", "pow(x,6) - pow(x,4) + pow(x,3) + x*x",
            "--algo", "bnb", "--no-timing"]
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second
    target = tmp_path / "t.tsv"
    assert cli.main(argv + ["--output", str(target)]) == 0
    assert target.read_text() == first
    assert capsys.readouterr().out == ""


def test_not_found_is_reported_in_the_table(capsys):
    code, out, _ = run(capsys, "search", "--eps", "3", "--pred", "x >= 2", "--no-timing")
    assert code == 0
    assert rows(out)[0][1:6] == ["NA"] * 5


def test_branch_search(capsys):
    code, out, _ = run(capsys, "search", "--interval", "4@-2", "--eps", "50",
                       "--pred", "x^3 + 3*x >= 9000", "--algo", "branch", "--no-timing")
    assert code == 0
    assert int(rows(out)[0][2]) <= 2


def test_maximise(capsys):
    _, out, _ = run(capsys, "optimise", "--eps", "6", "--fn", "x*x", "--maximise", "--no-timing")
    k, p = int(rows(out)[0][4]), int(rows(out)[0][5])
    assert abs((k + 1) / 2 ** p - 1) <= 2 / 2 ** 6


def test_regress(capsys):
    code, out, _ = run(capsys, "regress", "--eps", "8", "--model", "mid(neg(p), x)",
                       "--oracle", "mid(third, x)", "--no-timing")
    assert code == 0
    k, p = int(rows(out)[0][1]), int(rows(out)[0][2])
    assert abs((k + 1) / 2 ** p + 1 / 3) <= 2 ** -5


def test_signed_digit_search_prints_digits(capsys):
    code, out, _ = run(capsys, "search", "--backend", "signed-digit", "--eps", "5",
                       "--pred", "neg(mid(x, 0)) <= 1/4", "--no-timing")
    assert code == 0
    assert out.splitlines()[0].endswith("\tdigits")
    assert rows(out)[0][-1].endswith("...")


@pytest.mark.parametrize("argv", [
    ["search", "--eps", "3"],
    ["search", "--eps", "x", "--pred", "x <= 0"],
    ["search", "--eps", "3", "--pred", "x <= 1/3"],
    ["search", "--eps", "3", "--pred", "x + 1 <= 0", "--backend", "signed-digit"],
    ["launch"],
])
def test_usage_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == ""
    assert json.loads(err)["error"] == "usage"


def test_contract_violation_exit(capsys, monkeypatch):
    def boom(args, table):
        raise ContractViolation("below relation broken")
    monkeypatch.setitem(cli.COMMANDS, "search", boom)
    code, _, err = run(capsys, "search", "--eps", "3", "--pred", "x <= 0")
    assert code == 3 and json.loads(err)["error"] == "contract"


def test_threads_variable(capsys, monkeypatch):
    monkeypatch.setenv("ERS_THREADS", "0")
    code, _, err = run(capsys, "search", "--eps", "3", "--pred", "x <= 0")
    assert code == 2
    monkeypatch.setenv("ERS_THREADS", "4")
    code, _, _ = run(capsys, "search", "--eps", "3", "--pred", "x <= 0")
    assert code == 0
