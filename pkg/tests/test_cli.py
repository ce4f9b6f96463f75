import csv
import io
import itertools
import math
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hitsieve.cli import ContractViolation, PolySyntaxError, parse_poly, run
from hitsieve.polymod import IntMultiPoly, format_poly


def cli(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_examples():
    f = parse_poly("X^2 - t1 - 1")
    assert (f.d, f.r) == (2, 1)
    f = parse_poly("X^3 + t1*X + t2")
    assert (f.d, f.r) == (3, 2)
    with pytest.raises(ContractViolation, match="deg_X f ≥ 1 violated"):
        parse_poly("t1 + 1")


def test_parse_structure():
    assert parse_poly("(t1 - 1)*X^2 + X + 1") == parse_poly("t1*X^2 - X^2 + X + 1")
    assert parse_poly("-(X - t2)^2") == IntMultiPoly(2, {((0, 0), 2): -1, ((0, 1), 1): 2, ((0, 2), 0): -1})
    assert parse_poly("  X^2   -t1 ") == parse_poly("X^2-t1")
    assert parse_poly("2*3*X") == parse_poly("6*X")


@pytest.mark.parametrize("text,pos", [("X^2 +* t1", 5), ("X^2 - y", 6), ("X^", 2), ("(X + 1", 6), ("X t1", 2)])
def test_parse_errors_report_position(text, pos):
    with pytest.raises(PolySyntaxError) as exc:
        parse_poly(text)
    assert exc.value.pos == pos and f"position {pos}" in str(exc.value)


def test_parse_zero():
    with pytest.raises(ContractViolation, match="zero polynomial"):
        parse_poly("X - X")


monomials = st.tuples(st.tuples(st.integers(0, 3), st.integers(0, 2)), st.integers(0, 3))
polys = st.dictionaries(monomials, st.integers(-50, 50), min_size=1, max_size=6).filter(
    lambda t: any(c for (_, k), c in t.items() if k >= 1) and any(c for (te, _), c in t.items() if te[1])
)


@settings(max_examples=200)
@given(polys)
def test_round_trip(terms):
    try:
        f = IntMultiPoly(2, terms)
    except ValueError:
        return
    text = format_poly(f)
    assert parse_poly(text) == f
    assert format_poly(parse_poly(text)) == text


def test_density_example(capsys):
    code, out, _ = cli(capsys, "density", "--poly", "X^2 - t1", "--base", "2", "--mode", "irreducible", "--N", "100")
    assert code == 0
    row = list(csv.DictReader(io.StringIO(out)))[0]
    assert (row["favorable"], row["total"]) == ("100", "201")


def test_orders_example(capsys):
    code, out, _ = cli(capsys, "orders", "--base", "2", "--ell", "1,2,4,8", "--limit", "1000000")
    rows = list(csv.DictReader(io.StringIO(out)))
    vals = [float(r["fraction"]) for r in rows]
    assert code == 0 and len(rows) == 4 and vals == sorted(vals)


def test_clique_example(capsys):
    code, out, _ = cli(capsys, "clique", "--x", "100000", "--z", "20", "--ell", "8", "--poly", "X^2 - t1 - 1", "--base", "2")
    rows = list(csv.DictReader(io.StringIO(out)))
    ps = [int(r["p"]) for r in rows]
    assert code == 0 and len(ps) >= int(rows[0]["turan_bound"])
    assert all(int(r["max_pair_gcd"]) <= 20 for r in rows)
    assert all(math.gcd(p - 1, q - 1) <= 20 for p, q in itertools.combinations(ps, 2))


@pytest.mark.parametrize(
    "argv",
    [
        ["density", "--poly", "X^2 - t1", "--base", "2", "--N", "30", "--seed", "3"],
        ["density", "--poly", "X^2 - t1", "--base", "2", "--N", "200", "--sample", "100", "--seed", "3"],
        ["sieve", "--poly", "X^3 + t1*X + t2", "--base", "2,3", "--N", "4"],
        ["primes", "--poly", "X^2 - t1 - 1", "--base", "2", "--x", "1000"],
        ["gcdstats", "--x", "500", "--z", "10,20"],
        ["schedule", "--N", "1000,1000000,1000000000"],
        ["lemmas", "--poly", "X^2 - t1 - 1", "--base", "2", "--x", "200", "--t", "3", "--limit", "100000", "--seed", "5"],
    ],
)
def test_deterministic(capsys, argv):
    first = cli(capsys, *argv)
    second = cli(capsys, *argv)
    assert first[0] == 0 and first[1] == second[1] and first[1]


def test_out_and_json(tmp_path, capsys):
    out, js = tmp_path / "o.csv", tmp_path / "c.json"
    code, stdout, _ = cli(capsys, "sieve", "--poly", "X^2 - t1 - 1", "--base", "2", "--N", "5", "--out", str(out), "--json", str(js))
    assert code == 0 and stdout == ""
    assert out.read_text().startswith("n,verdict,witness")
    assert '"n":[3],"verdict":"RootFound","witness":"3"' in js.read_text()


@pytest.mark.parametrize(
    "argv,needle",
    [
        (["density", "--poly", "X^2 - t1", "--base", "1", "--N", "5"], "∖ {0, ±1}"),
        (["density", "--poly", "X^2 - t1", "--base", "2,3", "--N", "5"], "t1..t1"),
        (["density", "--poly", "t1 + 1", "--base", "2", "--N", "5"], "deg_X f ≥ 1"),
        (["density", "--poly", "X^2 -* t1", "--base", "2", "--N", "5"], "position"),
        (["density", "--nonsense"], "unrecognized"),
        (["bogus"], "invalid choice"),
        (["density", "--poly", "X^2 - t1", "--base", "2"], "--N"),
        (["primes", "--base", "2"], "--poly"),
    ],
)
def test_contract_violations(capsys, argv, needle):
    code, out, err = cli(capsys, *argv)
    assert code == 1 and needle in err and len(err.strip().splitlines()) == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hitsieve", "schedule", "--N", "1000"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("N,t,z,x")
