import json
import math
import subprocess
import sys

import pytest

from oneshotcq.cli import EXIT_CAP, EXIT_CERT, EXIT_PARSE, main, parse_channel, ParseError
from oneshotcq.hypothesis_testing import classical_dh

from conftest import DATA


def run(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def row(text):
    header, values = text.strip().splitlines()[:2]
    return dict(zip(header.split(","), values.split(",")))


def test_dh_equal_states(capsys):
    code, out, _ = run(["dh", DATA / "state_plus.json", DATA / "state_plus.json", "--epsilon", "0.25"], capsys)
    assert code == 0
    assert float(row(out)["dh"]) == pytest.approx(-math.log2(0.75), abs=1e-11)


def test_dh_pure_vs_mixed(capsys):
    code, out, _ = run(["dh", DATA / "state_zero.json", DATA / "state_maximally_mixed.json", "--epsilon", "0"], capsys)
    assert code == 0 and float(row(out)["dh"]) == pytest.approx(1.0)


def test_dh_qutrit_commuting(capsys):
    code, out, _ = run(["dh", DATA / "state_qutrit_a.json", DATA / "state_qutrit_b.json", "--epsilon", "0.1"], capsys)
    expected = classical_dh([0.5, 0.3, 0.2], [0.2, 0.3, 0.5], 0.1)
    assert code == 0 and float(row(out)["dh"]) == pytest.approx(expected, abs=1e-10)


def test_dh_nats(capsys):
    _, out, _ = run(["dh", DATA / "state_plus.json", DATA / "state_plus.json", "--epsilon", "0.5", "--nats"], capsys)
    assert float(row(out)["dh"]) == pytest.approx(math.log(2), abs=1e-11)


def test_bounds(capsys):
    code, out, _ = run(["bounds", DATA / "noiseless_binary.json", "--epsilon", "0"], capsys)
    r = row(out)
    assert code == 0 and float(r["converse_R_best_found"]) == pytest.approx(1.0, abs=1e-6)
    assert r["p[0]"] == "0.5"
    code, out, _ = run(["bounds", DATA / "single_input.json", "--epsilon", "0.2"], capsys)
    assert float(row(out)["converse_R_best_found"]) == pytest.approx(-math.log2(0.8), abs=1e-11)


def test_bounds_with_given_params(capsys):
    args = ["bounds", DATA / "noiseless_binary.json", "--epsilon", "0.1", "--epsilon-prime", "0.01", "--c", "1"]
    code, out, _ = run(args, capsys)
    r = row(out)
    assert code == 0
    assert float(r["achievable_R_at_given_params"]) <= float(r["achievable_R"]) + 1e-12


def test_simulate(capsys):
    args = ["simulate", DATA / "identical_outputs.json", "--rate", "1", "--epsilon-prime", "0.1",
            "--trials", "8", "--seed", "5"]
    code, out, _ = run(args, capsys)
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 9
    errs = [float(line.split(",")[4]) for line in lines[1:]]
    assert min(errs) >= 0.5 - 1e-9


def test_simulate_bound_on_fixture(capsys):
    args = ["simulate", DATA / "zero_plus.json", "--rate", "2", "--epsilon-prime", "0.05",
            "--trials", "30", "--seed", "1"]
    _, out, _ = run(args, capsys)
    rows = [line.split(",") for line in out.strip().splitlines()[1:]]
    errs = [float(r[4]) for r in rows]
    mean = sum(errs) / len(errs)
    se = (sum((e - mean) ** 2 for e in errs) / (len(errs) - 1)) ** 0.5 / len(errs) ** 0.5
    assert mean <= float(rows[0][5]) + 3 * se


def test_stein_equal_states(capsys):
    code, out, _ = run(["stein", DATA / "state_plus.json", DATA / "state_plus.json",
                        "--epsilon", "0.1", "--n", "3"], capsys)
    lines = out.strip().splitlines()[1:]
    assert code == 0
    for line in lines:
        n, rate = line.split(",")[:2]
        assert float(rate) == pytest.approx(-math.log2(0.9) / int(n), abs=1e-11)


def test_capacity_noiseless(capsys):
    code, out, _ = run(["capacity", DATA / "noiseless_binary.json", "--epsilon", "0", "--n", "3"], capsys)
    assert code == 0
    assert [line.split(",")[2] for line in out.strip().splitlines()[1:]] == ["1", "1", "1"]


def test_check_hn(capsys):
    code, out, _ = run(["check-hn", "--count", "200", "--seed", "42"], capsys)
    assert code == 0
    r = row(out)
    assert float(r["min_slack"]) >= -1e-9 and r["failures"] == "0"


def test_out_file(tmp_path, capsys):
    target = tmp_path / "dh.csv"
    code, out, _ = run(["dh", DATA / "state_plus.json", DATA / "state_plus.json", "--epsilon", "0.1",
                        "--out", target], capsys)
    assert code == 0 and out == "" and target.read_text().startswith("beta,dh")


def test_parse_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"dim_out": 2,\n "inputs": [}')
    code, _, err = run(["dh", bad, bad, "--epsilon", "0.1"], capsys)
    assert code == EXIT_PARSE and "line 2" in err
    bad.write_text(json.dumps({"dim_out": 2, "inputs": [{"label": "a", "state": [[[1, 0], [0, 0]], [[0, 0]]]}]}))
    code, _, err = run(["dh", bad, bad, "--epsilon", "0.1"], capsys)
    assert code == EXIT_PARSE and "row 1" in err
    code, _, err = run(["dh", DATA / "noiseless_binary.json", DATA / "state_plus.json", "--epsilon", "0.1"], capsys)
    assert code == EXIT_PARSE and "exactly one input" in err
    code, _, _ = run(["dh", DATA / "state_plus.json", DATA / "state_plus.json", "--epsilon", "1.0"], capsys)
    assert code == EXIT_PARSE


def test_parse_channel_rejects_invalid_states():
    doc = {"dim_out": 1, "inputs": [{"label": "a", "state": [[[2, 0]]]}]}
    with pytest.raises(ParseError):
        parse_channel(doc)
    with pytest.raises(ParseError):
        parse_channel({"dim_out": 1, "inputs": [{"label": 3, "state": [[[1, 0]]]}]})


def test_cap_exit_code(capsys):
    code, _, err = run(["stein", DATA / "state_plus.json", DATA / "state_plus.json",
                        "--epsilon", "0.1", "--n", "13"], capsys)
    assert code == EXIT_CAP and "cap" in err


def test_certification_exit_code(capsys):
    code, _, err = run(["dh", DATA / "state_plus.json", DATA / "state_two_thirds.json", "--epsilon", "0.05",
                        "--tol-gap", "1e-16"], capsys)
    assert code == EXIT_CERT and "duality gap" in err


def test_module_entry_point_deterministic():
    cmd = [sys.executable, "-m", "oneshotcq", "simulate", str(DATA / "zero_plus.json"), "--rate", "2",
           "--epsilon-prime", "0.05", "--trials", "5", "--seed", "9"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a.startswith(b"trial,")
