import json
import subprocess
import sys
from pathlib import Path

import pytest

from gca.cli import main

FIX = Path(__file__).parent / "fixtures"


def run_json(capsys, *argv):
    code = main(list(argv))
    return code, json.loads(capsys.readouterr().out)


def test_mutate_rank2(capsys):
    code, rep = run_json(capsys, "mutate", "--seed", "rank2-r12", "--word", "2")
    assert code == 0
    assert rep["steps"][0]["new_variable"] == "x1^2*x2^-1 + z[2,1]*x1*x2^-1*x4 + x2^-1*x4^2"
    # mu(B R) R^-1: entry (4,1) picks up (2*1 + 2*1)/2 = 2
    assert rep["final"]["Btilde"] == [[0, 1], [-1, 0], [1, 0], [2, -1]]


def test_mutate_empty_and_repeated_word(capsys):
    _, empty = run_json(capsys, "mutate", "--seed", "a2-principal")
    _, twice = run_json(capsys, "mutate", "--seed", "a2-principal", "--word", "1,1")
    assert empty["steps"] == [] and empty["final"] == twice["final"]
    assert empty["final"]["cluster"] == ["x1", "x2", "x3", "x4"]


def test_pattern(capsys):
    code, rep = run_json(capsys, "pattern", "--seed", "rank3-r123", "--word", "1,3,2,1")
    assert code == 0 and rep["pass"] and rep["checks"]


def test_explore(capsys):
    code, rep = run_json(capsys, "explore", "--seed", "a2-principal", "--unlabeled", "--check")
    assert code == 0 and rep["graph"]["num_clusters"] == 5 and rep["graph"]["closed"]
    assert rep["fvector_checks"]["failures"] == 0
    code, rep = run_json(capsys, "explore", "--seed", "rank2-r22", "--budget", "1")
    assert code == 0 and rep["graph"]["flag"] == "ExplorationBudgetExceeded"


def test_verify_corrupted_lambda(capsys):
    code, rep = run_json(capsys, "verify", "--seed", str(FIX / "corrupted_lambda.json"),
                         "--suite", "involution", "--trials", "2")
    assert code == 1 and not rep["pass"]
    wit = rep["seed_checks"][0]["witness"]
    assert wit["error"] == "CompatibilityBroken" and wit["detail"] == [[1, 0, 0, 3], [0, 1, -3, 0]]


def test_verify_random(capsys):
    code, rep = run_json(capsys, "verify", "--trials", "3", "--depth", "4", "--rand-seed", "5")
    assert code == 0 and rep["pass"]


def test_invariant(capsys):
    code, rep = run_json(capsys, "invariant", "--seed", "rank2-r12", "--u", "2/0,1", "--v", "/1",
                         "--word", "1,2,1")
    assert code == 0 and rep["pass"]
    assert rep["f_invariant"] == 0
    assert rep["containment"]["u"]["verdict"] == "MonomialAfterMu"
    assert len(rep["bracket_values_by_vertex"]) == 4


@pytest.mark.parametrize("argv,needle", [
    (["mutate", "--seed", "no-such-seed"], "no such file or sample"),
    (["mutate", "--seed", "a2-principal", "--word", "3"], "1..2"),
    (["mutate", "--seed", "a2-principal", "--word", "a"], "comma-separated"),
    (["mutate"], "needs --seed"),
    (["verify", "--trials", "0"], "--trials must be positive"),
    (["verify", "--suite", "bogus"], "unknown suite"),
    (["invariant", "--seed", "a2-principal"], "--u and --v"),
    (["invariant", "--seed", "a2-principal", "--u", "1", "--v", "/1"], "WORD/EXPONENTS"),
])
def test_usage_errors(capsys, argv, needle):
    assert main(argv) == 2
    err = capsys.readouterr().err
    assert err.startswith("gca: error:") and needle in err


def test_parse_error_reports_line(capsys):
    assert main(["mutate", "--seed", str(FIX / "bad_syntax.json")]) == 2
    assert "bad_syntax.json:4:" in capsys.readouterr().err


def test_bad_matrix_reports_line(tmp_path, capsys):
    p = tmp_path / "s.json"
    p.write_text('{\n  "r": [1, 1],\n  "coefficients": "principal",\n  "B": [[0, 1], [1, 0]]\n}\n')
    assert main(["mutate", "--seed", str(p)]) == 2
    assert "s.json:4" in capsys.readouterr().err


def test_text_and_out(tmp_path, capsys):
    out = tmp_path / "r.txt"
    assert main(["explore", "--seed", "rank1-r2", "--text", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    text = out.read_text()
    assert "num_clusters: 2" in text and "closed: True" in text


def test_byte_identical_reruns():
    cmd = [sys.executable, "-m", "gca.cli", "verify", "--trials", "3", "--depth", "4", "--rand-seed", "11"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and json.loads(a)["pass"]
