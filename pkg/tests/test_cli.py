import csv
import io
import json

import numpy as np
import pytest

from conftest import data_path
from fmprocess.cli import main
from fmprocess.generate import random_instance


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def write(tmp_path):
    def _write(doc, name="in.json"):
        p = tmp_path / name
        p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
        return p
    return _write


def test_random_system_validates(capsys, write):
    code, out, _ = run(capsys, "random", "system", "--d", 2, "--dim-x", 2, "--seed", 7)
    assert code == 0
    code, out2, _ = run(capsys, "random", "system", "--d", 2, "--dim-x", 2, "--seed", 7)
    assert out == out2
    code, rep, _ = run(capsys, "validate", write(out))
    assert code == 0 and json.loads(rep)["valid"]


def test_random_chain_validates(capsys, write):
    _, out, _ = run(capsys, "random", "chain", "--n", 2, "--m", 2, "--seed", 1)
    code, rep, _ = run(capsys, "validate", write(out))
    assert code == 0 and json.loads(rep)["stationarity_residual"] < 1e-9


def test_transfer_depth(capsys):
    code, out, _ = run(capsys, "transfer", "--depth", 3, data_path("sample_system.json"))
    rep = json.loads(out)
    assert code == 0 and rep["depth"] == 3
    assert len(rep["coefficients"]) == 1 + 2 + 4 + 8
    assert rep["coefficients"][0]["word"] == []


def test_observe_and_dilate(capsys):
    code, out, _ = run(capsys, "observe", "--depth", 4, data_path("sample_system.json"))
    assert code == 0 and "observable" in json.loads(out)
    code, out, _ = run(capsys, "dilate", "--depth", 3, data_path("sample_system.json"))
    rep = json.loads(out)
    assert code == 0 and rep["N"] == 3 and rep["isometry_residual"] < 1e-12


def test_ac_on_gamma_zero(capsys):
    code, out, _ = run(capsys, "ac", data_path("gamma_zero_cascade.json"))
    rep = json.loads(out)
    assert code == 0
    for key in ["criterion_1b", "criterion_2a", "criterion_3a", "criterion_4_flag",
                "criterion_5", "verdict"]:
        assert rep[key] is False
    assert rep["tol"] == 1e-9 and "depth" in rep


def test_cascade_report(capsys):
    code, out, _ = run(capsys, "cascade", data_path("gamma_zero_cascade.json"))
    rep = json.loads(out)
    assert code == 0
    assert rep["block_formula_residual"] < 1e-10 and rep["recover_gamma_residual"] < 1e-10
    assert rep["system"]["kind"] == "system"


def test_markov_ergodic(capsys):
    code, out, _ = run(capsys, "markov", data_path("ergodic_qubit_chain.json"))
    rep = json.loads(out)
    assert code == 0 and rep["ac"]["verdict"] is True and rep["ergodic"] is True
    assert rep["depth"] == 2 and rep["gns_dims"] == [4, 4]


def test_csv_output(capsys):
    code, out, _ = run(capsys, "observe", "--format", "csv", data_path("sample_system.json"))
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["path", "value"]
    assert any(r[0] == "observable" for r in rows)


def test_exit_codes(capsys, write):
    code, _, err = run(capsys, "validate", write("{not json"))
    assert code == 1 and "not valid JSON" in err
    code, _, err = run(capsys, "validate", "/nonexistent/file.json")
    assert code == 1 and "cannot read" in err
    code, _, err = run(capsys, "transfer", data_path("ergodic_qubit_chain.json"))
    assert code == 1 and "expected a system" in err
    doc = random_instance("system", seed=3)
    doc["A"] = [[[[2.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [2.0, 0.0]]]] * 2
    code, _, err = run(capsys, "validate", write(doc))
    assert code == 2 and "residual" in err
    chain = json.loads(data_path("ergodic_qubit_chain.json").read_text())
    chain["phi"] = [[[0.9, 0], [0, 0]], [[0, 0], [0.1, 0]]]
    code, _, err = run(capsys, "markov", write(chain))
    assert code == 2 and "stationary" in err
    code, _, err = run(capsys, "transfer", "--depth", 0, data_path("sample_system.json"))
    assert code == 1


def test_shape_mismatch_is_input_error(capsys, write):
    doc = json.loads(data_path("gamma_zero_cascade.json").read_text())
    doc["gamma"] = [[[0.0, 0.0]] * 3]
    code, _, err = run(capsys, "ac", write(doc))
    assert code == 1 and "gamma must be" in err
