import io
import json
import subprocess
import sys
from importlib import resources

import numpy as np
import pytest

from qdiscrim.cli import main, tolerances_from_env
from qdiscrim.ensemble import Povm
from qdiscrim.errors import ValidationError
from qdiscrim.io import save_povm

DATA = resources.files("qdiscrim") / "data"


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def run_json(*argv):
    code, out, err = run(*argv, "--json")
    return code, (json.loads(out) if out else None), err


def test_bounds_report_layout():
    code, report, _ = run_json("bounds", DATA / "ex1.json")
    assert code == 0
    assert list(report) == ["command", "inputs", "results", "tolerances", "version"]
    assert report["results"]["bounds"]["L4"] == pytest.approx(7 / 36, abs=1e-9)
    assert report["results"]["ranking"] == "L4>L5>L2>L6>L3>L0=L1"
    assert len(report["inputs"]["ensemble"]) == 64
    assert "helstrom" not in report["results"]


def test_two_state_bounds_and_exact_agree():
    _, bounds, _ = run_json("bounds", DATA / "two_state.json")
    code, exact, _ = run_json("exact", DATA / "two_state.json")
    assert code == 0
    assert exact["results"]["method"] == "two_state_helstrom"
    assert exact["results"]["qe"] == pytest.approx(bounds["results"]["helstrom"], abs=1e-12)


def test_exact_example1():
    code, report, _ = run_json("exact", DATA / "ex1.json")
    assert code == 0
    assert report["results"]["qe"] == pytest.approx(7 / 36, abs=1e-9)
    assert report["results"]["certificate"]["verdict"] == "pass"


def test_exact_unsupported_instance():
    code, out, err = run("exact", DATA / "ex2.json")
    assert code == 4
    assert out == ""
    assert "semidefinite" in err


def test_certify_exit_codes(tmp_path):
    assert run("certify", DATA / "ex5.json", DATA / "ex5_optimal_povm.json")[0] == 0
    code, report, err = run_json("certify", DATA / "ex1.json", DATA / "ex1_uniform_povm.json")
    assert code == 2
    assert report["results"]["verdict"] == "fail"
    assert report["results"]["min_margin"] < 0
    save_povm(Povm((np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))), tmp_path / "qubit.json")
    assert run("certify", DATA / "ex1.json", tmp_path / "qubit.json")[0] == 1


def test_io_and_parse_errors(tmp_path):
    assert run("bounds", tmp_path / "missing.json")[0] == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run("bounds", bad)
    assert code == 3 and "line 1" in err


def test_validation_error(tmp_path):
    doc = json.loads((DATA / "ex1.json").read_text())
    doc["priors"] = [0.49, 0.49, 0.0]
    path = tmp_path / "e.json"
    path.write_text(json.dumps(doc))
    code, _, err = run("bounds", path)
    assert code == 1 and "prior" in err


def test_usage_errors_are_validation_errors():
    assert run("bounds")[0] == 1
    assert run("compare", "--kind", "nonsense")[0] == 1


def test_structured_command():
    code, report, _ = run_json("structured", "--alphas", "1/2,1/3,1/4", "--priors", "uniform")
    assert code == 0
    r = report["results"]
    assert r["qu"] == pytest.approx(13 / 36, abs=1e-12)
    assert r["qe"] == pytest.approx(7 / 36, abs=1e-12)
    assert r["twice_qe_holds"] is False
    code, report, _ = run_json("structured", "--alphas", "0,0,0")
    assert code == 0 and report["results"]["qe"] == report["results"]["qu"] == 0.0
    assert report["results"]["ratio"] == "nan"


def test_structured_ratio_threshold():
    args = ("structured", "--alphas", "0.3,3e-6,3e-6", "--ratio-threshold")
    assert run(*args, "10000")[0] == 0
    assert run(*args, "1e6")[0] == 2


def test_compare_is_byte_identical():
    argv = ("compare", "--seed", "4", "--trials", "30", "--m", "3", "--dim", "2", "--json")
    first = run(*argv)
    second = run(*argv)
    parallel = run(*argv, "--workers", "2")
    assert first[0] == 0
    assert first[1] == second[1] == parallel[1]


def test_paper_examples_lists_every_entry():
    code, report, err = run_json("paper-examples")
    names = [row["name"] for row in report["results"]["checks"]]
    assert "example1.l4" in names and "example5.qu" in names
    assert report["results"]["total"] == len(names)
    assert code == (0 if not report["results"]["failed"] else 2)


def test_tolerance_override(monkeypatch):
    assert tolerances_from_env({"QDISCRIM_TOL": "tol_psd=1e-8, tol_rank=1e-12"}).tol_psd == 1e-8
    with pytest.raises(ValidationError):
        tolerances_from_env({"QDISCRIM_TOL": "tol_psd"})
    monkeypatch.setenv("QDISCRIM_TOL", "tol_rank=1e-12")
    code, report, _ = run_json("bounds", DATA / "ex3.json")
    assert code == 0 and report["tolerances"]["tol_rank"] == 1e-12
    monkeypatch.setenv("QDISCRIM_TOL", "tol_nope=1")
    assert run("bounds", DATA / "ex3.json")[0] == 1


def test_human_output():
    code, out, _ = run("bounds", DATA / "ex3.json")
    assert code == 0
    assert "bounds.L4  0.33333333333333" in out


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qdiscrim", "structured", "--alphas", "0.5,0.5"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "qe  0.25" in proc.stdout
