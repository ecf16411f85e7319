import csv
import json
import subprocess
import sys

import pytest

from valmod.cli import main, run_spec

GAP_SPEC = {"space": {"kind": "H2_POLYDISK", "n": 2, "D": 4}, "subspace": {"preset": "EX_11_1"},
            "checks": ["beurling"]}
BIDISK_SPEC = {"space": {"kind": "H2_POLYDISK", "n": 2, "D": 4}, "subspace": {"preset": "EX_18_7"},
               "checks": ["inner", {"boundary": {"grid": [{"kind": "TORUS", "per_circle": 8},
                                                          {"kind": "SPHERE", "count": 40}]}}]}
SUBMODULE = {"space": {"kind": "H2_BALL", "n": 2, "D": 4},
             "subspace": {"preset": "SUBMODULE([z1^2 - z2])"},
             "checks": ["beurling", {"reconstruct": {"r": [0, 1], "h": "first"}}, "series"]}


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for var in ("VALMOD_MODE", "VALMOD_TOL", "VALMOD_OUT_DIR", "VALMOD_SEED"):
        monkeypatch.delenv(var, raising=False)


def write_spec(tmp_path, spec, name="spec.json"):
    path = tmp_path / name
    path.write_text(json.dumps(spec))
    return str(path)


def report(out):
    return json.loads((out / "report.json").read_text())


class TestRun:
    @pytest.mark.parametrize("mode", ["float", "exact"])
    def test_counterexample_exits_2(self, tmp_path, mode):
        out = tmp_path / "out"
        code = main(["run", write_spec(tmp_path, GAP_SPEC), "--mode", mode, "--out-dir", str(out)])
        assert code == 2
        rep = report(out)
        assert rep["results"]["beurling"]["verdicts"] == {
            "invariant": "FAIL", "r1_inner": "PASS", "full_projection": "FAIL"}
        assert rep["results"]["beurling"]["mode"] == mode
        assert rep["integrity_errors"] == []

    def test_bidisk_function_boundary(self, tmp_path):
        out = tmp_path / "out"
        assert main(["run", write_spec(tmp_path, BIDISK_SPEC), "--out-dir", str(out)]) == 0
        rows = list(csv.reader(open(out / "boundary_torus.csv")))
        vals = {(r[1], r[3]): float(r[-1]) for r in rows[1:] if r[0].isdigit()}
        assert vals[("1.0", "1.0")] == 2.0
        assert vals[("1.0", "-1.0")] == 0.0
        sphere = list(csv.reader(open(out / "boundary_sphere.csv")))
        assert float(sphere[1][-1]) == 0.0 and float(sphere[2][-1]) == 1.0
        assert report(out)["results"]["inner"]["verdict"] == "PASS"

    def test_submodule_reconstruction(self, tmp_path):
        out = tmp_path / "out"
        assert main(["run", write_spec(tmp_path, SUBMODULE), "--out-dir", str(out)]) == 0
        rec = report(out)["results"]["reconstruct"]
        assert rec["ok"] and rec["residual"] <= 1e-9
        dims = list(csv.reader(open(out / "dimensions.csv")))
        assert dims[0] == ["k", "dim_V_k", "dim_W_k"]
        assert sum(int(r[2]) for r in dims[1:]) == int(dims[1][1])

    def test_blaschke_preset(self, tmp_path):
        spec = {"space": {"kind": "H2_POLYDISK", "n": 1, "D": 12},
                "subspace": {"preset": "EX_11_7(1/2)"}, "checks": ["beurling"]}
        out = tmp_path / "out"
        assert main(["run", write_spec(tmp_path, spec), "--out-dir", str(out)]) == 2
        res = report(out)["results"]["beurling"]
        assert res["verdicts"] == {"invariant": "FAIL", "r1_inner": "FAIL", "full_projection": "PASS"}
        assert res["checks"]["full_projection"]["truncation_limited"]

    def test_deterministic(self, tmp_path):
        path = write_spec(tmp_path, SUBMODULE)
        main(["run", path, "--out-dir", str(tmp_path / "a"), "--seed", "4"])
        main(["run", path, "--out-dir", str(tmp_path / "b"), "--seed", "4"])
        assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()

    def test_env_and_flag_precedence(self, tmp_path, monkeypatch):
        monkeypatch.setenv("VALMOD_MODE", "exact")
        monkeypatch.setenv("VALMOD_OUT_DIR", str(tmp_path / "env"))
        spec = dict(GAP_SPEC, mode="float")
        out = run_spec(spec)
        assert out.report["mode"] == "exact"
        assert (tmp_path / "env" / "report.json").exists()
        out = run_spec(spec, mode="float", out_dir=tmp_path / "flag")
        assert out.report["mode"] == "float"

    def test_exact_fallback_is_tagged(self, tmp_path):
        spec = dict(GAP_SPEC, checks=["invariant", "wandering"])
        out = run_spec(spec, mode="exact", out_dir=tmp_path)
        assert out.report["results"]["invariant"]["mode"] == "exact"
        assert out.report["results"]["wandering"]["mode"] == "float-fallback"

    def test_tolerance_override(self, tmp_path):
        spec = dict(SUBMODULE, tolerances={"check": 1e-7})
        out = run_spec(spec, out_dir=tmp_path)
        assert out.report["tolerances"]["check"] == 1e-7


class TestErrors:
    @pytest.mark.parametrize("spec", [
        {"space": {"kind": "H2_POLYDISK", "n": 2}},
        {"space": {"kind": "NOPE", "n": 2, "D": 3}},
        {"space": {"kind": "H2_POLYDISK", "n": 1, "D": 4}, "subspace": {"preset": "EX_11_7(2)"}},
        {"space": {"kind": "H2_POLYDISK", "n": 2, "D": 3}, "subspace": {"generators": ["z1 +"]}},
        {"space": {"kind": "H2_POLYDISK", "n": 2, "D": 3}, "checks": ["plot"]},
    ])
    def test_bad_specs_exit_1(self, tmp_path, spec):
        assert main(["run", write_spec(tmp_path, spec), "--out-dir", str(tmp_path)]) == 1

    def test_exact_size_limit(self, tmp_path):
        spec = dict(GAP_SPEC, space={"kind": "H2_POLYDISK", "n": 2, "D": 6})
        assert main(["run", write_spec(tmp_path, spec), "--mode", "exact", "--out-dir", str(tmp_path)]) == 1

    def test_missing_file(self, tmp_path):
        assert main(["run", str(tmp_path / "missing.json")]) == 1

    def test_bad_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{nope")
        assert main(["run", str(path)]) == 1


class TestSelftest:
    def test_clean_subset(self, capsys):
        assert main(["selftest", "--only", "1,3"]) == 0
        out = capsys.readouterr().out
        assert "criterion  1 PASS" in out and "criterion  3 PASS" in out

    def test_loose_tolerance_is_detected(self, monkeypatch, capsys):
        monkeypatch.setenv("VALMOD_TOL", "0.1")
        assert main(["selftest", "--only", "6,7"]) == 3
        assert "FAIL" in capsys.readouterr().out

    def test_console_entry_point(self, tmp_path):
        res = subprocess.run([sys.executable, "-m", "valmod.cli", "run", write_spec(tmp_path, GAP_SPEC),
                              "--mode", "exact", "--out-dir", str(tmp_path / "o")],
                             capture_output=True, text=True)
        assert res.returncode == 2
        assert json.loads(res.stdout)["exit_code"] == 2
