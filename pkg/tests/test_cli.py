from __future__ import annotations

import json
import subprocess
import sys

import pytest

from zne.circuit import parse_circuit, unitary_of
from zne.cli import EXIT_CONFIG, EXIT_ESTIMATION, EXIT_OK, main


@pytest.fixture
def circuit_file(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("qubits 2\nH 0\nCNOT 0 1\nT 1\n")
    return path


@pytest.fixture
def curve_file(tmp_path):
    path = tmp_path / "curve.csv"
    path.write_text("lambda,y\n1,0.85\n2,0.7\n3,0.55\n")
    return path


class TestFold:
    def test_global(self, circuit_file, capsys):
        assert main(["fold", "--in", str(circuit_file), "--lambda", "3"]) == EXIT_OK
        out = capsys.readouterr().out
        header, body = out.split("\n", 1)
        assert header == "# lambda requested 3.0, realized 3.0"
        folded = parse_circuit(body)
        original = parse_circuit(circuit_file.read_text())
        assert folded.depth() == 9
        assert abs(unitary_of(folded) - unitary_of(original)).max() < 1e-10

    def test_realized_differs(self, circuit_file, capsys):
        main(["fold", "--in", str(circuit_file), "--lambda", "1.5", "--method", "random", "--seed", "2"])
        assert "realized 1.6666666666666665" in capsys.readouterr().out

    def test_missing_file(self, tmp_path, capsys):
        assert main(["fold", "--in", str(tmp_path / "nope.txt"), "--lambda", "2"]) == EXIT_CONFIG
        assert "cannot read circuit" in capsys.readouterr().err

    def test_syntax_error(self, tmp_path, capsys):
        path = tmp_path / "bad.txt"
        path.write_text("qubits 1\nFOO 0\n")
        assert main(["fold", "--in", str(path), "--lambda", "2"]) == EXIT_CONFIG
        assert "line 2" in capsys.readouterr().err

    def test_bad_lambda(self, circuit_file):
        assert main(["fold", "--in", str(circuit_file), "--lambda", "0.5"]) == EXIT_CONFIG

    def test_bad_method(self, circuit_file):
        assert main(["fold", "--in", str(circuit_file), "--lambda", "2", "--method", "up"]) == EXIT_CONFIG


class TestExtrapolate:
    def test_linear(self, curve_file, capsys):
        assert main(["extrapolate", "--curve", str(curve_file), "--method", "linear"]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["value"] == pytest.approx(1.0)
        assert data["model"] == "linear"

    def test_exp_with_asymptote(self, tmp_path, capsys):
        path = tmp_path / "e.csv"
        path.write_text("lambda,y\n1,0.55\n2,0.4\n")
        assert main(["extrapolate", "--curve", str(path), "--method", "exp", "--asymptote", "0.25"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["value"] == pytest.approx(0.25 + 0.3**2 / 0.15)

    def test_not_enough_points(self, curve_file):
        assert main(["extrapolate", "--curve", str(curve_file), "--method", "poly:3"]) == EXIT_ESTIMATION

    def test_flat_at_asymptote(self, tmp_path):
        path = tmp_path / "flat.csv"
        path.write_text("lambda,y\n1,0.25\n2,0.25\n")
        assert main(["extrapolate", "--curve", str(path), "--method", "exp",
                     "--asymptote", "0.25"]) == EXIT_ESTIMATION

    def test_bad_method(self, curve_file):
        assert main(["extrapolate", "--curve", str(curve_file), "--method", "poly:x"]) == EXIT_CONFIG

    def test_missing_curve(self, tmp_path):
        assert main(["extrapolate", "--curve", str(tmp_path / "x.csv"), "--method", "linear"]) == EXIT_CONFIG


class TestBench:
    def test_writes_reports(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"scenario": "table2", "n_circuits": 1, "scaling": ["global"]}))
        out = tmp_path / "out"
        assert main(["bench", "table2", "--config", str(cfg), "--seed", "3", "--out", str(out)]) == EXIT_OK
        printed = json.loads(capsys.readouterr().out)
        assert printed["scenario"] == "table2"
        names = sorted(p.name for p in out.iterdir())
        assert names == ["table2.csv", "table2.json", "table2_table.csv"]
        assert json.loads((out / "table2.json").read_text())["config"]["seed"] == 3

    def test_scenario_mismatch(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"scenario": "rb_decay"}))
        assert main(["bench", "table2", "--config", str(cfg)]) == EXIT_CONFIG

    def test_unknown_scenario(self):
        assert main(["bench", "nothing"]) == EXIT_CONFIG

    def test_unknown_key(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"scenario": "table2", "circuits": 4}))
        assert main(["bench", "table2", "--config", str(cfg)]) == EXIT_CONFIG


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2


def test_module_entry_point(curve_file):
    proc = subprocess.run([sys.executable, "-m", "zne.cli", "extrapolate", "--curve", str(curve_file),
                           "--method", "poly:1"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["value"] == pytest.approx(1.0)
