import csv
import json
import subprocess
import sys
import time

import pytest

from waveguide_nls.cli import main
from waveguide_nls.experiments import KINDS


def write(path, obj):
    path.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(path)


def test_list_kinds(capsys):
    assert main(["list-kinds"]) == 0
    out = capsys.readouterr().out.split("\n")
    assert [line.split()[0] for line in out if line] == list(KINDS)


def test_validate_prints_normalized_config_quickly(tmp_path, capsys):
    cfg = write(tmp_path / "c.json", {"kind": "strichartz", "sweep": {"N": [2, 4]}})
    start = time.perf_counter()
    assert main(["validate", "--config", cfg]) == 0
    assert time.perf_counter() - start < 0.1
    data = json.loads(capsys.readouterr().out)
    assert data["sweep"] == {"N": [2, 4], "p": [4.0]} and data["ensemble"] == 64


def test_validate_reports_key(tmp_path, capsys):
    cfg = write(tmp_path / "c.json", {"kind": "strichartz", "sweep": {"N": [3]}})
    assert main(["validate", "--config", cfg]) == 1
    assert "sweep.N" in capsys.readouterr().err
    assert main(["validate", "--config", write(tmp_path / "bad.json", "{not json")]) == 1


def test_missing_config_exits_1_without_outputs(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--config", str(tmp_path / "nope.json"), "--out", str(out)]) == 1
    assert "not found" in capsys.readouterr().err
    assert not out.exists()


@pytest.mark.slow
def test_conservation_default_run(tmp_path, capsys):
    cfg = write(tmp_path / "c.json", {"kind": "conservation"})
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out), "--threads", "1"]) == 0
    assert "PASS mass drift" in capsys.readouterr().out
    rows = list(csv.reader(open(out / "records.csv")))
    assert rows[0] == ["kappa", "t", "mass_drift", "energy_drift", "momentum_drift"]
    assert len(rows) - 1 == 101  # t = 0, 0.01, ..., 1
    report = json.loads((out / "report.json").read_text())
    assert report["passed"] and report["kind"] == "conservation"


def test_impossible_tolerance_exits_2(tmp_path, capsys):
    cfg = write(tmp_path / "c.json", {"kind": "strichartz", "ensemble": 2,
                                      "sweep": {"N": [2, 4]}, "tolerances": {"max_slope": 0.0}})
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out), "--seed", "3"]) == 2
    captured = capsys.readouterr()
    assert "FAIL strichartz slope" in captured.out and "criteria violated" in captured.err
    assert json.loads((out / "report.json").read_text())["config"]["seed"] == 3


def test_threads_env_fallback(tmp_path, monkeypatch):
    cfg = write(tmp_path / "c.json", {"kind": "strichartz", "ensemble": 2, "sweep": {"N": [2, 4]}})
    monkeypatch.setenv("WAVEGUIDE_NLS_THREADS", "2")
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert json.loads((tmp_path / "o" / "report.json").read_text())["meta"]["threads"] == 2
    monkeypatch.setenv("WAVEGUIDE_NLS_THREADS", "zero")
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o2")]) == 1


def test_ensemble_override(tmp_path):
    cfg = write(tmp_path / "c.json", {"kind": "strichartz", "ensemble": 5, "sweep": {"N": [2, 4]},
                                      "params": {"dirichlet": False}})
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o"), "--ensemble", "2"]) == 0
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert len(report["records"]) == 4


@pytest.fixture
def small_report(tmp_path):
    cfg = write(tmp_path / "c.json", {"kind": "strichartz", "ensemble": 2, "sweep": {"N": [2, 4]}})
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "run")]) == 0
    return tmp_path / "run" / "report.json"


def test_plot_is_deterministic(small_report, tmp_path):
    assert main(["plot", "--report", str(small_report), "--out", str(tmp_path / "p1")]) == 0
    assert main(["plot", "--report", str(small_report), "--out", str(tmp_path / "p2")]) == 0
    a = (tmp_path / "p1" / "strichartz.svg").read_bytes()
    assert a == (tmp_path / "p2" / "strichartz.svg").read_bytes()
    assert a.startswith(b"<svg") and b"slope" in a


def test_plot_rejects_bad_reports(small_report, tmp_path, capsys):
    data = json.loads(small_report.read_text())
    empty = write(tmp_path / "empty.json", dict(data, records=[]))
    assert main(["plot", "--report", empty, "--out", str(tmp_path / "p")]) == 1
    assert "no records" in capsys.readouterr().err
    broken = write(tmp_path / "broken.json", {"kind": "strichartz"})
    assert main(["plot", "--report", broken, "--out", str(tmp_path / "p")]) == 1
    assert "malformed report" in capsys.readouterr().err
    assert main(["plot", "--report", write(tmp_path / "x.json", "[1"), "--out", str(tmp_path / "p")]) == 1


def test_usage_errors_exit_1(capsys):
    assert main(["run", "--config", "c.json"]) == 1
    assert main(["run", "--config", "c.json", "--out", "o", "--seed", "-1"]) == 1
    assert main(["frobnicate"]) == 1


def test_console_entry_point(tmp_path):
    done = subprocess.run([sys.executable, "-m", "waveguide_nls.cli", "list-kinds"],
                          capture_output=True, text=True)
    assert done.returncode == 0 and "strichartz" in done.stdout
    bad = subprocess.run([sys.executable, "-m", "waveguide_nls.cli", "run", "--config", "x"],
                         capture_output=True, text=True)
    assert bad.returncode == 1 and "--out" in bad.stderr  # usage errors are operational
