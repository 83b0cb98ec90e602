import json
import subprocess
import sys
from pathlib import Path

import pytest

from transferlab import NumericalError
from transferlab import cli
from transferlab.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, emit_schema, list_experiments, main, run

GOLDEN = Path(__file__).parent / "golden"


def _toml(tmp_path, text, name="c.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_list(capsys):  # [TRIVIAL] fixed set of six kinds
    assert len(list_experiments()) == 6
    assert main(["list"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert [ln.split()[0] for ln in lines] == [k for k, _ in list_experiments()]


def test_schema(tmp_path, capsys):
    assert main(["schema", "determinant"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out) == emit_schema("determinant")
    assert main(["schema", "norms", "--out", str(tmp_path / "s.json")]) == EXIT_OK
    assert json.loads((tmp_path / "s.json").read_text())["properties"]["kind"] == {"const": "norms"}


def test_schema_bogus(capsys):  # [TRIVIAL]
    assert main(["schema", "bogus"]) == EXIT_VALIDATION
    assert "bogus" in capsys.readouterr().err


@pytest.mark.parametrize("k, eps", [(2, 0.2), (3, 0.35)])
def test_expansion_condition_exit(tmp_path, capsys, k, eps):  # [TRIVIAL] k - 2 pi eps <= 1
    cfg = _toml(tmp_path, f'kind = "determinant"\n[map]\nkind = "expanding-circle"\nk = {k}\neps = {eps}\n')
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_VALIDATION
    assert "expansion condition" in capsys.readouterr().err


@pytest.mark.parametrize("text", ['kind = "bogus"\n', 'kind = "norms"\n[params]\nN = 4\n', "kind = \n"])
def test_validation_exits(tmp_path, text):
    assert main(["run", "--config", _toml(tmp_path, text), "--out", str(tmp_path / "o")]) == EXIT_VALIDATION


def test_bad_threads_and_missing_config(tmp_path):
    assert main(["run", "--config", str(tmp_path / "none.toml"), "--out", str(tmp_path)]) == EXIT_VALIDATION
    cfg = _toml(tmp_path, 'kind = "determinant"\n')
    assert main(["run", "--config", cfg, "--threads", "0", "--out", str(tmp_path / "o")]) == EXIT_VALIDATION


def test_numerical_failure_exit(tmp_path, monkeypatch, capsys):
    def boom(cfg, threads):
        raise NumericalError("eigensolver did not converge")

    monkeypatch.setattr(cli, "run_recipe", boom)
    cfg = _toml(tmp_path, 'kind = "determinant"\n')
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_NUMERICAL
    assert "numerical failure" in capsys.readouterr().err


def test_halfweight_report(bundled, tmp_path):  # [DERIVED] d(z) = 1 - z and L 1 = 1
    run(bundled["doubling_halfweight"], tmp_path)
    s = json.loads((tmp_path / "summary.json").read_text())
    zeros = [(z["z"]["re"], z["z"]["im"], z["order"]) for z in s["results"]["zeros"]]
    res = [(r["re"], r["im"], r["multiplicity"]) for r in s["results"]["resonances"]["resonances"]]
    assert zeros == [(1.0, 0.0, 1)] and res == [(1.0, 0.0, 1)]


@pytest.mark.parametrize("name", ["doubling_halfweight", "doubling_unit", "cat_unit"])
def test_golden(bundled, tmp_path, name):
    assert main(["run", "--config", str(bundled[name]), "--out", str(tmp_path), "--threads", "1"]) == EXIT_OK
    expected = sorted(p.name for p in (GOLDEN / name).iterdir())
    produced = sorted(p.name for p in tmp_path.iterdir() if p.name != "run_info.json")
    assert produced == expected
    for f in expected:
        assert (tmp_path / f).read_bytes() == (GOLDEN / name / f).read_bytes(), f


def test_every_report_carries_hash(bundled, tmp_path):
    s = run(bundled["doubling_unit"], tmp_path)
    for p in tmp_path.iterdir():
        assert s["config_hash"] in p.read_text(), p.name


def test_thread_invariance(bundled, tmp_path):
    a = run(bundled["doubling_halfweight"], tmp_path / "a", threads=1)
    run(bundled["doubling_halfweight"], tmp_path / "b", threads=3)
    assert (tmp_path / "a" / "summary.json").read_bytes() == (tmp_path / "b" / "summary.json").read_bytes()
    info = json.loads((tmp_path / "b" / "run_info.json").read_text())
    assert info["threads"] == 3 and info["config_hash"] == a["config_hash"]


def test_seed_override(bundled, tmp_path):
    a = run(bundled["doubling_halfweight"], tmp_path / "a")
    b = run(bundled["doubling_halfweight"], tmp_path / "b", seed=7)
    assert b["config"]["seed"] == 7 and a["config_hash"] != b["config_hash"]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "transferlab.cli", "schema", "bogus"],
                          capture_output=True, text=True)
    assert proc.returncode == EXIT_VALIDATION
