import csv
import io
import json
import shutil
from pathlib import Path

import pytest

from weilmaass import cli
from weilmaass.maassform import CoefficientTable

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture(scope="module")
def theta_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("theta")
    assert cli.main(["phase1", str(ROOT / "jobs" / "theta.json"), "--out", str(out)]) == 0
    return out


def _write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


def _base_config():
    return json.loads((ROOT / "jobs" / "theta.json").read_text())


def test_phase1_outputs(theta_run):
    assert (theta_run / "table.json").exists()
    rows = list(csv.DictReader(open(theta_run / "coefficients.csv")))
    assert list(rows[0]) == ["n", "h", "Delta", "re", "im", "err_bound", "phase"]
    by = {(int(r["n"]), int(r["h"])): float(r["re"]) for r in rows}
    assert by[(4, 0)] == pytest.approx(2, abs=1e-12)
    assert by[(8, 0)] == pytest.approx(0, abs=1e-12)
    rep = json.loads((theta_run / "report.json").read_text())
    for key in ("residual_bound", "inv_norm", "coeff_bound", "checks"):
        assert key in rep


def test_persist_round_trip_bit_identical(theta_run):
    d = json.loads((theta_run / "table.json").read_text())
    t = CoefficientTable.from_json(d)
    assert t.to_json() == d


def test_phase2_check_tables(theta_run, tmp_path, capsys):
    out = tmp_path / "run"
    shutil.copytree(theta_run, out)
    cfg = str(ROOT / "jobs" / "theta.json")
    assert cli.main(["phase2", cfg, "--out", str(out), "--from", "30", "--to", "50",
                     "--budget", "6"]) == 0
    assert cli.main(["check", cfg, "--out", str(out), "--strict"]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["checks"]["automorphy_residual"]["passed"]
    capsys.readouterr()
    assert cli.main(["tables", cfg, "--out", str(out)]) == 0
    text = capsys.readouterr().out
    rows = list(csv.DictReader(io.StringIO(text)))
    deltas = [int(r["Delta"]) for r in rows]
    assert deltas == sorted(deltas, key=abs)
    by = {int(r["Delta"]): r for r in rows}
    assert float(by[49]["c_plus"]) == pytest.approx(2, abs=1e-8)
    assert by[49]["phase"] == "2"
    # stable output
    assert cli.main(["tables", cfg, "--out", str(out), "-o", str(tmp_path / "t.csv")]) == 0
    assert (tmp_path / "t.csv").read_text() == text


def test_bad_congruence_exits_2(tmp_path, capsys):
    d = json.loads((ROOT / "jobs" / "11a1.json").read_text())
    d["principal_part"][0]["h"] = 6
    p = _write(tmp_path, "bad.json", d)
    assert cli.main(["phase1", str(p), "--out", str(tmp_path / "o")]) == 2
    assert "h=6" in capsys.readouterr().err


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(Y="0.95"),
    lambda d: d.update(weight="1/3"),
    lambda d: d.update(rep="sigma"),
    lambda d: d.update(Q=3),
    lambda d: d.update(bogus=1),
    lambda d: d.pop("eps"),
    lambda d: d.update(precision_digits=10),
    lambda d: d.update(phase2={"from": 9, "to": 2}),
])
def test_invalid_configs_exit_2(tmp_path, mutate):
    d = _base_config()
    mutate(d)
    p = _write(tmp_path, "c.json", d)
    assert cli.main(["phase1", str(p), "--out", str(tmp_path / "o")]) == 2


def test_missing_and_malformed_files_exit_2(tmp_path):
    assert cli.main(["phase1", str(tmp_path / "nope.json")]) == 2
    p = tmp_path / "x.json"
    p.write_text("{not json")
    assert cli.main(["phase1", str(p)]) == 2
    assert cli.main(["frobnicate"]) == 2
    # phase2 without a persisted table
    assert cli.main(["phase2", str(ROOT / "jobs" / "theta.json"), "--out", str(tmp_path / "e"),
                     "--from", "1", "--to", "5"]) == 2


def test_numerical_failure_exits_3(theta_run, tmp_path):
    out = tmp_path / "run"
    shutil.copytree(theta_run, out)
    # a digit-loss budget that leaves no correct digits is a precision fault
    assert cli.main(["phase2", str(ROOT / "jobs" / "theta.json"), "--out", str(out),
                     "--from", "30", "--to", "40", "--budget", "19"]) == 3


def test_singular_system_exits_3(tmp_path, monkeypatch):
    from weilmaass.linalg import SingularSystemError

    def boom(job):
        raise SingularSystemError("pivot below threshold (unknown n=4, h=0)", column=0)

    monkeypatch.setattr(cli, "solve_phase1", boom)
    assert cli.main(["phase1", str(ROOT / "jobs" / "theta.json"),
                     "--out", str(tmp_path / "o")]) == 3
