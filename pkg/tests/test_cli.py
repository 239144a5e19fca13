import csv
import json

import pytest

from geroch_pencil import cli
from geroch_pencil.errors import ParseError
from geroch_pencil.report import catalog_system_text, loads_system


@pytest.fixture
def wave_file(tmp_path):
    path = tmp_path / "wave.json"
    path.write_text(catalog_system_text("wave"))
    return path


def test_analyze_json_report(wave_file, tmp_path, capsys):
    out = tmp_path / "r.json"
    csv_path = tmp_path / "r.csv"
    code = cli.main(["analyze", str(wave_file), "--samples", "10", "--report", str(out), "--csv", str(csv_path)])
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["settings"]["basis_source"] == "named"
    assert all(rep["verdicts"][k]["value"] for k in ("hyperbolic", "SH", "SS_SH", "condition_v"))
    assert len(rep["samples"]) == 10
    assert "SH=true" in capsys.readouterr().out
    assert "SS_SH: true" in out.with_suffix(".txt").read_text()
    rows = list(csv.reader(csv_path.open()))
    assert rows[0] == ["kx", "ky", "kz", "min_cos", "max_eig_imag", "ss_cond_number"]
    assert len(rows) == 11


def test_jobs_do_not_change_report(wave_file, tmp_path):
    outs = []
    for jobs in ("1", "4"):
        out = tmp_path / f"j{jobs}.json"
        cli.main(["analyze", str(wave_file), "--samples", "12", "--jobs", jobs, "--report", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_negative_verdict_exit_code(tmp_path, capsys):
    path = tmp_path / "toy.json"
    assert cli.main(["catalog", "toy_weak", "--output", str(path)]) == 0
    assert cli.main(["analyze", str(path), "--samples", "5", "--format", "text"]) == 2
    assert "SH: false" in capsys.readouterr().out


def test_error_exit_codes(tmp_path, capsys):
    assert cli.main(["catalog", "unknown"]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["analyze", str(bad)]) == 1
    assert cli.main(["analyze", str(tmp_path / "missing.json")]) == 1
    assert "error" in capsys.readouterr().err


def test_single_k(wave_file, capsys):
    assert cli.main(["single-k", str(wave_file), "--k", "0,0,1"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["dims"] == [2, 3, 3]
    assert rec["intertwining_residual"] <= 1e-10
    assert cli.main(["single-k", str(wave_file), "--k", "0,1"]) == 1
    assert cli.main(["single-k", str(wave_file), "--k", "0,0,0"]) == 1
    assert "ZeroWaveVector" in capsys.readouterr().err
    assert cli.main(["single-k", str(wave_file), "--k", "1,0,0"]) == 0
    assert json.loads(capsys.readouterr().out)["dims"] == [2, 3, 3]


def test_constant_velocity_policy(wave_file, tmp_path):
    nfile = tmp_path / "n.json"
    nfile.write_text(json.dumps({"N_free": [[0.0] * 4] * 6}))
    out = tmp_path / "r.json"
    cli.main(["analyze", str(wave_file), "--samples", "5", "--velocity-policy", f"constant:{nfile}",
              "--report", str(out)])
    rep = json.loads(out.read_text())
    assert rep["verdicts"]["SS_SH"]["mode"] == "constant"


def test_modified_symbol_falls_back_to_computed_basis(tmp_path):
    data = json.loads(catalog_system_text("maxwell"))
    data["generator"]["lapse"] = 2.0   # no longer reproduces the stored symbol
    path = tmp_path / "m.json"
    path.write_text(json.dumps(data))
    out = tmp_path / "r.json"
    assert cli.main(["analyze", str(path), "--samples", "5", "--report", str(out)]) == 0
    assert json.loads(out.read_text())["settings"]["basis_source"] == "computed"


def test_parse_errors():
    with pytest.raises(ParseError):
        loads_system('{"name": "x"}')
    with pytest.raises(ParseError):
        loads_system('{"name": "x", "n_space": 1, "e": 2, "u": 2, "symbol": [[1, 2]]}')


def test_failing_stage_is_named(tmp_path, capsys):
    path = tmp_path / "bad.json"
    coeffs = [
        [[1.0, 0.0], [0.0, -1.0], [-1.0, -1.0]],
        [[-1.0, -1.0], [-1.0, 1.0], [0.0, 1.0]],
        [[0.0, 0.0], [1.0, 1.0], [0.0, 0.0]],
    ]
    path.write_text(json.dumps({"name": "no_fields", "n_space": 2, "e": 3, "u": 2, "symbol": coeffs}))
    assert cli.main(["analyze", str(path), "--samples", "3"]) == 1
    err = capsys.readouterr().err
    assert "StageError" in err and "geroch" in err and "CountMismatch" in err
