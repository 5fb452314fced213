import json

import pytest

from landau_eig.cli import ConfigError, RunConfig, main


def test_cmatrix_stdout(capsys):
    assert main(["cmatrix", "--m", "2"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["schema"] == "1" and d["C"] == [[4, -2], [-4, 4]]


def test_invalid_m_names_field(capsys, tmp_path):
    assert main(["pipeline", "--m", "0", "--out-dir", str(tmp_path)]) == 2
    assert "m" in capsys.readouterr().err
    assert main(["cmatrix", "--m", "0"]) == 2


def test_config_validation():
    with pytest.raises(ConfigError) as exc:
        RunConfig(B0=-1.0).validate()
    assert exc.value.field == "B0"
    with pytest.raises(ConfigError) as exc:
        RunConfig.from_dict({"m": 1, "bogus": 3})
    assert exc.value.field == "bogus"
    with pytest.raises(ConfigError):
        RunConfig(chain_tol=0.0).validate()


def test_period(capsys, tmp_path):
    assert main(["period", "--alpha", "0.5", "--b", "1.0"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["u_minus"] < 0 < d["u_plus"]
    assert main(["period", "--curve", "0.1", "1", "3", "--out-dir", str(tmp_path)]) == 0
    assert len((tmp_path / "period.csv").read_text().splitlines()) == 4


def test_pipeline_artifacts_and_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["pipeline", "--m", "1", "--eps", "0.1", "--kn", "4", "--out-dir", str(d)]) == 0
    for name in ("family.json", "chain.json", "band.csv", "band.json", "summary.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    s = json.loads((a / "summary.json").read_text())
    assert s["status"] == "ok" and s["band_deviation"] <= 1e-6


def test_pipeline_constant_potential(tmp_path):
    assert main(["pipeline", "--eps", "0", "--out-dir", str(tmp_path)]) == 0
    s = json.loads((tmp_path / "summary.json").read_text())
    assert s["status"] == "constant potential"


def test_config_file_overrides(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"m": 2, "eps": 0.05, "kn": 2, "levels": 30, "channels": 4}))
    assert main(["pipeline", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "family.json").read_text())["m"] == 2


def test_stage_commands(tmp_path, capsys):
    out = str(tmp_path)
    assert main(["family", "--m", "1", "--eps", "0.05", "--out-dir", out]) == 0
    assert main(["chain", "--from-family", str(tmp_path / "family.json"), "--out-dir", out]) == 0
    assert (tmp_path / "V.csv").exists()
    chain = str(tmp_path / "chain.json")
    assert main(["band", "--from-chain", chain, "--kn", "2", "--levels", "30",
                 "--channels", "4", "--out-dir", out]) == 0
    assert main(["eigfun", "--from-chain", chain, "--out-dir", out]) == 0
    d = json.loads((tmp_path / "eigfun.json").read_text())
    assert d["residual"] <= 1e-5
    assert main(["family-sweep", "--eps-grid", "0.01", "0.02", "--out-dir", out]) == 0
    assert len((tmp_path / "family_sweep.csv").read_text().splitlines()) == 3
    capsys.readouterr()


def test_missing_file(capsys):
    assert main(["chain", "--from-family", "/nonexistent.json"]) == 2
