import json
import subprocess
import sys

import pytest

from pasec import cli


def test_solve_prints_state(capsys):
    assert cli.main(["solve", "--bob", "10,5", "--eve", "20,20", "--n", "2", "--power-dbm", "10"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["N"] == 2 and len(out["pa_x"]) == 2
    assert out["secrecy_rate"] == pytest.approx(out["rate_bob"] - out["rate_eve"])
    assert len(out["W"]["re"]) == 2


def test_solve_single_waveguide(capsys):
    assert cli.main(["solve", "--bob", "10,5", "--eve", "20,20", "--scheme", "pas-no-an"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["R_m"]["re"] == [[0.0]]


def test_bad_point():
    with pytest.raises(SystemExit):
        cli.main(["solve", "--bob", "10", "--eve", "1,1"])


def test_user_outside_region(capsys):
    assert cli.main(["solve", "--bob", "50,5", "--eve", "1,1"]) == 2
    assert "error" in capsys.readouterr().err


def test_oracle(capsys):
    assert cli.main(["oracle", "--suite", "lemma2", "--seed", "4", "--count", "20"]) == 0
    assert json.loads(capsys.readouterr().out)["passed"] is True


def test_sweep_and_cdf_files(tmp_path, capsys):
    conf = tmp_path / "c.conf"
    conf.write_text("power_sweep = 0, 10\nwaveguides = 1\nschemes = pas-an, cas-an\n")
    out = tmp_path / "out"
    assert cli.main(["sweep", "--config", str(conf), "--drops", "2", "--out", str(out)]) == 0
    assert (out / "mean_sr_pas-an_N1.dat").exists()
    assert cli.main(["cdf", "--config", str(conf), "--drops", "3", "--out", str(out), "--power-dbm", "10"]) == 0
    assert (out / "cdf_cas-an_N1_P10.dat").exists()
    assert "P(SR = 0)" in capsys.readouterr().out


def test_config_errors(tmp_path, capsys):
    assert cli.main(["sweep", "--config", str(tmp_path / "missing.conf")]) == 2
    bad = tmp_path / "bad.conf"
    bad.write_text("frequency = 3\n")
    assert cli.main(["sweep", "--config", str(bad)]) == 2
    assert "unknown key" in capsys.readouterr().err


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "pasec", "--help"], capture_output=True, text=True)
    assert r.returncode == 0
    assert "sweep" in r.stdout and "oracle" in r.stdout
