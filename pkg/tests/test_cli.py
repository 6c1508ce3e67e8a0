import csv

import pytest

from netoutage.cli import main
from netoutage.config import ConfigError, parse_config
from netoutage.errors import ParameterError

PPP = """
[model]
type = ppp
intensity = 1.0

[mac]
type = aloha

[channel]
alpha = 4
theta = 2

[sweep]
eta = 0.1, 0.05
reps = 2000
seed = 4
"""


def _write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_parse_defaults_and_env_override():
    cfg = parse_config(PPP, environ={"NETOUTAGE_SWEEP_SEED": "9", "NETOUTAGE_CHANNEL_THETA": "3"})
    assert cfg.seed == 9 and cfg.link.theta == 3.0
    assert cfg.scenario.name == "ppp+aloha" and cfg.reps == 2000
    assert cfg.eta.tolist() == [0.1, 0.05]


def test_parse_errors_are_distinguished():
    with pytest.raises(ConfigError):
        parse_config("[model\ntype=ppp")
    with pytest.raises(ConfigError):
        parse_config(PPP + "\n[extra]\nkey = 1\n", environ={})
    with pytest.raises(ParameterError):
        parse_config(PPP.replace("alpha = 4", "alpha = 2"), environ={})
    with pytest.raises(ParameterError):
        parse_config(PPP.replace("type = aloha", "type = tdma"), environ={})
    with pytest.raises(ParameterError):
        parse_config(PPP.replace("eta = 0.1, 0.05", "eta = 0.05, 0.1"), environ={})


def test_simulate_writes_csv(tmp_path, capsys):
    cfg = _write(tmp_path, PPP)
    out = tmp_path / "o1"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    rows = list(csv.reader(open(out / "sweep.csv")))
    assert rows[0][:3] == ["eta", "p_success", "std_err"]
    assert len(rows) == 3


def test_simulate_is_deterministic_across_threads(tmp_path):
    cfg = _write(tmp_path, PPP)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "a"), "--threads", "1"]) == 0
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "b"), "--threads", "0"]) == 0
    assert (tmp_path / "a" / "sweep.csv").read_bytes() == (tmp_path / "b" / "sweep.csv").read_bytes()


def test_exit_codes(tmp_path, capsys):
    assert main(["simulate"]) == 2
    assert main(["simulate", "--config", str(tmp_path / "missing.ini")]) == 2
    assert main(["simulate", "--config", _write(tmp_path, PPP.replace("alpha = 4", "alpha = 2"))]) == 3
    unsupported = PPP.replace("type = ppp\nintensity = 1.0", "type = matern\nintensity = 0.1\nh = 1").replace("aloha", "csma")
    assert main(["asymptotic", "--config", _write(tmp_path, unsupported, "u.ini")]) == 5
    assert "not implemented" in capsys.readouterr().err
    assert main(["figure", "nine"]) == 2


def test_asymptotic_rows(tmp_path, capsys):
    tdma = "[model]\ntype = lattice\nd = 2\n[mac]\ntype = tdma\n"
    assert main(["asymptotic", "--config", _write(tmp_path, tdma), "--out", str(tmp_path / "t")]) == 0
    rows = list(csv.reader(open(tmp_path / "t" / "asymptotic.csv")))
    assert rows[0] == ["scheme", "gamma", "kappa", "provenance", "alpha", "theta"]
    assert float(rows[1][1]) == pytest.approx(12.054, abs=1e-3) and rows[1][2] == "2"
    csma = "[model]\ntype = ppp\nintensity = 0.3\n[mac]\ntype = csma\n"
    assert main(["asymptotic", "--config", _write(tmp_path, csma, "c.ini"), "--out", str(tmp_path / "c")]) == 0
    line = capsys.readouterr().out
    assert "gamma=1.956" in line and "eta_max=0.2768" in line


def test_figure_eight(tmp_path, capsys):
    assert main(["figure", "8", "--out", str(tmp_path)]) == 0
    assert len(list((tmp_path / "fig8").glob("curve-*.csv"))) == 9
    assert "wrote 9 curves" in capsys.readouterr().out


def test_classify_and_conditions(tmp_path, capsys):
    cfg = "[model]\ntype = lattice\n[mac]\ntype = unreasonable-tdma\n[sweep]\nreps = 2000\n"
    path = _write(tmp_path, cfg)
    assert main(["classify", "--config", path, "--out", str(tmp_path)]) == 0
    assert "class=U3" in capsys.readouterr().out
    assert main(["conditions", "--config", path, "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "unreasonable" in out and (tmp_path / "conditions.csv").exists()
