import math

import pytest

from overlay_d2d import cli
from overlay_d2d.config import ConfigError, build_config, parse_config_text
from overlay_d2d.errors import NumericalError
from overlay_d2d.experiments import Table, read_csv


def run(tmp_path, *args, name="out.csv"):
    out = tmp_path / name
    code = cli.run_cli([*args, "--out", str(out)])
    return code, (out.read_bytes() if out.exists() else b"")


def test_parse_config_text():
    vals = parse_config_text("# comment\nlambda-a = 2\nN_SC=4  # trailing\nmode = COORD\nb1_literal = yes\neta = fair\n")
    assert vals == {"lambda_a": 2.0, "n_sc": 4, "mode": "coord", "b1_literal": True, "eta": None}
    with pytest.raises(ConfigError, match="bogus"):
        parse_config_text("bogus = 1")
    with pytest.raises(ConfigError, match="n_sc"):
        parse_config_text("n_sc = four")
    with pytest.raises(ConfigError, match="line 2"):
        parse_config_text("seed = 1\nno equals sign")


def test_precedence_flags_over_file_over_preset():
    cfg = build_config("fig4", {"lambda_c": 20.0, "seed": 3}, {"seed": 5, "alpha": None})
    assert (cfg.lambda_c, cfg.seed, cfg.alpha, cfg.eta) == (20.0, 5, 4.0, 0.5)


def test_fig2_link_distance_follows_ap_density():
    assert build_config("fig2", {}, {}).rd == pytest.approx(0.3)
    assert build_config("fig2", {}, {"lambda_a": 4.0}).rd == pytest.approx(0.15)
    assert build_config("fig2", {}, {"lambda_a": 4.0, "rd": 0.5}).rd == 0.5


@pytest.mark.parametrize(
    "change,field",
    [({"alpha": 2.0}, "alpha"), ({"n_sc": 0}, "n_sc"), ({"eta": 2.0}, "eta"), ({"lambda_d": -1.0}, "lambda_d"), ({"seed": -1}, "seed")],
)
def test_invalid_values_name_the_field(change, field):
    with pytest.raises(ConfigError) as err:
        build_config("custom", {}, change)
    assert err.value.field == field


def test_table_round_trip():
    t = Table("demo", ["x_db", "p", "flag", "name"], [[1.0 / 3.0, math.inf, True, "coord"]])
    text = t.to_csv()
    assert text.splitlines()[0] == "# schema: demo v1"
    assert text.splitlines()[2] == "0.333333333,inf,1,coord"
    back = read_csv(text)
    assert back.name == "demo" and back.rows[0][0] == pytest.approx(1 / 3, rel=1e-9)


def test_analytic_command(tmp_path):
    code, data = run(tmp_path, "analytic", "--n-sc", "4", "--theta-points", "3")
    assert code == 0
    t = read_csv(data.decode())
    assert t.header == ["theta_db", "ana_uncoord", "ana_coord_b1", "ana_coord_b2", "ana_cellular"]
    assert t.column("theta_db") == [-20.0, 0.0, 20.0]


def test_config_file_and_stdout(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n_sc = 3\ntheta_points = 2\n")
    assert cli.run_cli(["analytic", "--config", str(cfg)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "# schema: analytic v1" and len(lines) == 4


def test_exit_code_two_names_the_field(tmp_path, capsys):
    assert cli.run_cli(["analytic", "--alpha", "1.5"]) == 2
    assert "alpha" in capsys.readouterr().err
    assert cli.run_cli(["simulate", "--mode", "greedy"]) == 2
    assert cli.run_cli(["figure", "fig9"]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("lambda_q = 1\n")
    assert cli.run_cli(["analytic", "--config", str(bad)]) == 2
    assert "lambda_q" in capsys.readouterr().err
    assert cli.run_cli(["analytic", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_exit_code_three_on_non_convergence(monkeypatch, capsys):
    def boom(cfg):
        raise NumericalError("r_a average: quadrature did not converge", interval=(0.0, 78.5))

    monkeypatch.setitem(cli.run.__globals__["RUNNERS"], "analytic", boom)
    assert cli.run_cli(["analytic"]) == 3
    assert "interval" in capsys.readouterr().err


@pytest.mark.parametrize(
    "args",
    [
        ["simulate", "--trials", "300", "--n-sc", "5", "--mode", "coord", "--theta-points", "5"],
        ["densities", "--trials", "200"],
        ["rate", "--trials", "500"],
    ],
)
def test_repeat_runs_are_byte_identical(tmp_path, args):
    code1, a = run(tmp_path, *args, name="a.csv")
    code2, b = run(tmp_path, *args, name="b.csv")
    assert code1 == code2 == 0 and a == b and a
    code3, c = run(tmp_path, *args, "--seed", "1", name="c.csv")
    assert code3 == 0 and c != a


def test_fig4_writes_summary(tmp_path):
    code, data = run(tmp_path, "figure", "fig4", "--trials", "2000", "--n-max", "16", name="f4.csv")
    assert code == 0
    curves = read_csv(data.decode())
    assert curves.header[:3] == ["rd_du", "rd_norm", "baseline_bps_hz"]
    summary = read_csv((tmp_path / "f4_summary.csv").read_text())
    assert summary.column("curve") == ["coord", "uncoord", "n1"]
