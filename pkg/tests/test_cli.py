import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ssb_lab.cli import main
from ssb_lab.experiments import ConfigError, ExperimentConfig, emit_figure_data, run
from ssb_lab.io import csv_text, dumps, fmt_float


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_roundtrip(x):
    assert float(fmt_float(x)) == x
    assert json.loads(dumps([x]))[0] == x


def test_dumps_non_finite_and_order():
    text = dumps({"b": math.inf, "a": [1, 2.5], "c": None, "d": True})
    assert json.loads(text) == {"b": None, "a": [1, 2.5], "c": None, "d": True}
    assert text.index('"b"') < text.index('"a"')


def test_csv_text_format():
    text = csv_text(["x", "v"], [(0.1, math.inf), (1, "odd")])
    assert text == "x,v\n0.10000000000000001,inf\n1,odd\n"


def test_config_defaults_and_unknown_keys():
    cfg = ExperimentConfig.from_dict({"experiment": "uinf-ssb"})
    assert cfg.model == {"kind": "DoubleInfiniteWell", "a": 2.0, "b": 0.5}
    assert cfg.tolerances["degeneracy"] == 1e-8
    with pytest.raises(ConfigError, match="unknown config keys"):
        ExperimentConfig.from_dict({"experiment": "uinf-ssb", "colour": 1})
    with pytest.raises(ConfigError, match="grid keys"):
        ExperimentConfig.from_dict({"experiment": "uinf-ssb", "grid": {"dx": 0.1}})
    with pytest.raises(ConfigError, match="unknown experiment"):
        ExperimentConfig.from_dict({"experiment": "nope"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"experiment": "uinf-ssb", "tolerances": {"degeneracy": -1}})


def test_report_checks_name_tolerances(tmp_path):
    rep = run(ExperimentConfig.from_dict({"experiment": "pair-lemma", "trials": 50}), out=tmp_path)
    data = json.loads((tmp_path / "report.json").read_text())
    assert data["schema"] == 1 and data["passed"]
    assert all("tolerance" in c and "comparison" in c for c in data["checks"])
    assert (tmp_path / "trials.csv").read_text().count("\n") == 51
    assert rep.passed


def test_cli_exit_zero_and_determinism(tmp_path, capsys):
    for d in ("a", "b"):
        assert main(["uinf-ssb", "--grid-n", "1001", "--out", str(tmp_path / d)]) == 0
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()
    assert (tmp_path / "a" / "levels.csv").read_bytes() == (tmp_path / "b" / "levels.csv").read_bytes()
    assert "PASS" in capsys.readouterr().out


def test_cli_flags_override_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"experiment": "sombrero-gap", "grid": {"n": 401}, "levels": 3}))
    assert main(["sombrero-gap", "--config", str(cfg), "--grid-n", "601", "--out", str(tmp_path / "o")]) == 0
    data = json.loads((tmp_path / "o" / "report.json").read_text())
    assert data["config"]["grid"]["n"] == 601 and data["config"]["levels"] == 3


def test_cli_failed_check_exits_one(tmp_path):
    rc = main(["ualpha-levels", "--sweep", "0.1,10", "--grid-n", "1001", "--out", str(tmp_path)])
    assert rc == 1
    data = json.loads((tmp_path / "report.json").read_text())
    assert not data["passed"]


def test_cli_experiment_error_exits_one(tmp_path):
    rc = main(["spinor-ssb", "--omega-plus", "2", "--omega-minus", "1", "--grid-n", "801", "--out", str(tmp_path)])
    assert rc == 1
    data = json.loads((tmp_path / "report.json").read_text())
    assert any("warning" in e for e in data["errors"])


def test_cli_config_errors_exit_two(tmp_path, capsys):
    assert main(["sombrero-gap", "--grid-n", "3", "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["sombrero-gap", "--config", str(bad)]) == 2
    other = tmp_path / "other.json"
    other.write_text(json.dumps({"experiment": "uinf-ssb"}))
    assert main(["sombrero-gap", "--config", str(other)]) == 2
    assert "config error" in capsys.readouterr().err


def test_env_var_sets_output(tmp_path, monkeypatch):
    monkeypatch.setenv("SSB_LAB_OUT", str(tmp_path / "env"))
    assert main(["barrier-theorem", "--grid-n", "801"]) == 0
    assert (tmp_path / "env" / "report.json").exists()


def test_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for name in ("sombrero-gap", "pair-lemma", "spinor-ssb"):
        assert name in out


@pytest.mark.parametrize("fig", [1, 2, 3, 4, 5])
def test_figure_command(fig, tmp_path):
    assert main(["figure", str(fig), "--out", str(tmp_path)]) == 0
    lines = (tmp_path / f"figure{fig}.csv").read_text().splitlines()
    assert lines[0].startswith("x,V")


def test_figure_data_content():
    header, rows = emit_figure_data(1)
    assert header == ["x", "V"] and rows[0][0] == -1.2 and rows[-1][0] == 1.2
    assert rows[0][1] == pytest.approx(1.2**4 - 1.2**2)
    header, rows = emit_figure_data(2)
    assert header == ["x", "V", "f"]
    mid = rows[len(rows) // 2]
    assert mid[0] == pytest.approx(0.0, abs=1e-12) and mid[2] == pytest.approx(1.0)
    _, rows = emit_figure_data(5)
    values = {r[1] for r in rows}
    assert values == {0.0, math.inf}
    with pytest.raises(ConfigError):
        emit_figure_data(6)
    with pytest.raises(ConfigError):
        emit_figure_data(1, {"nope": 1})


def test_output_precedence(tmp_path, monkeypatch):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"experiment": "pair-lemma", "trials": 5, "output": str(tmp_path / "file")}))
    monkeypatch.delenv("SSB_LAB_OUT", raising=False)
    assert main(["pair-lemma", "--config", str(cfg)]) == 0
    assert (tmp_path / "file" / "report.json").exists()
    monkeypatch.setenv("SSB_LAB_OUT", str(tmp_path / "env"))
    assert main(["pair-lemma", "--config", str(cfg)]) == 0
    assert (tmp_path / "env" / "report.json").exists()
    assert main(["pair-lemma", "--config", str(cfg), "--out", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "flag" / "report.json").exists()
