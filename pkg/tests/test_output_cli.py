import csv
import json
import shutil
import subprocess

import pytest

from inac_sim.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main
from inac_sim.errors import HeaderMismatch
from inac_sim.output import (emit_csv, emit_plot_script, format_number,
                             plot_script, read_header, render_csv)
from inac_sim.scenario import METRICS, ScenarioKind, SweepResultRow

from conftest import DATA


def _data_lines(text):
    return [line for line in text.split("\r\n") if line and not line.startswith("#")]


def test_format_number():
    assert format_number(3) == "3"
    assert format_number(True) == "1"
    assert format_number(0.1 + 0.2) == "0.3"
    assert format_number(float("nan")) == "nan"
    assert format_number(float("-inf")) == "-inf"
    assert format_number(-0.0) == "0"
    assert format_number(1.23456789012e-7) == "1.23456789e-07"


def test_empty_rows_give_header_only():
    text = render_csv([], {"tool": "x"}, ["a", "b"], reproducible=True)
    assert text.startswith("# tool: x\r\n")
    assert _data_lines(text) == ["sweep_value,a,b"]


def test_one_row_two_metrics():
    row = SweepResultRow(5.0, {"a": 1.5, "b": 2}, 10, 1)
    lines = _data_lines(render_csv([row], {}, reproducible=True))
    assert len(lines) == 2
    assert next(csv.reader([lines[1]])) == ["5", "1.5", "2"]


def test_metadata_quoting_and_timestamp():
    meta = {"config": {"b": 1, "a": [1, 2]}, "note": "two\nlines"}
    text = render_csv([], meta, ["m"])
    assert '# config: {"a":[1,2],"b":1}' in text
    assert "# note: two lines" in text
    assert "# generated_utc:" in text
    assert "generated_utc" not in render_csv([], meta, ["m"], reproducible=True)


def test_csv_is_rfc4180(tmp_path):
    row = SweepResultRow(1.0, {"x": 0.25}, 1, 0)
    path = emit_csv([row], {}, tmp_path / "r.csv", reproducible=True)
    raw = path.read_bytes()
    assert raw.endswith(b"\r\n") and b"\r\r" not in raw
    assert read_header(path) == ["sweep_value", "x"]


def test_plot_script_layouts():
    elev = plot_script(["sweep_value", *METRICS[ScenarioKind.ELEVATION_MASK_SWEEP]],
                       "elevation_mask_sweep", "e.csv", "e.png")
    assert "set y2tics" in elev and "axes x1y2" in elev and "pngcairo" in elev
    power = plot_script(["sweep_value", *METRICS[ScenarioKind.POWER_SPLIT_SWEEP]],
                        "power_split_sweep", "p.csv", "p.txt")
    assert "title 'c_nav'" in power and "title 'c_com'" in power
    assert "y2tics" not in power and "set terminal dumb" in power


def test_plot_script_header_mismatch():
    with pytest.raises(HeaderMismatch):
        plot_script(["sweep_value", "pdop"], "elevation_mask_sweep", "e.csv", "e.png")


def _write_config(tmp_path, **cfg):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_cli_run_reproducible_bytes(tmp_path):
    cfg = _write_config(tmp_path, scenario_kind="indoor_distance_sweep", trials=20,
                        sweep_values=[3.0, 5.0, 7.0])
    out = tmp_path / "a.csv"
    assert main(["run", "--config", str(cfg), "--out", str(out), "--reproducible"]) == EXIT_OK
    first = out.read_bytes()
    assert main(["run", "--config", str(cfg), "--out", str(out), "--reproducible"]) == EXIT_OK
    assert out.read_bytes() == first
    main(["run", "--config", str(cfg), "--out", str(out), "--reproducible", "--seed", "99"])
    assert out.read_bytes() != first
    assert "# seed: 99" in out.read_text()


def test_cli_emit_plot(tmp_path):
    cfg = _write_config(tmp_path, scenario_kind="power_split_sweep", trials=10,
                        output_path=str(tmp_path / "p.csv"))
    assert main(["run", "--config", str(cfg), "--emit-plot"]) == EXIT_OK
    script = (tmp_path / "p.gp").read_text()
    assert "'p.csv' using 1:3" in script
    assert emit_plot_script(tmp_path / "p.csv", "power_split_sweep") == tmp_path / "p.gp"


@pytest.mark.skipif(shutil.which("gnuplot") is None, reason="gnuplot not installed")
def test_gnuplot_smoke(tmp_path):
    cfg = _write_config(tmp_path, scenario_kind="indoor_distance_sweep", trials=5,
                        output_path=str(tmp_path / "i.csv"))
    assert main(["run", "--config", str(cfg), "--emit-plot"]) == EXIT_OK
    subprocess.run(["gnuplot", "i.gp"], cwd=tmp_path, check=True)
    assert (tmp_path / "i.png").stat().st_size > 0


def test_cli_exit_codes(tmp_path, capsys):
    good = _write_config(tmp_path, scenario_kind="power_split_sweep", trials=2)
    assert main(["validate", "--config", str(good)]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["trials"] == 2 and doc["noise"]["pseudorange_sigma_m"] == 2.0

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"scenario_kind": "power_split_sweep", "trials": 0}))
    assert main(["run", "--config", str(bad)]) == EXIT_CONFIG
    assert "trials" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "nope.json")]) == EXIT_CONFIG
    assert main(["run", "--config", str(good), "--seed", "-1"]) == EXIT_CONFIG

    unwritable = tmp_path / "missing_dir" / "out.csv"
    assert main(["run", "--config", str(good), "--out", str(unwritable)]) == EXIT_RUNTIME


def test_cli_tle_info(capsys):
    assert main(["tle-info", str(DATA / "real_sample.tle")]) == EXIT_OK
    out = capsys.readouterr().out
    assert "records:" in out and "sha256:" in out and "rejected: 0" in out


def test_console_script_version():
    exe = shutil.which("inac-sim")
    if exe is None:
        pytest.skip("console script not installed")
    out = subprocess.run([exe, "--version"], capture_output=True, text=True, check=True)
    assert out.stdout.startswith("inac-sim ")
