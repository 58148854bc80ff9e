import json

import numpy as np
import pytest

from inac_sim.errors import MissingFile, SchemaError, SemanticError
from inac_sim.scenario import (DEFAULT_SWEEPS, METRICS, ScenarioKind,
                               load_config, run_scenario, validate_config)
from inac_sim.tle import scan_tle_file
from inac_sim.walker import (DEFAULT_EPOCH, ONEWEB_LIKE, STARLINK_LIKE,
                             walker_catalog_text)

from conftest import DATA


def _cfg(kind, **extra):
    return validate_config({"scenario_kind": kind, **extra})


def test_elevation_defaults():
    cfg = _cfg("elevation_mask_sweep")
    assert cfg.noise.pseudorange_sigma_m == 2.0
    assert cfg.sweep_values == tuple(float(m) for m in range(5, 75, 5))
    assert cfg.sweep_unit == "deg"
    assert "epoch_utc" in cfg.defaults_applied and "trials" in cfg.defaults_applied
    assert cfg.user_geodetic.latitude == pytest.approx(39.9523)


def test_kind_specific_link_defaults():
    power = _cfg("power_split_sweep")
    assert power.link.bandwidth_hz == 1.0 and power.link.noise_power_w == 1.0
    assert _cfg("indoor_distance_sweep").noise.range_sigma_m == 0.0


def test_explicit_values_are_kept():
    cfg = _cfg("power_split_sweep", trials=7, rng_seed=3, sweep_values=[0.1, 0.2],
               link={"mode": "CO"})
    assert cfg.trials == 7 and cfg.rng_seed == 3
    assert cfg.sweep_values == (0.1, 0.2) and cfg.link.mode == "CO"
    assert "trials" not in cfg.defaults_applied


def test_sweep_range_forms():
    cfg = _cfg("elevation_mask_sweep", sweep_values={"start": 10, "stop": 30, "step": 10})
    assert cfg.sweep_values == (10.0, 20.0, 30.0)
    cfg = _cfg("indoor_distance_sweep", sweep_values={"start": 2, "stop": 4, "count": 3})
    assert cfg.sweep_values == (2.0, 3.0, 4.0)


@pytest.mark.parametrize("raw, error", [
    ({"scenario_kind": "elevation_mask_sweep", "trials": 0}, SemanticError),
    ({"scenario_kind": "elevation_mask_sweep", "bogus": 1}, SchemaError),
    ({"scenario_kind": "nope"}, SchemaError),
    ({}, SchemaError),
    ({"scenario_kind": "elevation_mask_sweep", "sweep_values": [10, 10]}, SemanticError),
    ({"scenario_kind": "elevation_mask_sweep", "sweep_values": [95]}, SemanticError),
    ({"scenario_kind": "power_split_sweep", "link": {"omega_c_sq": 2}}, SemanticError),
    ({"scenario_kind": "power_split_sweep", "link": {"mode": "XX"}}, SemanticError),
    ({"scenario_kind": "power_split_sweep", "trials": "ten"}, SchemaError),
    ({"scenario_kind": "indoor_distance_sweep", "sweep_values": [40.0]}, SemanticError),
    ({"scenario_kind": "ris_distance_sweep", "sweep_values": [1e3]}, SemanticError),
])
def test_invalid_configs(raw, error):
    with pytest.raises(error):
        validate_config(raw)


def test_unknown_key_is_named():
    with pytest.raises(SchemaError, match="unknown key 'bogus'"):
        _cfg("elevation_mask_sweep", bogus=1)


def test_missing_files(tmp_path):
    with pytest.raises(MissingFile):
        load_config(tmp_path / "absent.json")
    with pytest.raises(MissingFile):
        _cfg("elevation_mask_sweep", tle_path=str(tmp_path / "absent.tle"))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(SchemaError):
        load_config(bad)


def test_relative_tle_path_resolves_against_config_dir(tmp_path):
    (tmp_path / "cat.tle").write_text((DATA / "real_sample.tle").read_text())
    (tmp_path / "cfg.json").write_text(json.dumps(
        {"scenario_kind": "elevation_mask_sweep", "tle_path": "cat.tle"}))
    cfg = load_config(tmp_path / "cfg.json")
    assert cfg.tle_path == str(tmp_path / "cat.tle")


def test_with_overrides_validates():
    cfg = _cfg("power_split_sweep")
    assert cfg.with_overrides(trials=5).trials == 5
    with pytest.raises(SemanticError):
        cfg.with_overrides(trials=0)


def test_walker_catalog_parses():
    text = walker_catalog_text(STARLINK_LIKE + ONEWEB_LIKE, DEFAULT_EPOCH)
    records, errors = scan_tle_file(text)
    assert not errors
    assert len(records) == sum(s.total for s in STARLINK_LIKE + ONEWEB_LIKE)
    assert len({r.catalog_number for r in records}) == len(records)


def test_elevation_sweep_shape():
    cfg = _cfg("elevation_mask_sweep", trials=20, sweep_values=[5, 30, 60, 85])
    res = run_scenario(cfg)
    assert res.metric_names == METRICS[ScenarioKind.ELEVATION_MASK_SWEEP]
    vis = [r.metrics["visible_count"] for r in res.rows]
    assert vis == sorted(vis, reverse=True) and vis[0] >= 100
    for r in res.rows:
        if r.metrics["visible_count"] < 4:
            assert r.metrics["failures"] == 20 and np.isnan(r.metrics["rms_error_m"])
        else:
            assert r.metrics["failures"] == 0
    assert res.metadata["catalog_hash"] != "none"


def test_mask_above_every_satellite_reports_failure():
    res = run_scenario(_cfg("elevation_mask_sweep", trials=3, sweep_values=[90]))
    row = res.rows[0]
    assert row.metrics["visible_count"] == 0 and row.metrics["failures"] == 3


def test_zero_noise_recovers_exactly():
    cfg = _cfg("elevation_mask_sweep", trials=3, sweep_values=[10, 20],
               noise={"pseudorange_sigma_m": 0.0}, clock_bias_m=150.0)
    for row in run_scenario(cfg).rows:
        assert row.metrics["rms_error_m"] < 1e-6


def test_real_catalog_file(tmp_path):
    cfg = _cfg("elevation_mask_sweep", trials=5, sweep_values=[0, 10],
               tle_path=str(DATA / "real_sample.tle"))
    res = run_scenario(cfg)
    assert len(res.rows) == 2
    assert res.rows[0].metrics["visible_count"] >= res.rows[1].metrics["visible_count"]


@pytest.mark.parametrize("kind", [k.value for k in ScenarioKind])
def test_runs_are_deterministic(kind, monkeypatch):
    sweep = list(DEFAULT_SWEEPS[ScenarioKind(kind)][::7])
    cfg = _cfg(kind, trials=10, sweep_values=sweep)
    monkeypatch.setenv("INAC_SIM_THREADS", "1")
    serial = run_scenario(cfg)
    monkeypatch.setenv("INAC_SIM_THREADS", "4")
    parallel = run_scenario(cfg)
    again = run_scenario(cfg)
    assert serial.rows == parallel.rows == again.rows


def test_seed_changes_results():
    a = run_scenario(_cfg("indoor_distance_sweep", trials=20, sweep_values=[4.0], rng_seed=1))
    b = run_scenario(_cfg("indoor_distance_sweep", trials=20, sweep_values=[4.0], rng_seed=2))
    assert a.rows[0].metrics["rms_error_m"] != b.rows[0].metrics["rms_error_m"]


def test_power_split_sweep_tradeoff():
    res = run_scenario(_cfg("power_split_sweep", trials=200))
    com = [r.metrics["c_com"] for r in res.rows]
    nav = [r.metrics["c_nav"] for r in res.rows]
    assert np.all(np.diff(com) >= 0) and np.all(np.diff(nav) <= 0)
    assert com[0] == 0.0 and nav[-1] == 0.0
