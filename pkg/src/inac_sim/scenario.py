"""
Configuration-driven sweeps: validation, defaults and the four experiment kinds.

A config is a JSON-compatible tree.  ``validate_config`` fills every field
it is not given and records which ones it filled, so the runner can echo the
complete parameter set into the output metadata.
"""
from __future__ import annotations

import dataclasses
import enum
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .constants import GPS_L1_HZ, KU_DOWNLINK_HZ, TLE_GUARD_DAYS
from .errors import (InacError, MissingFile, ScenarioError, SchemaError,
                     SemanticError)
from .geometry import dop, look_angles, visible_sats
from .link import FadingModel, PowerSplit, ServiceMode, ergodic_rates
from .observations import PseudorangeObs, received_snr_db, watts_to_dbw
from .orbit import (GeodeticPosition, as_utc, eci_to_ecef_arrays,
                    geodetic_to_ecef, propagate_catalog)
from .ris_elos import (IndoorScenario, SatRisTemplate, run_indoor_distance_sweep,
                       run_sat_ris_distance_sweep)
from .rng import trial_rng
from .solver import solve_ls
from .tle import catalog_hash, parse_tle_file
from .walker import DEFAULT_EPOCH, ONEWEB_LIKE, STARLINK_LIKE, walker_catalog_text


class ScenarioKind(str, enum.Enum):
    ELEVATION_MASK_SWEEP = "elevation_mask_sweep"
    POWER_SPLIT_SWEEP = "power_split_sweep"
    RIS_DISTANCE_SWEEP = "ris_distance_sweep"
    INDOOR_DISTANCE_SWEEP = "indoor_distance_sweep"


METRICS = {
    ScenarioKind.ELEVATION_MASK_SWEEP: ("visible_count", "pdop", "rms_error_m", "mean_snr_db", "failures"),
    ScenarioKind.POWER_SPLIT_SWEEP: ("omega_c", "c_nav", "c_com", "c_nav_halfwidth", "c_com_halfwidth"),
    ScenarioKind.RIS_DISTANCE_SWEEP: ("elevation_deg", "pdop", "rms_error_m", "c_nav", "c_com", "failures"),
    ScenarioKind.INDOOR_DISTANCE_SWEEP: ("pdop", "rms_error_m", "failures"),
}

SWEEP_UNITS = {
    ScenarioKind.ELEVATION_MASK_SWEEP: "deg",
    ScenarioKind.POWER_SPLIT_SWEEP: "omega_c_sq",
    ScenarioKind.RIS_DISTANCE_SWEEP: "m",
    ScenarioKind.INDOOR_DISTANCE_SWEEP: "m",
}

# 21 evenly spaced points where no grid is given, masks 5..70 deg step 5
DEFAULT_SWEEPS = {
    ScenarioKind.ELEVATION_MASK_SWEEP: tuple(float(m) for m in range(5, 75, 5)),
    ScenarioKind.POWER_SPLIT_SWEEP: tuple(np.linspace(0.0, 1.0, 21).tolist()),
    ScenarioKind.RIS_DISTANCE_SWEEP: tuple(np.linspace(600e3, 880e3, 21).tolist()),
    ScenarioKind.INDOOR_DISTANCE_SWEEP: tuple(np.linspace(2.0, 9.0, 21).tolist()),
}

SYNTHETIC_SHELLS = {"starlink_like": STARLINK_LIKE, "oneweb_like": ONEWEB_LIKE}

# operator-supplied default receiver site (a Beijing campus), not taken from any catalog
DEFAULT_USER = {"lat_deg": 39.9523, "lon_deg": 116.3421, "height_m": 50.0}
DEFAULT_USER_NOTE = "operator-supplied default site"

_NUMBER = (int, float)


# --- config sections -------------------------------------------------------------

@dataclass(frozen=True)
class NoiseSettings:
    pseudorange_sigma_m: float = 2.0
    doppler_sigma_hz: float = 1.0
    range_sigma_m: float = 2.0


@dataclass(frozen=True)
class LinkSettings:
    bandwidth_hz: float = 1e6
    noise_power_w: float = 4e-15  # kT B at 290 K and 1 MHz
    carrier_hz: float = GPS_L1_HZ
    fading_k: float = 10.0
    eirp_dbw: float = 30.0
    rx_gain_db: float = 0.0
    n_elements: int = 64
    ris_amplitude: float = 1.0
    mean_snr_db: float = 10.0  # power-split sweep only
    mode: str = "NO"
    omega_c_sq: float = 0.5  # RIS distance sweep only


@dataclass(frozen=True)
class RisSettings:
    n_sats: int = 6
    shell_altitude_m: float = 550e3
    azimuth_offset_deg: float = 15.0
    user_offset_m: tuple = (30.0, 20.0, -10.0)


@dataclass(frozen=True)
class IndoorSettings:
    anchors: tuple = ((0.0, 3.0, 0.5), (0.0, 7.0, 0.5), (0.0, 5.0, 2.8), (0.6, 5.0, 2.9))
    room: tuple = (10.0, 10.0, 3.0)
    path_origin: tuple = (0.5, 5.0, 1.2)
    path_direction: tuple = (1.0, 0.0, 0.0)
    sync_error_s: float = 10e-9
    sync_mode: str = "gaussian"


def _kind_defaults(kind: ScenarioKind) -> dict:
    """Per-kind overrides of the section defaults above."""
    if kind is ScenarioKind.POWER_SPLIT_SWEEP:
        return {"link": {"bandwidth_hz": 1.0, "noise_power_w": 1.0}}
    if kind is ScenarioKind.RIS_DISTANCE_SWEEP:
        return {"link": {"carrier_hz": KU_DOWNLINK_HZ}}
    if kind is ScenarioKind.INDOOR_DISTANCE_SWEEP:
        return {"noise": {"range_sigma_m": 0.0}}
    return {}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario_kind: ScenarioKind
    tle_path: str | None
    constellation: str
    name_filter: str | None
    user_geodetic: GeodeticPosition
    epoch_utc: datetime | None
    sweep_values: tuple
    sweep_unit: str
    noise: NoiseSettings
    link: LinkSettings
    ris: RisSettings
    indoor: IndoorSettings
    clock_bias_m: float
    rng_seed: int
    trials: int
    output_path: str
    defaults_applied: tuple = field(default=(), compare=False)

    def with_overrides(self, **changes) -> "ScenarioConfig":
        """Copy with top-level fields replaced; re-checks the trial count."""
        if "trials" in changes and int(changes["trials"]) < 1:
            raise SemanticError("trials must be >= 1")
        return dataclasses.replace(self, **changes)

    def as_document(self) -> dict:
        """The fully defaulted config as a JSON-compatible tree."""
        return {
            "scenario_kind": self.scenario_kind.value,
            "tle_path": self.tle_path,
            "constellation": self.constellation,
            "name_filter": self.name_filter,
            "user_geodetic": {"lat_deg": self.user_geodetic.latitude,
                              "lon_deg": self.user_geodetic.longitude,
                              "height_m": self.user_geodetic.height},
            "epoch_utc": None if self.epoch_utc is None else _format_epoch(self.epoch_utc),
            "sweep_values": {"values": list(self.sweep_values), "unit": self.sweep_unit},
            "noise": _plain(dataclasses.asdict(self.noise)),
            "link": _plain(dataclasses.asdict(self.link)),
            "ris": _plain(dataclasses.asdict(self.ris)),
            "indoor": _plain(dataclasses.asdict(self.indoor)),
            "clock_bias_m": self.clock_bias_m,
            "rng_seed": self.rng_seed,
            "trials": self.trials,
            "output_path": self.output_path,
        }


def _plain(obj):
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    return obj


def _format_epoch(t: datetime) -> str:
    return as_utc(t).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


# --- validation ----------------------------------------------------------------

TOP_KEYS = {
    "scenario_kind", "tle_path", "constellation", "name_filter", "user_geodetic",
    "epoch_utc", "sweep_values", "noise", "link", "ris", "indoor", "clock_bias_m",
    "rng_seed", "trials", "output_path",
}


def _type_name(value) -> str:
    return type(value).__name__


def _check_number(value, where: str, integer: bool = False):
    if isinstance(value, bool) or not isinstance(value, _NUMBER):
        raise SchemaError(f"{where}: expected a number, got {_type_name(value)}")
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise SchemaError(f"{where}: expected an integer, got {value}")
        return int(value)
    if not math.isfinite(value):
        raise SemanticError(f"{where}: must be finite")
    return float(value)


def _check_vector(value, where: str, length: int | None = None) -> tuple:
    if not isinstance(value, (list, tuple)):
        raise SchemaError(f"{where}: expected a list, got {_type_name(value)}")
    out = tuple(_check_number(v, f"{where}[{i}]") for i, v in enumerate(value))
    if length is not None and len(out) != length:
        raise SchemaError(f"{where}: expected {length} numbers, got {len(out)}")
    return out


def _section(raw, cls, name: str, overrides: dict, filled: list):
    """Build a settings dataclass from a mapping, filling and recording defaults."""
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise SchemaError(f"{name}: expected an object, got {_type_name(raw)}")
    known = {f.name: f for f in dataclasses.fields(cls)}
    for key in raw:
        if key not in known:
            raise SchemaError(f"unknown key '{name}.{key}'")
    values = {}
    for fname, f in known.items():
        default = overrides.get(fname, f.default)
        if fname not in raw:
            filled.append(f"{name}.{fname}")
            values[fname] = default
            continue
        value, where = raw[fname], f"{name}.{fname}"
        if isinstance(default, bool):
            raise AssertionError("no boolean settings")
        if isinstance(default, int):
            values[fname] = _check_number(value, where, integer=True)
        elif isinstance(default, float):
            values[fname] = _check_number(value, where)
        elif isinstance(default, str):
            if not isinstance(value, str):
                raise SchemaError(f"{where}: expected a string, got {_type_name(value)}")
            values[fname] = value
        elif default and isinstance(default[0], tuple):
            if not isinstance(value, (list, tuple)):
                raise SchemaError(f"{where}: expected a list of points")
            values[fname] = tuple(_check_vector(v, f"{where}[{i}]", 3) for i, v in enumerate(value))
        else:
            values[fname] = _check_vector(value, where, len(default))
    return cls(**values)


def _sweep(raw, kind: ScenarioKind, filled: list) -> tuple[tuple, str]:
    unit = SWEEP_UNITS[kind]
    if raw is None:
        filled.append("sweep_values")
        return DEFAULT_SWEEPS[kind], unit
    if isinstance(raw, list):
        values = raw
    elif isinstance(raw, dict):
        extra = set(raw) - {"values", "unit", "start", "stop", "count", "step"}
        if extra:
            raise SchemaError(f"unknown key 'sweep_values.{sorted(extra)[0]}'")
        if "unit" in raw:
            if raw["unit"] != unit:
                raise SemanticError(f"sweep_values.unit must be '{unit}' for {kind.value}")
        if "values" in raw:
            if {"start", "stop", "count", "step"} & set(raw):
                raise SchemaError("sweep_values: give either 'values' or a start/stop grid")
            values = raw["values"]
        elif "start" in raw and "stop" in raw:
            start = _check_number(raw["start"], "sweep_values.start")
            stop = _check_number(raw["stop"], "sweep_values.stop")
            if "count" in raw and "step" in raw:
                raise SchemaError("sweep_values: give either 'count' or 'step'")
            if "step" in raw:
                step = _check_number(raw["step"], "sweep_values.step")
                if step == 0 or (stop - start) / step < 0:
                    raise SemanticError("sweep_values.step does not lead from start to stop")
                n = int(math.floor((stop - start) / step + 1e-9)) + 1
                values = [start + k * step for k in range(n)]
            else:
                count = _check_number(raw.get("count", 21), "sweep_values.count", integer=True)
                if count < 1:
                    raise SemanticError("sweep_values.count must be >= 1")
                values = np.linspace(start, stop, count).tolist()
        else:
            raise SchemaError("sweep_values: need 'values' or 'start' and 'stop'")
    else:
        raise SchemaError(f"sweep_values: expected a list or object, got {_type_name(raw)}")
    if not isinstance(values, list):
        raise SchemaError("sweep_values.values: expected a list")
    values = tuple(_check_number(v, f"sweep_values[{i}]") for i, v in enumerate(values))
    if not values:
        raise SemanticError("sweep_values must not be empty")
    diffs = np.diff(values)
    if len(values) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise SemanticError("sweep_values must be strictly monotone")
    return values, unit


def _parse_epoch(value) -> datetime:
    if not isinstance(value, str):
        raise SchemaError(f"epoch_utc: expected an ISO-8601 string, got {_type_name(value)}")
    try:
        t = datetime.fromisoformat(value.replace("Z", "+00:00"))
    except ValueError:
        raise SchemaError(f"epoch_utc: cannot parse {value!r}") from None
    if t.tzinfo is None:
        t = t.replace(tzinfo=timezone.utc)
    return t.astimezone(timezone.utc)


def _user(raw, filled: list) -> GeodeticPosition:
    if raw is None:
        filled.append("user_geodetic")
        raw = DEFAULT_USER
    if not isinstance(raw, dict):
        raise SchemaError(f"user_geodetic: expected an object, got {_type_name(raw)}")
    for key in raw:
        if key not in DEFAULT_USER:
            raise SchemaError(f"unknown key 'user_geodetic.{key}'")
    for key in ("lat_deg", "lon_deg"):
        if key not in raw:
            raise SchemaError(f"user_geodetic.{key} is required")
    if "height_m" not in raw:
        filled.append("user_geodetic.height_m")
    lat = _check_number(raw["lat_deg"], "user_geodetic.lat_deg")
    lon = _check_number(raw["lon_deg"], "user_geodetic.lon_deg")
    h = _check_number(raw.get("height_m", 0.0), "user_geodetic.height_m")
    if not -180.0 <= lon < 180.0:
        lon = (lon + 180.0) % 360.0 - 180.0
    try:
        return GeodeticPosition(lat, lon, h)
    except ValueError as exc:
        raise SemanticError(f"user_geodetic: {exc}") from None


def validate_config(raw, base_dir=None) -> ScenarioConfig:
    """Check a raw config tree and return it fully defaulted.

    Relative ``tle_path`` values resolve against ``base_dir`` (the config
    file's directory when loaded through :func:`load_config`).
    """
    if not isinstance(raw, dict):
        raise SchemaError(f"config must be an object, got {_type_name(raw)}")
    for key in raw:
        if key not in TOP_KEYS:
            raise SchemaError(f"unknown key '{key}'")
    if "scenario_kind" not in raw:
        raise SchemaError("scenario_kind is required")
    try:
        kind = ScenarioKind(raw["scenario_kind"])
    except ValueError:
        choices = ", ".join(k.value for k in ScenarioKind)
        raise SchemaError(f"scenario_kind must be one of {choices}") from None

    filled: list[str] = []
    overrides = _kind_defaults(kind)

    tle_path = raw.get("tle_path")
    if tle_path is not None:
        if not isinstance(tle_path, str):
            raise SchemaError("tle_path: expected a string")
        path = Path(tle_path)
        if not path.is_absolute() and base_dir is not None:
            path = Path(base_dir) / path
        if not path.is_file():
            raise MissingFile(f"TLE file not found: {path}")
        tle_path = str(path)

    constellation = raw.get("constellation")
    if constellation is None:
        constellation = "starlink_like"
        if tle_path is None and kind is ScenarioKind.ELEVATION_MASK_SWEEP:
            filled.append("constellation")
    elif constellation not in SYNTHETIC_SHELLS:
        raise SemanticError(f"constellation must be one of {', '.join(SYNTHETIC_SHELLS)}")

    name_filter = raw.get("name_filter")
    if name_filter is not None and not isinstance(name_filter, str):
        raise SchemaError("name_filter: expected a string")

    epoch = None
    if raw.get("epoch_utc") is not None:
        epoch = _parse_epoch(raw["epoch_utc"])
    elif kind is ScenarioKind.ELEVATION_MASK_SWEEP:
        filled.append("epoch_utc")  # resolved from the catalog at run time
    sweep, unit = _sweep(raw.get("sweep_values"), kind, filled)
    noise = _section(raw.get("noise"), NoiseSettings, "noise", overrides.get("noise", {}), filled)
    link = _section(raw.get("link"), LinkSettings, "link", overrides.get("link", {}), filled)
    ris = _section(raw.get("ris"), RisSettings, "ris", {}, filled)
    indoor = _section(raw.get("indoor"), IndoorSettings, "indoor", {}, filled)

    def scalar(key, default, integer=False):
        if key not in raw:
            filled.append(key)
            return default
        return _check_number(raw[key], key, integer)

    trials = scalar("trials", 100, integer=True)
    seed = scalar("rng_seed", 1, integer=True)
    clock_bias = scalar("clock_bias_m", 0.0)
    output_path = raw.get("output_path")
    if output_path is None:
        filled.append("output_path")
        output_path = f"{kind.value}.csv"
    elif not isinstance(output_path, str):
        raise SchemaError("output_path: expected a string")

    cfg = ScenarioConfig(
        scenario_kind=kind,
        tle_path=tle_path,
        constellation=constellation,
        name_filter=name_filter,
        user_geodetic=_user(raw.get("user_geodetic"), filled),
        epoch_utc=epoch,
        sweep_values=sweep,
        sweep_unit=unit,
        noise=noise,
        link=link,
        ris=ris,
        indoor=indoor,
        clock_bias_m=clock_bias,
        rng_seed=seed,
        trials=trials,
        output_path=output_path,
        defaults_applied=tuple(filled),
    )
    _check_semantics(cfg)
    return cfg


def _check_semantics(cfg: ScenarioConfig) -> None:
    if cfg.trials < 1:
        raise SemanticError("trials must be >= 1")
    if cfg.rng_seed < 0:
        raise SemanticError("rng_seed must be non-negative")
    n, lk = cfg.noise, cfg.link
    for name in ("pseudorange_sigma_m", "doppler_sigma_hz", "range_sigma_m"):
        if getattr(n, name) < 0:
            raise SemanticError(f"noise.{name} must be non-negative")
    for name in ("bandwidth_hz", "noise_power_w", "carrier_hz"):
        if getattr(lk, name) <= 0:
            raise SemanticError(f"link.{name} must be positive")
    if lk.fading_k < 0 or lk.n_elements < 1 or lk.ris_amplitude < 0:
        raise SemanticError("link: fading_k, ris_amplitude must be >= 0 and n_elements >= 1")
    if lk.mode not in ("NO", "CO"):
        raise SemanticError("link.mode must be 'NO' or 'CO'")
    if not 0.0 <= lk.omega_c_sq <= 1.0:
        raise SemanticError("link.omega_c_sq must lie in [0, 1]")

    kind, values = cfg.scenario_kind, cfg.sweep_values
    if kind is ScenarioKind.ELEVATION_MASK_SWEEP:
        if any(v < 0 or v > 90 for v in values):
            raise SemanticError("elevation masks must lie in [0, 90] deg")
    elif kind is ScenarioKind.POWER_SPLIT_SWEEP:
        if any(v < 0 or v > 1 for v in values):
            raise SemanticError("omega_c^2 values must lie in [0, 1]")
    elif kind is ScenarioKind.RIS_DISTANCE_SWEEP:
        template = sat_ris_template(cfg)
        for v in values:
            try:
                template.elevation_deg(v)
            except ValueError as exc:
                raise SemanticError(str(exc)) from None
        if cfg.ris.n_sats < 3:
            raise SemanticError("ris.n_sats must be >= 3")
    else:
        try:
            scenario = indoor_scenario(cfg)
            for v in values:
                scenario.user_for_mean_distance(v)
        except (ValueError, InacError) as exc:
            raise SemanticError(f"indoor: {exc}") from None
        if cfg.indoor.sync_error_s < 0 or cfg.indoor.sync_mode not in ("gaussian", "bias"):
            raise SemanticError("indoor: sync_error_s must be >= 0 and sync_mode gaussian or bias")


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise MissingFile(f"config file not found: {path}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    return validate_config(raw, base_dir=path.parent)


# --- running -----------------------------------------------------------------------

@dataclass(frozen=True)
class SweepResultRow:
    sweep_value: float
    metrics: dict
    trials: int
    seed: int


@dataclass(frozen=True)
class ScenarioResult:
    kind: ScenarioKind
    rows: list
    metadata: dict

    @property
    def metric_names(self) -> tuple:
        return METRICS[self.kind]


def thread_count() -> int:
    raw = os.environ.get("INAC_SIM_THREADS")
    if raw is None:
        return max(1, os.cpu_count() or 1)
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_cells(fn, values):
    """Ordered map over sweep cells, parallel up to INAC_SIM_THREADS workers."""
    values = list(values)
    workers = min(thread_count(), len(values))
    if workers <= 1:
        return [fn(v) for v in values]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, values))


def sat_ris_template(cfg: ScenarioConfig) -> SatRisTemplate:
    r, lk = cfg.ris, cfg.link
    return SatRisTemplate(
        n_sats=r.n_sats, shell_altitude=r.shell_altitude_m,
        azimuth_offset_deg=r.azimuth_offset_deg, user_offset=tuple(r.user_offset_m),
        range_sigma=cfg.noise.range_sigma_m, carrier_hz=lk.carrier_hz,
        eirp_dbw=lk.eirp_dbw, rx_gain_db=lk.rx_gain_db, n_elements=lk.n_elements,
        ris_amplitude=lk.ris_amplitude, k_factor=lk.fading_k,
        bandwidth_hz=lk.bandwidth_hz, noise_power_w=lk.noise_power_w,
    )


def indoor_scenario(cfg: ScenarioConfig) -> IndoorScenario:
    s = cfg.indoor
    return IndoorScenario(
        ris_anchors=np.array(s.anchors, dtype=float), room=tuple(s.room),
        path_origin=tuple(s.path_origin), path_direction=tuple(s.path_direction),
        sync_error_s=s.sync_error_s, range_sigma=cfg.noise.range_sigma_m,
        sync_mode=s.sync_mode,
    )


def _catalog(cfg: ScenarioConfig):
    """(records, catalog text, source label)."""
    if cfg.tle_path is not None:
        text = Path(cfg.tle_path).read_text()
        source = cfg.tle_path
    else:
        shells = SYNTHETIC_SHELLS[cfg.constellation]
        text = walker_catalog_text(shells, DEFAULT_EPOCH)
        source = f"synthetic Walker catalog {cfg.constellation}"
    records = parse_tle_file(text)
    if cfg.name_filter:
        needle = cfg.name_filter.upper()
        records = [r for r in records if needle in (r.name or "").upper()]
    if not records:
        raise ScenarioError("catalog holds no matching records")
    return records, text, source


def _elevation_sweep(cfg: ScenarioConfig, meta: dict) -> list:
    records, text, source = _catalog(cfg)
    epoch = cfg.epoch_utc
    if epoch is None:
        epoch = max(as_utc(r.epoch_utc) for r in records)
    guard = TLE_GUARD_DAYS * 86400.0
    fresh = [r for r in records if abs((epoch - as_utc(r.epoch_utc)).total_seconds()) <= guard]
    meta.update({
        "catalog_source": source,
        "catalog_hash": catalog_hash(text),
        "catalog_records": len(records),
        "stale_records_skipped": len(records) - len(fresh),
        "epoch_utc": _format_epoch(epoch),
    })
    if not fresh:
        raise ScenarioError(f"no record within {TLE_GUARD_DAYS} days of {epoch.isoformat()}")

    pos_eci, vel_eci = propagate_catalog(fresh, epoch)
    pos, _ = eci_to_ecef_arrays(pos_eci, vel_eci, epoch)
    user = geodetic_to_ecef(cfg.user_geodetic)
    views = look_angles(user, pos, sat_ids=[r.catalog_number for r in fresh])
    above = [k for k, v in enumerate(views) if v.elevation >= 0.0]
    elev = np.array([views[k].elevation for k in above])
    sats = pos[above]
    ranges = np.linalg.norm(sats - user, axis=1)

    sigma, trials, seed = cfg.noise.pseudorange_sigma_m, cfg.trials, cfg.rng_seed
    # one noise draw per trial for every satellite above the horizon: all masks
    # then see the same errors on the satellites they share
    noise = np.array([trial_rng(seed, i, 0).standard_normal(len(above)) for i in range(trials)])
    noise = noise.reshape(trials, len(above))
    lk = cfg.link
    snr = received_snr_db(lk.eirp_dbw, lk.rx_gain_db, ranges, lk.carrier_hz,
                          watts_to_dbw(lk.noise_power_w)) if len(above) else np.zeros(0)

    def cell(mask):
        sel = np.flatnonzero(elev >= min(90.0, max(0.0, mask)))
        count = len(sel)
        pdop = math.nan
        if count >= 4:
            try:
                pdop = dop(visible_sats([views[above[k]] for k in sel], mask)).pdop
            except InacError:
                pass
        sq_err, failures = [], 0
        for i in range(trials):
            measured = ranges[sel] + cfg.clock_bias_m + sigma * noise[i, sel]
            obs = [PseudorangeObs(int(views[above[k]].sat_id), float(m), sigma)
                   for k, m in zip(sel, measured)]
            try:
                sol = solve_ls(obs, sats[sel])
            except InacError:
                failures += 1
                continue
            except Exception as exc:  # annotate, never swallow
                raise ScenarioError(str(exc), mask, i) from exc
            sq_err.append(float(np.sum((sol.position_ecef - user) ** 2)))
        return {
            "visible_count": count,
            "pdop": pdop,
            "rms_error_m": math.sqrt(np.mean(sq_err)) if sq_err else math.nan,
            "mean_snr_db": float(np.mean(snr[sel])) if count else math.nan,
            "failures": failures,
        }

    return _map_cells(cell, cfg.sweep_values)


def _power_split_sweep(cfg: ScenarioConfig, meta: dict) -> list:
    lk = cfg.link
    model = FadingModel(lk.n_elements, lk.fading_k,
                        lk.noise_power_w * 10.0 ** (lk.mean_snr_db / 10.0), lk.ris_amplitude)
    mode = ServiceMode(lk.mode)

    def cell(wc2):
        split = PowerSplit.from_comm_power(wc2)
        # same channel draws at every split point
        r = ergodic_rates(model, split, mode, cfg.trials, trial_rng(cfg.rng_seed, 0, 4),
                          lk.bandwidth_hz, lk.noise_power_w)
        return {"omega_c": split.omega_c, "c_nav": r.c_nav, "c_com": r.c_com,
                "c_nav_halfwidth": r.c_nav_halfwidth, "c_com_halfwidth": r.c_com_halfwidth}

    return _map_cells(cell, cfg.sweep_values)


def _ris_sweep(cfg: ScenarioConfig, meta: dict) -> list:
    template = sat_ris_template(cfg)
    split = PowerSplit.from_comm_power(cfg.link.omega_c_sq)
    mode = ServiceMode(cfg.link.mode)

    def cell(d):
        (p,) = run_sat_ris_distance_sweep([d], split, cfg.trials, cfg.rng_seed, template, mode)
        return {"elevation_deg": p.elevation_deg, "pdop": p.pdop,
                "rms_error_m": p.rms_position_error, "c_nav": p.c_nav, "c_com": p.c_com,
                "failures": p.failures}

    return _map_cells(cell, cfg.sweep_values)


def _indoor_sweep(cfg: ScenarioConfig, meta: dict) -> list:
    scenario = indoor_scenario(cfg)

    def cell(d):
        (p,) = run_indoor_distance_sweep([d], cfg.trials, cfg.rng_seed, scenario)
        return {"pdop": p.pdop, "rms_error_m": p.rms_error, "failures": p.failures}

    return _map_cells(cell, cfg.sweep_values)


_RUNNERS = {
    ScenarioKind.ELEVATION_MASK_SWEEP: _elevation_sweep,
    ScenarioKind.POWER_SPLIT_SWEEP: _power_split_sweep,
    ScenarioKind.RIS_DISTANCE_SWEEP: _ris_sweep,
    ScenarioKind.INDOOR_DISTANCE_SWEEP: _indoor_sweep,
}


def run_scenario(cfg: ScenarioConfig) -> ScenarioResult:
    """Run every sweep cell of ``cfg``; one row per sweep value, in order."""
    meta = {
        "tool": "inac-sim",
        "version": __version__,
        "scenario_kind": cfg.scenario_kind.value,
        "seed": cfg.rng_seed,
        "trials": cfg.trials,
        "sweep_unit": cfg.sweep_unit,
    }
    meta["catalog_hash"] = "none"  # elevation sweeps replace it
    try:
        metrics = _RUNNERS[cfg.scenario_kind](cfg, meta)
    except (ScenarioError, KeyboardInterrupt):
        raise
    except InacError as exc:
        raise ScenarioError(str(exc)) from exc
    if "user_geodetic" in cfg.defaults_applied:
        meta["user_geodetic_note"] = DEFAULT_USER_NOTE
    meta["defaults_applied"] = list(cfg.defaults_applied)
    document = cfg.as_document()
    if document["epoch_utc"] is None and "epoch_utc" in meta:
        document["epoch_utc"] = meta["epoch_utc"]
    meta["config"] = document
    rows = [SweepResultRow(v, m, cfg.trials, cfg.rng_seed)
            for v, m in zip(cfg.sweep_values, metrics)]
    return ScenarioResult(cfg.scenario_kind, rows, meta)

