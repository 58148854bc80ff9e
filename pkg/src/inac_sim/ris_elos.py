"""
RIS extended line-of-sight (ELoS) ranging and positioning.

Two desk experiments live here:

* the satellite-RIS distance sweep: ranging geometry and ergodic rate as the
  serving satellites recede from the RIS, and
* indoor positioning from RIS anchors whose ranges carry a Gaussian
  synchronization error of standard deviation ``c * tau``.

Both run in a local east/north/up Cartesian frame in meters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .constants import KU_DOWNLINK_HZ, SPEED_OF_LIGHT
from .errors import CoincidentPoints, InacError, InsufficientAnchors
from .link import FadingModel, PowerSplit, ServiceMode, ergodic_rates
from .observations import fspl_db
from .rng import trial_rng
from .solver import PvtSolution, point_dops, solve_ranges

EARTH_RADIUS_M = 6_371_000.0


@dataclass(frozen=True)
class ElosObservation:
    anchor_id: int
    total_path: float  # m
    sigma: float  # m, total standard deviation of the range error
    sync_bias_m: float = 0.0  # realized synchronization range error


def elos_path_length(sat_pos, ris_pos, user_pos) -> float:
    """|sat - ris| + |ris - user|."""
    sat, ris, user = (np.asarray(p, dtype=float) for p in (sat_pos, ris_pos, user_pos))
    d1 = float(np.linalg.norm(sat - ris))
    d2 = float(np.linalg.norm(ris - user))
    if d1 < 1e-9 or d2 < 1e-9 or np.linalg.norm(sat - user) < 1e-9:
        raise CoincidentPoints("ELoS path needs three distinct points")
    return d1 + d2


def synth_elos_obs(paths, sync_error_s: float, sigma: float, rng,
                   anchor_ids=None, sync_mode: str = "gaussian") -> list[ElosObservation]:
    """Ranging observations on the given path lengths.

    Each path gets ``c * sync_error_s * N(0, 1)`` synchronization error
    (``sync_mode="gaussian"``) or the constant ``c * sync_error_s``
    (``sync_mode="bias"``), plus independent ``N(0, sigma^2)`` ranging noise.
    """
    if sigma < 0 or sync_error_s < 0:
        raise ValueError("sigma and sync_error_s must be non-negative")
    paths = np.atleast_1d(np.asarray(paths, dtype=float))
    n = len(paths)
    sync_std = SPEED_OF_LIGHT * sync_error_s
    draws = rng.standard_normal((2, n))
    if sync_mode == "gaussian":
        sync = sync_std * draws[0]
        total_sigma = math.hypot(sync_std, sigma)
    elif sync_mode == "bias":
        sync = np.full(n, sync_std)
        total_sigma = sigma
    else:
        raise ValueError(f"unknown sync_mode {sync_mode!r}")
    measured = paths + sync + sigma * draws[1]
    ids = range(n) if anchor_ids is None else anchor_ids
    return [ElosObservation(int(i), float(m), total_sigma, float(s))
            for i, m, s in zip(ids, measured, sync)]


def solve_indoor(obs, anchors, initial=None, dims: int = 3) -> PvtSolution:
    """Least-squares user fix from ranges to RIS anchors of known position.

    A common range bias is added to the unknowns when there are at least
    ``dims + 2`` observations. In 2D the height is held at ``initial[2]``.
    """
    obs = list(obs)
    anchors = np.atleast_2d(np.asarray(anchors, dtype=float))
    need = 4 if dims == 3 else 3
    if len(obs) < need:
        raise InsufficientAnchors(f"need at least {need} anchors in {dims}D, got {len(obs)}")
    if initial is None:
        initial = anchors.mean(axis=0)
    return solve_ranges(
        anchors,
        [o.total_path for o in obs],
        [o.sigma for o in obs],
        np.asarray(initial, dtype=float)[:3],
        estimate_bias=len(obs) >= dims + 2,
        dims=dims,
        local_frame=True,
        min_obs=need,
        insufficient=InsufficientAnchors,
    )


# --- satellite-RIS distance sweep -------------------------------------------------

@dataclass(frozen=True)
class SatRisTemplate:
    """Geometry and link constants of the satellite-RIS distance sweep.

    The RIS sits at the origin of a local ENU frame and the user at
    ``user_offset``. For a sweep distance D, ``n_sats`` satellites of a shell
    at ``shell_altitude`` are placed at slant range D from the RIS, equally
    spaced in azimuth. A larger D puts them lower in the sky, which widens
    the angular spread of the ranging geometry. Positioning uses
    range-only least squares (synchronized receiver). The rate uses FSPL over
    the whole ELoS path, satellite -> RIS -> user.
    """
    n_sats: int = 6
    shell_altitude: float = 550e3
    azimuth_offset_deg: float = 15.0
    user_offset: tuple = (30.0, 20.0, -10.0)
    range_sigma: float = 2.0
    carrier_hz: float = KU_DOWNLINK_HZ
    eirp_dbw: float = 30.0
    rx_gain_db: float = 0.0
    n_elements: int = 64
    ris_amplitude: float = 1.0
    k_factor: float = 10.0
    bandwidth_hz: float = 1e6
    noise_power_w: float = 4e-15

    def elevation_deg(self, distance: float) -> float:
        r_sat = EARTH_RADIUS_M + self.shell_altitude
        s = (r_sat ** 2 - EARTH_RADIUS_M ** 2 - distance ** 2) / (2.0 * EARTH_RADIUS_M * distance)
        if not -1.0 <= s <= 1.0:
            raise ValueError(f"no satellite of the shell lies {distance:.0f} m from the RIS")
        return math.degrees(math.asin(s))

    def satellites(self, distance: float) -> np.ndarray:
        el = math.radians(self.elevation_deg(distance))
        az = np.radians(self.azimuth_offset_deg + 360.0 * np.arange(self.n_sats) / self.n_sats)
        return distance * np.column_stack([
            math.cos(el) * np.sin(az), math.cos(el) * np.cos(az), np.full(self.n_sats, math.sin(el))])

    def mean_gain(self, total_path: float) -> float:
        array_gain_db = 20.0 * math.log10(self.n_elements * self.ris_amplitude)
        rx_dbw = self.eirp_dbw + self.rx_gain_db + array_gain_db - fspl_db(total_path, self.carrier_hz)
        return 10.0 ** (rx_dbw / 10.0)


@dataclass(frozen=True)
class DistancePoint:
    distance: float
    pdop: float
    rms_position_error: float
    c_nav: float
    c_com: float
    elevation_deg: float
    failures: int = 0


def run_sat_ris_distance_sweep(distances, split: PowerSplit, trials: int, seed: int,
                               template: SatRisTemplate = SatRisTemplate(),
                               mode: ServiceMode = ServiceMode.NO) -> list[DistancePoint]:
    """PDoP, Monte Carlo position RMS and ergodic rates per sweep distance.

    Every distance reuses the same per-trial random streams (common random
    numbers), so differences between points reflect geometry and path loss
    rather than sampling noise.
    """
    distances = [float(d) for d in distances]
    if any(d <= 0 for d in distances) or any(b <= a for a, b in zip(distances, distances[1:])):
        raise ValueError("distances must be positive and strictly ascending")
    user = np.asarray(template.user_offset, dtype=float)
    out = []
    for d in distances:
        sats = template.satellites(d)
        true_ranges = np.linalg.norm(sats - user, axis=1)
        dops = point_dops(user, sats, local_frame=True, with_bias=False)
        sq_err, failures = [], 0
        for i in range(trials):
            rng = trial_rng(seed, i, stream=1)
            noisy = true_ranges + template.range_sigma * rng.standard_normal(len(sats))
            try:
                sol = solve_ranges(sats, noisy, np.full(len(sats), template.range_sigma),
                                   np.zeros(3), estimate_bias=False, local_frame=True)
            except InacError:
                failures += 1
                continue
            sq_err.append(float(np.sum((sol.position_ecef - user) ** 2)))
        total_path = d + float(np.linalg.norm(user))
        model = FadingModel(template.n_elements, template.k_factor,
                            template.mean_gain(total_path), template.ris_amplitude)
        rates = ergodic_rates(model, split, mode, trials, trial_rng(seed, 0, stream=2),
                              template.bandwidth_hz, template.noise_power_w)
        out.append(DistancePoint(
            distance=d,
            pdop=dops.pdop if dops else math.nan,
            rms_position_error=math.sqrt(np.mean(sq_err)) if sq_err else math.nan,
            c_nav=rates.c_nav,
            c_com=rates.c_com,
            elevation_deg=template.elevation_deg(d),
            failures=failures,
        ))
    return out


# --- indoor positioning -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class IndoorScenario:
    """Room with RIS anchors on one wall and a user walking away from it.

    The anchor cluster is fixed; the user moves along ``path_direction``
    from ``path_origin``. Coordinates are meters in the room frame.
    """
    ris_anchors: np.ndarray = field(default_factory=lambda: np.array([
        [0.0, 3.0, 0.5],
        [0.0, 7.0, 0.5],
        [0.0, 5.0, 2.8],
        [0.6, 5.0, 2.9],
    ]))
    room: tuple = (10.0, 10.0, 3.0)
    path_origin: tuple = (0.5, 5.0, 1.2)
    path_direction: tuple = (1.0, 0.0, 0.0)
    sync_error_s: float = 10e-9
    range_sigma: float = 0.0
    sync_mode: str = "gaussian"

    def __post_init__(self):
        anchors = np.atleast_2d(np.asarray(self.ris_anchors, dtype=float))
        if len(anchors) < 4:
            raise InsufficientAnchors("a 3D indoor scenario needs at least 4 anchors")
        object.__setattr__(self, "ris_anchors", anchors)

    def user_at(self, offset: float) -> np.ndarray:
        direction = np.asarray(self.path_direction, dtype=float)
        return np.asarray(self.path_origin, dtype=float) + offset * direction / np.linalg.norm(direction)

    def mean_distance(self, user) -> float:
        return float(np.mean(np.linalg.norm(self.ris_anchors - user, axis=1)))

    def max_offset(self) -> float:
        """Largest offset keeping the user inside the room."""
        lo = np.zeros(3)
        hi = np.asarray(self.room, dtype=float)
        o = np.asarray(self.path_origin, dtype=float)
        d = np.asarray(self.path_direction, dtype=float)
        d = d / np.linalg.norm(d)
        limits = [((hi[k] if d[k] > 0 else lo[k]) - o[k]) / d[k] for k in range(3) if d[k] != 0]
        return min(limits)

    def user_for_mean_distance(self, target: float) -> np.ndarray:
        """User position on the walking path whose mean anchor distance is ``target``."""
        f = lambda s: self.mean_distance(self.user_at(s)) - target
        top = self.max_offset()
        if f(0.0) > 0 or f(top) < 0:
            raise ValueError(
                f"mean distance {target} m not reachable inside the room "
                f"(range {f(0.0) + target:.2f}..{f(top) + target:.2f} m)")
        return self.user_at(brentq(f, 0.0, top, xtol=1e-12))

    def room_center(self) -> np.ndarray:
        return 0.5 * np.asarray(self.room, dtype=float)


@dataclass(frozen=True)
class IndoorPoint:
    mean_distance: float
    rms_error: float
    pdop: float
    failures: int = 0


def run_indoor_distance_sweep(mean_distances, trials: int, seed: int,
                              scenario: IndoorScenario = IndoorScenario()) -> list[IndoorPoint]:
    """Monte Carlo indoor RMS position error against mean RIS-user distance."""
    out = []
    anchors = scenario.ris_anchors
    for target in mean_distances:
        user = scenario.user_for_mean_distance(float(target))
        paths = np.linalg.norm(anchors - user, axis=1)
        sq_err, failures = [], 0
        for i in range(trials):
            rng = trial_rng(seed, i, stream=3)
            obs = synth_elos_obs(paths, scenario.sync_error_s, scenario.range_sigma, rng,
                                 sync_mode=scenario.sync_mode)
            try:
                sol = solve_indoor(obs, anchors, initial=scenario.room_center())
            except InacError:
                failures += 1
                continue
            sq_err.append(float(np.sum((sol.position_ecef - user) ** 2)))
        dops = point_dops(user, anchors, local_frame=True, with_bias=False)
        out.append(IndoorPoint(
            mean_distance=float(target),
            rms_error=math.sqrt(np.mean(sq_err)) if sq_err else math.nan,
            pdop=dops.pdop if dops else math.nan,
            failures=failures,
        ))
    return out
