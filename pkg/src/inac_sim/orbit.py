"""
Two-body propagation of TLE mean elements and ECI/ECEF/geodetic frames.

The propagator is drag-free Keplerian motion seeded from the TLE mean
elements (optionally with secular J2 drift of RAAN and argument of perigee).
It is not SGP4: truth and observations share this propagator, which is all
the geometry studies need.  Earth rotation uses the IAU-1982 GMST polynomial
with UT1 taken equal to UTC.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .constants import (J2, MU_EARTH, OMEGA_EARTH, SECONDS_PER_DAY,
                        TLE_GUARD_DAYS, TWO_PI, WGS84_A, WGS84_B, WGS84_E2,
                        WGS84_EP2, WGS84_F)
from .errors import DegenerateInput, EpochTooFar, FrameMismatch, NonConvergence

KEPLER_TOL = 1e-12
KEPLER_MAX_ITER = 50

_J2000_UNIX = 946_728_000.0  # 2000-01-01T12:00:00 UTC


class Frame(str, enum.Enum):
    ECI = "ECI"
    ECEF = "ECEF"


@dataclass(frozen=True, eq=False)
class StateVector:
    epoch_utc: datetime
    frame: Frame
    position: np.ndarray  # m
    velocity: np.ndarray  # m/s

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float).reshape(3))


@dataclass(frozen=True)
class GeodeticPosition:
    latitude: float  # deg, [-90, 90]
    longitude: float  # deg, [-180, 180)
    height: float = 0.0  # m above the WGS-84 ellipsoid

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude {self.latitude} outside [-90, 90]")
        if not -180.0 <= self.longitude < 180.0:
            raise ValueError(f"longitude {self.longitude} outside [-180, 180)")


def as_utc(t: datetime) -> datetime:
    """Naive datetimes are taken as UTC."""
    if t.tzinfo is None:
        return t.replace(tzinfo=timezone.utc)
    return t.astimezone(timezone.utc)


# --- Kepler's equation -----------------------------------------------------

def solve_kepler(mean_anomaly, eccentricity):
    """Solve M = E - e sin E for the eccentric anomaly E (radians).

    Works elementwise on scalars or numpy arrays. The mean anomaly is
    wrapped to [-pi, pi) for the Newton iteration and the same number of
    revolutions added back, so E stays within pi of M.
    """
    M = np.asarray(mean_anomaly, dtype=float)
    e = np.asarray(eccentricity, dtype=float)
    if np.any((e < 0.0) | (e >= 1.0)):
        raise ValueError("eccentricity must lie in [0, 1)")
    revs = np.floor((M + math.pi) / TWO_PI)
    m = M - revs * TWO_PI
    # the high-eccentricity start avoids Newton overshoot near perigee
    E = np.where(e < 0.8, m + e * np.sin(m), math.pi * np.sign(m))
    E = np.where(m == 0.0, 0.0, E)
    for _ in range(KEPLER_MAX_ITER):
        f = E - e * np.sin(E) - m
        E = E - f / (1.0 - e * np.cos(E))
        resid = E - e * np.sin(E) - m
        if np.all(np.abs(resid) < KEPLER_TOL * 0.01):
            break
    else:
        if np.any(np.abs(resid) >= KEPLER_TOL):
            raise NonConvergence("Kepler iteration did not converge")
    E = E + revs * TWO_PI
    return float(E) if E.ndim == 0 else E


# --- propagation -----------------------------------------------------------

def _rotation_pqw_to_eci(raan, incl, argp):
    """Columns are the perifocal P and Q axes in ECI (vectorized, radians)."""
    co, so = np.cos(raan), np.sin(raan)
    ci, si = np.cos(incl), np.sin(incl)
    cw, sw = np.cos(argp), np.sin(argp)
    P = np.stack([co * cw - so * sw * ci, so * cw + co * sw * ci, sw * si], axis=-1)
    Q = np.stack([-co * sw - so * cw * ci, -so * sw + co * cw * ci, cw * si], axis=-1)
    return P, Q


def kepler_states(a, e, incl, raan, argp, mean_anomaly):
    """Inertial position/velocity for arrays of classical elements (radians)."""
    a = np.asarray(a, dtype=float)
    e = np.asarray(e, dtype=float)
    E = np.asarray(solve_kepler(mean_anomaly, e))
    cosE, sinE = np.cos(E), np.sin(E)
    root = np.sqrt(1.0 - e * e)
    r = a * (1.0 - e * cosE)
    x_p = a * (cosE - e)
    y_p = a * root * sinE
    vfac = np.sqrt(MU_EARTH * a) / r
    vx_p = -vfac * sinE
    vy_p = vfac * root * cosE
    P, Q = _rotation_pqw_to_eci(raan, incl, argp)
    pos = x_p[..., None] * P + y_p[..., None] * Q
    vel = vx_p[..., None] * P + vy_p[..., None] * Q
    return pos, vel


def _elements_at(elements_list, t: datetime, j2: bool):
    t = as_utc(t)
    a, e, inc, raan, argp, M = (np.empty(len(elements_list)) for _ in range(6))
    for k, el in enumerate(elements_list):
        dt = (t - as_utc(el.epoch_utc)).total_seconds()
        if abs(dt) > TLE_GUARD_DAYS * SECONDS_PER_DAY:
            raise EpochTooFar(
                f"{el.name}: {dt / SECONDS_PER_DAY:.2f} days from element epoch "
                f"(guard is {TLE_GUARD_DAYS} days)")
        n = el.mean_motion_rad_s
        a[k] = el.semi_major_axis
        e[k] = el.eccentricity
        inc[k] = math.radians(el.inclination)
        raan[k] = math.radians(el.raan)
        argp[k] = math.radians(el.arg_perigee)
        M[k] = math.radians(el.mean_anomaly) + n * dt
        if j2:
            p = a[k] * (1.0 - e[k] ** 2)
            k2 = 1.5 * n * J2 * (WGS84_A / p) ** 2
            raan[k] += -k2 * math.cos(inc[k]) * dt
            argp[k] += 0.5 * k2 * (5.0 * math.cos(inc[k]) ** 2 - 1.0) * dt
    return a, e, inc, raan, argp, M


def propagate(elements, t: datetime, j2: bool = False) -> StateVector:
    """Two-body ECI state of one satellite at time ``t``.

    Raises EpochTooFar when ``t`` is more than 7 days from the element epoch.
    """
    pos, vel = kepler_states(*_elements_at([elements], t, j2))
    return StateVector(as_utc(t), Frame.ECI, pos[0], vel[0])


def propagate_catalog(elements_list, t: datetime, j2: bool = False):
    """Vectorized :func:`propagate`: returns (N, 3) ECI positions and velocities."""
    if not elements_list:
        return np.zeros((0, 3)), np.zeros((0, 3))
    return kepler_states(*_elements_at(list(elements_list), t, j2))


# --- Earth rotation --------------------------------------------------------

def gmst(t: datetime) -> float:
    """Greenwich mean sidereal angle (rad), IAU 1982, UT1 = UTC."""
    days = (as_utc(t).timestamp() - _J2000_UNIX) / SECONDS_PER_DAY
    T = days / 36525.0
    seconds = (67310.54841 + (876600.0 * 3600.0 + 8640184.812866) * T
               + 0.093104 * T * T - 6.2e-6 * T ** 3)
    return (seconds % SECONDS_PER_DAY) * TWO_PI / SECONDS_PER_DAY


def _rot_z(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


_OMEGA = np.array([0.0, 0.0, OMEGA_EARTH])


def eci_to_ecef_arrays(pos, vel, t: datetime):
    """Rotate (N, 3) ECI position/velocity arrays into ECEF."""
    R = _rot_z(gmst(t))
    p = np.asarray(pos, dtype=float) @ R.T
    v = np.asarray(vel, dtype=float) @ R.T - np.cross(_OMEGA, p)
    return p, v


def eci_to_ecef(state: StateVector, t: datetime | None = None) -> StateVector:
    if state.frame is not Frame.ECI:
        raise FrameMismatch(f"expected an ECI state, got {state.frame.value}")
    t = state.epoch_utc if t is None else as_utc(t)
    p, v = eci_to_ecef_arrays(state.position, state.velocity, t)
    return StateVector(t, Frame.ECEF, p, v)


def ecef_to_eci(state: StateVector, t: datetime | None = None) -> StateVector:
    if state.frame is not Frame.ECEF:
        raise FrameMismatch(f"expected an ECEF state, got {state.frame.value}")
    t = state.epoch_utc if t is None else as_utc(t)
    R = _rot_z(gmst(t))
    v_inertial_rot = state.velocity + np.cross(_OMEGA, state.position)
    return StateVector(t, Frame.ECI, R.T @ state.position, R.T @ v_inertial_rot)


# --- geodetic --------------------------------------------------------------

def geodetic_to_ecef(g: GeodeticPosition) -> np.ndarray:
    lat, lon = math.radians(g.latitude), math.radians(g.longitude)
    sl, cl = math.sin(lat), math.cos(lat)
    N = WGS84_A / math.sqrt(1.0 - WGS84_E2 * sl * sl)
    return np.array([
        (N + g.height) * cl * math.cos(lon),
        (N + g.height) * cl * math.sin(lon),
        (N * (1.0 - WGS84_E2) + g.height) * sl,
    ])


def ecef_to_geodetic(r) -> GeodeticPosition:
    """Inverse WGS-84 mapping by Bowring's iteration (converged to < 1e-12 rad)."""
    x, y, z = (float(c) for c in np.asarray(r, dtype=float).reshape(3))
    p = math.hypot(x, y)
    if math.hypot(p, z) < 1.0:
        raise DegenerateInput("ECEF vector within 1 m of the Earth's center")
    lon = math.degrees(math.atan2(y, x))
    if lon >= 180.0:
        lon -= 360.0
    beta = math.atan2(z, (1.0 - WGS84_F) * p)
    lat = 0.0
    for _ in range(10):
        sb, cb = math.sin(beta), math.cos(beta)
        new_lat = math.atan2(z + WGS84_EP2 * WGS84_B * sb ** 3,
                             p - WGS84_E2 * WGS84_A * cb ** 3)
        done = abs(new_lat - lat) < 1e-12
        lat = new_lat
        if done:
            break
        beta = math.atan2((1.0 - WGS84_F) * math.sin(lat), math.cos(lat))
    sl, cl = math.sin(lat), math.cos(lat)
    h = p * cl + z * sl - WGS84_A * math.sqrt(1.0 - WGS84_E2 * sl * sl)
    return GeodeticPosition(max(-90.0, min(90.0, math.degrees(lat))), lon, h)


def enu_basis(g: GeodeticPosition) -> np.ndarray:
    """Rows are the local east, north and up unit vectors in ECEF."""
    lat, lon = math.radians(g.latitude), math.radians(g.longitude)
    sl, cl = math.sin(lat), math.cos(lat)
    so, co = math.sin(lon), math.cos(lon)
    return np.array([
        [-so, co, 0.0],
        [-sl * co, -sl * so, cl],
        [cl * co, cl * so, sl],
    ])
