"""Look angles, elevation masking and dilution of precision."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CoincidentPoints, InsufficientSats, SingularGeometry
from .orbit import ecef_to_geodetic, enu_basis

SINGULAR_COND = 1e12


@dataclass(frozen=True)
class TopocentricView:
    sat_id: int
    azimuth: float  # deg, [0, 360)
    elevation: float  # deg
    slant_range: float  # m
    range_rate: float = 0.0  # m/s, positive when receding


@dataclass(frozen=True)
class DopFamily:
    gdop: float
    pdop: float
    hdop: float
    vdop: float
    tdop: float


def topocentric(user_ecef, sat_ecef, sat_vel=None, sat_id: int = 0,
                user_vel=None) -> TopocentricView:
    """Azimuth/elevation/range of a satellite seen from a user, both ECEF.

    The ENU frame is taken at the user's geodetic normal.
    """
    user = np.asarray(user_ecef, dtype=float)
    los = np.asarray(sat_ecef, dtype=float) - user
    rng = float(np.linalg.norm(los))
    if rng < 1.0:
        raise CoincidentPoints("satellite and user closer than 1 m")
    u = los / rng
    e, n, up = enu_basis(ecef_to_geodetic(user)) @ u
    az = math.degrees(math.atan2(e, n)) % 360.0
    el = math.degrees(math.asin(max(-1.0, min(1.0, up))))
    rel_v = np.zeros(3)
    if sat_vel is not None:
        rel_v = rel_v + np.asarray(sat_vel, dtype=float)
    if user_vel is not None:
        rel_v = rel_v - np.asarray(user_vel, dtype=float)
    return TopocentricView(sat_id, az, el, rng, float(rel_v @ u))


def look_angles(user_ecef, sat_positions, sat_velocities=None, sat_ids=None):
    """Vectorized :func:`topocentric` over an (N, 3) array of satellites."""
    user = np.asarray(user_ecef, dtype=float)
    sats = np.atleast_2d(np.asarray(sat_positions, dtype=float))
    los = sats - user
    rng = np.linalg.norm(los, axis=1)
    if np.any(rng < 1.0):
        raise CoincidentPoints("satellite and user closer than 1 m")
    u = los / rng[:, None]
    enu = u @ enu_basis(ecef_to_geodetic(user)).T
    az = np.degrees(np.arctan2(enu[:, 0], enu[:, 1])) % 360.0
    el = np.degrees(np.arcsin(np.clip(enu[:, 2], -1.0, 1.0)))
    if sat_velocities is None:
        rr = np.zeros(len(sats))
    else:
        rr = np.einsum("ij,ij->i", np.asarray(sat_velocities, dtype=float), u)
    ids = range(len(sats)) if sat_ids is None else sat_ids
    return [TopocentricView(int(i), float(a), float(b), float(c), float(d))
            for i, a, b, c, d in zip(ids, az, el, rng, rr)]


def visible_sats(views, mask: float):
    """Views at or above the elevation mask (deg, clamped to [0, 90])."""
    mask = min(90.0, max(0.0, mask))
    return [v for v in views if v.elevation >= mask]


def enu_unit_vectors(views) -> np.ndarray:
    az = np.radians([v.azimuth for v in views])
    el = np.radians([v.elevation for v in views])
    return np.column_stack([np.cos(el) * np.sin(az), np.cos(el) * np.cos(az), np.sin(el)])


def dop_from_design(G: np.ndarray) -> DopFamily:
    """DOP family from an (N, 4) design matrix with columns E, N, U, clock."""
    G = np.asarray(G, dtype=float)
    if G.shape[0] < 4:
        raise InsufficientSats(f"need at least 4 satellites, got {G.shape[0]}")
    normal = G.T @ G
    if np.linalg.cond(normal) > SINGULAR_COND:
        raise SingularGeometry("geometry matrix is rank deficient")
    Q = np.linalg.inv(normal)
    d = np.diag(Q)
    return DopFamily(
        gdop=float(math.sqrt(d.sum())),
        pdop=float(math.sqrt(d[:3].sum())),
        hdop=float(math.sqrt(d[0] + d[1])),
        vdop=float(math.sqrt(d[2])),
        tdop=float(math.sqrt(d[3])),
    )


def dop(views) -> DopFamily:
    """GDOP/PDOP/HDOP/VDOP/TDOP in the local ENU frame.

    Raises InsufficientSats below 4 views and SingularGeometry when the
    normal matrix condition number exceeds 1e12.
    """
    views = list(views)
    if len(views) < 4:
        raise InsufficientSats(f"need at least 4 satellites, got {len(views)}")
    u = enu_unit_vectors(views)
    return dop_from_design(np.column_stack([-u, np.ones(len(views))]))
