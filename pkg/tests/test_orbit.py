import math
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from inac_sim.constants import MU_EARTH, SIDEREAL_DAY, WGS84_A, WGS84_B
from inac_sim.errors import DegenerateInput, EpochTooFar, FrameMismatch
from inac_sim.orbit import (Frame, GeodeticPosition, StateVector, ecef_to_eci,
                            ecef_to_geodetic, eci_to_ecef, enu_basis,
                            geodetic_to_ecef, gmst, kepler_states, propagate,
                            propagate_catalog, solve_kepler)
from inac_sim.tle import TwoLineElements

EPOCH = datetime(2025, 3, 26, 8, 0, tzinfo=timezone.utc)


def elements(**kw):
    base = dict(name="T", catalog_number=1, epoch_utc=EPOCH, inclination=53.0, raan=40.0,
                eccentricity=0.001, arg_perigee=10.0, mean_anomaly=20.0, mean_motion=15.05)
    base.update(kw)
    return TwoLineElements(**base)


def test_kepler_worked_example():
    assert solve_kepler(math.pi / 2, 0.1) == pytest.approx(1.6703016694822845, abs=1e-14)


def test_kepler_circular_is_identity():
    M = np.linspace(-10, 10, 101)
    assert np.allclose(solve_kepler(M, 0.0), M, atol=1e-15)


def test_kepler_rejects_hyperbolic():
    with pytest.raises(ValueError):
        solve_kepler(1.0, 1.0)


@settings(max_examples=300, deadline=None)
@given(st.floats(-50, 50), st.floats(0, 0.99))
def test_kepler_residual_property(M, e):
    E = solve_kepler(M, e)
    assert abs(E - e * math.sin(E) - M) < 1e-12
    assert abs(E - M) <= e + 1e-12  # |E - M| = e |sin E|


def test_kepler_vectorized_large_sample():
    rng = np.random.default_rng(0)
    M = rng.uniform(-2 * math.pi, 2 * math.pi, 100_000)
    e = rng.uniform(0, 0.99, 100_000)
    E = solve_kepler(M, e)
    assert np.max(np.abs(E - e * np.sin(E) - M)) < 1e-12


def test_circular_orbit_radius_and_speed():
    rec = elements(eccentricity=0.0)
    sv = propagate(rec, EPOCH + timedelta(minutes=17))
    a = rec.semi_major_axis
    assert np.linalg.norm(sv.position) == pytest.approx(a, rel=1e-12)
    assert np.linalg.norm(sv.velocity) == pytest.approx(math.sqrt(MU_EARTH / a), rel=1e-12)
    assert abs(sv.position @ sv.velocity) < 1e-3 * a


def test_energy_and_momentum_conserved():
    rec = elements(eccentricity=0.3, mean_motion=6.0)
    def invariants(t):
        sv = propagate(rec, t)
        r, v = sv.position, sv.velocity
        return v @ v / 2 - MU_EARTH / np.linalg.norm(r), np.cross(r, v)
    e0, h0 = invariants(EPOCH)
    for hours in (1, 7, 30):
        e1, h1 = invariants(EPOCH + timedelta(hours=hours))
        assert e1 == pytest.approx(e0, rel=1e-10)
        assert np.allclose(h1, h0, rtol=1e-10)
    assert e0 == pytest.approx(-MU_EARTH / (2 * rec.semi_major_axis), rel=1e-10)


def test_one_period_returns_to_start():
    rec = elements(eccentricity=0.01)
    a = propagate(rec, EPOCH).position
    b = propagate(rec, EPOCH + timedelta(seconds=rec.period)).position
    # timedelta keeps microseconds: ~4 mm of along-track slack at 7.6 km/s
    assert np.linalg.norm(a - b) < 1e-2


def test_epoch_guard():
    rec = elements()
    propagate(rec, EPOCH + timedelta(days=6.9))
    with pytest.raises(EpochTooFar):
        propagate(rec, EPOCH - timedelta(days=7.1))


def test_catalog_matches_single_propagation():
    recs = [elements(catalog_number=i, raan=10.0 * i, mean_anomaly=33.0 * i) for i in range(5)]
    t = EPOCH + timedelta(minutes=40)
    pos, vel = propagate_catalog(recs, t, j2=True)
    for i, rec in enumerate(recs):
        sv = propagate(rec, t, j2=True)
        assert np.allclose(pos[i], sv.position) and np.allclose(vel[i], sv.velocity)


def test_j2_regresses_node_of_prograde_orbit():
    rec = elements(eccentricity=0.0, mean_anomaly=0.0, arg_perigee=0.0)
    t = EPOCH + timedelta(days=1)
    h_plain = np.cross(*[propagate(rec, t).position, propagate(rec, t).velocity])
    sv = propagate(rec, t, j2=True)
    h_j2 = np.cross(sv.position, sv.velocity)
    node = lambda h: math.degrees(math.atan2(h[0], -h[1]))
    # about -4.5 deg/day for a 550 km, 53 deg orbit
    drift = (node(h_j2) - node(h_plain) + 180) % 360 - 180
    assert -5.0 < drift < -4.0


def test_gmst_at_j2000():
    t = datetime(2000, 1, 1, 12, tzinfo=timezone.utc)
    assert math.degrees(gmst(t)) == pytest.approx(280.46061837, abs=1e-6)


def test_gmst_advances_one_turn_per_sidereal_day():
    t = datetime(2024, 6, 1, tzinfo=timezone.utc)
    d = gmst(t + timedelta(seconds=SIDEREAL_DAY)) - gmst(t)
    assert abs((d + math.pi) % (2 * math.pi) - math.pi) < 1e-6


def test_geostationary_is_still_in_ecef():
    rec = elements(inclination=0.0, eccentricity=0.0, raan=0.0, arg_perigee=0.0,
                   mean_motion=86400.0 / SIDEREAL_DAY)
    sv = eci_to_ecef(propagate(rec, EPOCH + timedelta(hours=3)))
    assert sv.frame is Frame.ECEF
    assert np.linalg.norm(sv.velocity) < 0.5
    assert np.linalg.norm(sv.position) == pytest.approx(42_164_170, rel=1e-4)


def test_eci_ecef_round_trip_and_frame_checks():
    sv = propagate(elements(), EPOCH)
    back = ecef_to_eci(eci_to_ecef(sv))
    assert np.allclose(back.position, sv.position, atol=1e-6)
    assert np.allclose(back.velocity, sv.velocity, atol=1e-9)
    with pytest.raises(FrameMismatch):
        ecef_to_eci(sv)
    with pytest.raises(FrameMismatch):
        eci_to_ecef(eci_to_ecef(sv))


def test_geodetic_reference_points():
    assert np.allclose(geodetic_to_ecef(GeodeticPosition(0, 0, 0)), [WGS84_A, 0, 0], atol=1e-9)
    assert np.allclose(geodetic_to_ecef(GeodeticPosition(90, 0, 0)), [0, 0, WGS84_B], atol=1e-6)
    assert np.allclose(geodetic_to_ecef(GeodeticPosition(0, 90, 100)), [0, WGS84_A + 100, 0], atol=1e-6)
    g = ecef_to_geodetic([0, 0, -WGS84_B - 5])
    assert g.latitude == pytest.approx(-90) and g.height == pytest.approx(5, abs=1e-6)


def test_geodetic_center_is_degenerate():
    with pytest.raises(DegenerateInput):
        ecef_to_geodetic([0.1, 0.0, 0.0])


def test_geodetic_validation():
    with pytest.raises(ValueError):
        GeodeticPosition(91, 0)
    with pytest.raises(ValueError):
        GeodeticPosition(0, 180)


def test_geodetic_round_trip_1000_points():
    rng = np.random.default_rng(3)
    worst = 0.0
    for lat, lon, h in zip(rng.uniform(-90, 90, 1000), rng.uniform(-180, 180, 1000),
                           rng.uniform(-500, 2e6, 1000)):
        r = geodetic_to_ecef(GeodeticPosition(lat, lon, h))
        r2 = geodetic_to_ecef(ecef_to_geodetic(r))
        worst = max(worst, float(np.linalg.norm(r - r2)))
    assert worst < 1e-6


@settings(max_examples=200, deadline=None)
@given(st.floats(-89.999, 89.999), st.floats(-179.999, 179.999), st.floats(-1000, 3.6e7))
def test_geodetic_round_trip_property(lat, lon, h):
    g = ecef_to_geodetic(geodetic_to_ecef(GeodeticPosition(lat, lon, h)))
    assert g.latitude == pytest.approx(lat, abs=1e-9)
    assert (g.longitude - lon + 180) % 360 - 180 == pytest.approx(0, abs=1e-9)
    assert g.height == pytest.approx(h, abs=1e-6)


def test_enu_basis_is_orthonormal_and_up_is_normal():
    g = GeodeticPosition(39.9523, 116.3421, 50)
    B = enu_basis(g)
    assert np.allclose(B @ B.T, np.eye(3), atol=1e-14)
    up_point = geodetic_to_ecef(GeodeticPosition(g.latitude, g.longitude, g.height + 1.0))
    assert np.allclose(up_point - geodetic_to_ecef(g), B[2], atol=1e-8)


def test_state_vector_coerces_shape():
    sv = StateVector(EPOCH, Frame.ECI, [1, 2, 3], [[4], [5], [6]])
    assert sv.position.shape == (3,) and sv.velocity.dtype == float


def test_kepler_states_perigee():
    pos, vel = kepler_states(7e6, 0.1, 0.0, 0.0, 0.0, 0.0)
    assert np.allclose(pos, [7e6 * 0.9, 0, 0])
    assert vel[1] == pytest.approx(math.sqrt(MU_EARTH / 7e6 * 1.1 / 0.9))
