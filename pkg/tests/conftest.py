import math
from pathlib import Path

import numpy as np
import pytest

from inac_sim.orbit import GeodeticPosition, enu_basis, geodetic_to_ecef

DATA = Path(__file__).parent / "data"

USER_SITE = GeodeticPosition(39.9523, 116.3421, 50.0)


def sky_positions(user_geo, az_el_deg, altitude=550e3):
    """ECEF positions of satellites at the given (azimuth, elevation) pairs
    as seen from ``user_geo``, placed on a sphere of radius R + altitude."""
    user = geodetic_to_ecef(user_geo)
    E = enu_basis(user_geo)  # rows E, N, U in ECEF
    r_sat = 6_371_000.0 + altitude
    out = []
    for az, el in az_el_deg:
        az, el = math.radians(az), math.radians(el)
        d = np.array([math.cos(el) * math.sin(az), math.cos(el) * math.cos(az), math.sin(el)])
        u = E.T @ d
        # slant range s with |user + s u| = r_sat
        b = user @ u
        s = -b + math.sqrt(b * b - (user @ user - r_sat ** 2))
        out.append(user + s * u)
    return user, np.array(out)


EIGHT_SAT_SKY = [(0, 80), (45, 30), (100, 55), (160, 20), (200, 40), (250, 65), (300, 25), (340, 45)]


@pytest.fixture
def eight_sats():
    return sky_positions(USER_SITE, EIGHT_SAT_SKY)


@pytest.fixture
def real_tle_text():
    return (DATA / "real_sample.tle").read_text()


def doppler_states(seed=3, count=8, min_elevation=15.0):
    """ECEF states of ``count`` LEO satellites above the mask at the user
    site, each moving at 7.6 km/s along a random direction in its
    horizontal plane."""
    from inac_sim.geometry import topocentric
    from inac_sim.orbit import Frame, StateVector

    user = geodetic_to_ecef(USER_SITE)
    rng = np.random.default_rng(seed)
    states = []
    while len(states) < count:
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        s = d * (6_371e3 + 550e3)
        if topocentric(user, s).elevation < min_elevation:
            continue
        h = np.cross(d, rng.normal(size=3))
        h /= np.linalg.norm(h)
        states.append(StateVector(None, Frame.ECEF, s, 7600.0 * h))
    return user, states


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    if module and module.REPORT:
        terminalreporter.section("acceptance criteria")
        for line in module.REPORT:
            terminalreporter.write_line(line)
