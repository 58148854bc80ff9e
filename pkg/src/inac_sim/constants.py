"""Physical and model constants (SI units)."""
import math

SPEED_OF_LIGHT = 299_792_458.0  # m/s
BOLTZMANN = 1.380649e-23  # J/K

# WGS-84
MU_EARTH = 3.986004418e14  # m^3/s^2
WGS84_A = 6_378_137.0  # m
WGS84_F = 1.0 / 298.257223563
WGS84_B = WGS84_A * (1.0 - WGS84_F)
WGS84_E2 = WGS84_F * (2.0 - WGS84_F)
WGS84_EP2 = WGS84_E2 / (1.0 - WGS84_E2)
OMEGA_EARTH = 7.292115e-5  # rad/s
J2 = 1.08262668e-3

SECONDS_PER_DAY = 86_400.0
SIDEREAL_DAY = 86_164.0905  # s
TWO_PI = 2.0 * math.pi

# LEO band used for orbit classification (km above the surface)
LEO_ALTITUDE_KM = (160.0, 2000.0)
MEO_ALTITUDE_KM = (2000.0, 35_786.0)
GEO_ALTITUDE_KM = 35_786.0

GPS_L1_HZ = 1.57542e9
KU_DOWNLINK_HZ = 12.0e9

# TLE propagation accuracy guard
TLE_GUARD_DAYS = 7.0


def orbit_class(altitude_km):
    """Return 'LEO', 'MEO', 'GEO' or 'HEO' for a circular-orbit altitude."""
    if LEO_ALTITUDE_KM[0] <= altitude_km < LEO_ALTITUDE_KM[1]:
        return "LEO"
    if MEO_ALTITUDE_KM[0] <= altitude_km < MEO_ALTITUDE_KM[1]:
        return "MEO"
    if abs(altitude_km - GEO_ALTITUDE_KM) < 100.0:
        return "GEO"
    return "HEO" if altitude_km > GEO_ALTITUDE_KM else "sub-LEO"
