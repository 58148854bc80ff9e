"""
Synthetic Walker-delta shells written as ordinary TLE records.

Useful when no downloaded catalog is at hand: the output goes through the
same parser and propagator as a real one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timezone

from .constants import MU_EARTH, SECONDS_PER_DAY, WGS84_A
from .tle import TwoLineElements, format_tle_file

DEFAULT_EPOCH = datetime(2025, 3, 26, 8, 0, tzinfo=timezone.utc)


@dataclass(frozen=True)
class WalkerShell:
    """Walker delta pattern i:T/P/F at a circular altitude."""
    name: str
    altitude_m: float
    inclination_deg: float
    planes: int
    sats_per_plane: int
    phasing: int = 1

    @property
    def total(self) -> int:
        return self.planes * self.sats_per_plane

    @property
    def mean_motion(self) -> float:
        """rev/day of a circular two-body orbit at this altitude."""
        a = WGS84_A + self.altitude_m
        return math.sqrt(MU_EARTH / a ** 3) * SECONDS_PER_DAY / (2.0 * math.pi)


# first-generation style layouts: several shells for the denser constellation
STARLINK_LIKE = (
    WalkerShell("STARLINK-LIKE A", 550e3, 53.0, 72, 22, 17),
    WalkerShell("STARLINK-LIKE B", 540e3, 53.2, 72, 22, 11),
    WalkerShell("STARLINK-LIKE C", 570e3, 70.0, 36, 20, 5),
    WalkerShell("STARLINK-LIKE D", 560e3, 97.6, 6, 58, 1),
)
ONEWEB_LIKE = (WalkerShell("ONEWEB-LIKE", 1200e3, 87.9, 18, 36, 1),)


def walker_elements(shell: WalkerShell, epoch: datetime = DEFAULT_EPOCH,
                    first_catalog: int = 70001) -> list[TwoLineElements]:
    out = []
    n = shell.mean_motion
    for p in range(shell.planes):
        raan = 360.0 * p / shell.planes
        for s in range(shell.sats_per_plane):
            m = 360.0 * s / shell.sats_per_plane + 360.0 * shell.phasing * p / shell.total
            idx = p * shell.sats_per_plane + s
            out.append(TwoLineElements(
                name=f"{shell.name} {idx + 1}",
                catalog_number=first_catalog + idx,
                epoch_utc=epoch,
                inclination=shell.inclination_deg,
                raan=raan % 360.0,
                eccentricity=0.0001,
                arg_perigee=0.0,
                mean_anomaly=m % 360.0,
                mean_motion=n,
                intl_designator="25001A",
                element_set_number=999,
            ))
    return out


def walker_catalog_text(shells=STARLINK_LIKE + ONEWEB_LIKE, epoch: datetime = DEFAULT_EPOCH) -> str:
    """Three-line TLE text for the given shells, catalog numbers contiguous."""
    records, first = [], 70001
    for shell in shells:
        records += walker_elements(shell, epoch, first)
        first += shell.total
    return format_tle_file(records)
