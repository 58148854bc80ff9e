"""
Synthetic observables: pseudoranges, Doppler shifts and FSPL link budgets.

Every random draw comes from an explicit ``numpy.random.Generator``; nothing
here touches global RNG state, so a fixed seed reproduces observables bit
for bit.  Clock bias is carried in meters (c * dt).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime

import numpy as np

from .constants import BOLTZMANN, SPEED_OF_LIGHT
from .errors import NonPositiveInput
from .orbit import Frame, StateVector


@dataclass(frozen=True)
class PseudorangeObs:
    sat_id: int
    pseudorange: float  # m
    sigma: float  # m
    epoch_utc: datetime | None = None


@dataclass(frozen=True)
class DopplerObs:
    sat_id: int
    doppler_shift: float  # Hz
    carrier_freq: float  # Hz
    sigma: float  # Hz


@dataclass(frozen=True)
class LinkBudget:
    fspl_db: float
    received_snr_db: float
    distance: float  # m
    frequency: float  # Hz


def synth_pseudorange(sat_pos, user_truth, clock_bias_m, sigma, rng,
                      sat_id: int = 0, epoch_utc=None) -> PseudorangeObs:
    """Geometric range plus receiver clock bias plus N(0, sigma^2) noise.

    One standard-normal draw is consumed even when ``sigma`` is zero, so the
    random stream does not depend on the noise level.
    """
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    rho = float(np.linalg.norm(np.asarray(sat_pos, float) - np.asarray(user_truth, float)))
    noise = sigma * rng.standard_normal()
    return PseudorangeObs(sat_id, rho + clock_bias_m + noise, float(sigma), epoch_utc)


def synth_pseudoranges(sat_positions, user_truth, clock_bias_m, sigma, rng,
                       sat_ids=None, epoch_utc=None) -> list[PseudorangeObs]:
    """Vectorized :func:`synth_pseudorange` over an (N, 3) satellite array."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    sats = np.atleast_2d(np.asarray(sat_positions, dtype=float))
    rho = np.linalg.norm(sats - np.asarray(user_truth, float), axis=1)
    values = rho + clock_bias_m + sigma * rng.standard_normal(len(sats))
    ids = range(len(sats)) if sat_ids is None else sat_ids
    return [PseudorangeObs(int(i), float(v), float(sigma), epoch_utc)
            for i, v in zip(ids, values)]


def doppler_shift(sat_vel, sat_pos, user_pos, carrier_freq):
    """Noise-free shift -(v_sat . u_los) f / c, u_los pointing user to satellite."""
    los = np.asarray(sat_pos, float) - np.asarray(user_pos, float)
    u = los / np.linalg.norm(los, axis=-1, keepdims=True)
    radial = np.sum(np.asarray(sat_vel, float) * u, axis=-1)
    return -radial / SPEED_OF_LIGHT * carrier_freq


def synth_doppler(sat_state: StateVector, user_pos, carrier_freq, sigma, rng,
                  sat_id: int = 0, freq_bias_hz: float = 0.0) -> DopplerObs:
    """Doppler observable for a static ECEF user.

    ``freq_bias_hz`` adds a receiver oscillator offset common to all
    satellites.
    """
    if carrier_freq <= 0:
        raise NonPositiveInput("carrier frequency must be positive")
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sat_state.frame is not Frame.ECEF:
        # a static user is only static in the Earth-fixed frame
        raise ValueError("synth_doppler expects an ECEF satellite state")
    fd = float(doppler_shift(sat_state.velocity, sat_state.position, user_pos, carrier_freq))
    fd += freq_bias_hz + sigma * rng.standard_normal()
    return DopplerObs(sat_id, fd, float(carrier_freq), float(sigma))


def fspl_db(distance, frequency):
    """Free-space path loss 20 log10(4 pi d f / c) in dB."""
    d = np.asarray(distance, dtype=float)
    f = np.asarray(frequency, dtype=float)
    if np.any(d <= 0) or np.any(f <= 0):
        raise NonPositiveInput("distance and frequency must be positive")
    out = 20.0 * np.log10(4.0 * math.pi * d * f / SPEED_OF_LIGHT)
    return float(out) if out.ndim == 0 else out


def received_snr_db(eirp_dbw, rx_gain_db, distance, frequency, noise_power_dbw):
    """EIRP + receive gain - FSPL - noise power, all in dB."""
    return eirp_dbw + rx_gain_db - fspl_db(distance, frequency) - noise_power_dbw


def link_budget(eirp_dbw, rx_gain_db, distance, frequency, noise_power_dbw) -> LinkBudget:
    loss = fspl_db(distance, frequency)
    return LinkBudget(loss, eirp_dbw + rx_gain_db - loss - noise_power_dbw,
                      float(distance), float(frequency))


def thermal_noise_dbw(bandwidth_hz, temperature_k=290.0):
    if bandwidth_hz <= 0 or temperature_k <= 0:
        raise NonPositiveInput("bandwidth and temperature must be positive")
    return 10.0 * math.log10(BOLTZMANN * temperature_k * bandwidth_hz)


def watts_to_dbw(p):
    if p <= 0:
        raise NonPositiveInput("power must be positive")
    return 10.0 * math.log10(p)
