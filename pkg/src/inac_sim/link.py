"""
Superposition-coded navigation/communication downlink with an RIS hop.

The transmitted INAC signal is ``omega_n * s_n + omega_c * s_c`` with
amplitude weights satisfying ``omega_n**2 + omega_c**2 == 1``.  Rates follow
the SIC rate expressions: the signal decoded first sees the other one as
interference; the signal decoded after cancellation sees only noise.

Channel naming: ``h_u`` is the RIS->user vector and ``h_s`` the
satellite->RIS vector (the second channel symbol in the rate formula is read
as the satellite->RIS leg).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, NonPositiveNoise


class ServiceMode(str, enum.Enum):
    """NO: navigation decoded interference-free; CO: communication is."""
    NO = "NO"
    CO = "CO"


@dataclass(frozen=True)
class PowerSplit:
    """Amplitude weights, normalized on construction to unit total power."""
    omega_n: float
    omega_c: float

    def __post_init__(self):
        if not (math.isfinite(self.omega_n) and math.isfinite(self.omega_c)):
            raise ValueError("allocation factors must be finite")
        if self.omega_n < 0 or self.omega_c < 0:
            raise ValueError("allocation factors must be non-negative")
        top = max(self.omega_n, self.omega_c)
        if top == 0:
            raise ValueError("allocation factors cannot both be zero")
        # scale first so subnormal inputs normalize as precisely as normal ones
        n, c = self.omega_n / top, self.omega_c / top
        norm = math.hypot(n, c)
        object.__setattr__(self, "omega_n", n / norm)
        object.__setattr__(self, "omega_c", c / norm)

    @classmethod
    def from_comm_amplitude(cls, omega_c: float) -> "PowerSplit":
        if not 0.0 <= omega_c <= 1.0:
            raise ValueError("omega_c must lie in [0, 1]")
        return cls(math.sqrt(max(0.0, 1.0 - omega_c * omega_c)), omega_c)

    @classmethod
    def from_comm_power(cls, omega_c_sq: float) -> "PowerSplit":
        if not 0.0 <= omega_c_sq <= 1.0:
            raise ValueError("omega_c^2 must lie in [0, 1]")
        return cls(math.sqrt(1.0 - omega_c_sq), math.sqrt(omega_c_sq))


@dataclass(frozen=True, eq=False)
class RisPanel:
    phases: np.ndarray  # rad
    amplitudes: np.ndarray  # 1 for a passive element, > 1 when active
    position: np.ndarray | None = None

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=float).ravel()
        amps = np.broadcast_to(np.asarray(self.amplitudes, dtype=float), phases.shape).copy()
        if phases.size < 1:
            raise ValueError("a panel needs at least one element")
        if not np.all(np.isfinite(phases)):
            raise ValueError("phases must be finite")
        if np.any(amps < 0):
            raise ValueError("amplitudes must be non-negative")
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def passive(cls, n_elements: int, phases=None, position=None) -> "RisPanel":
        phases = np.zeros(n_elements) if phases is None else phases
        return cls(phases, np.ones(n_elements), position)

    @property
    def n_elements(self) -> int:
        return self.phases.size

    @property
    def is_passive(self) -> bool:
        return bool(np.all(self.amplitudes == 1.0))

    @property
    def reflection(self) -> np.ndarray:
        """Diagonal of the reflect matrix, a_n exp(j theta_n)."""
        return self.amplitudes * np.exp(1j * self.phases)


@dataclass(frozen=True, eq=False)
class CascadedChannel:
    h_u: np.ndarray
    h_s: np.ndarray
    composite_gain: float


def compose_inac_samples(split: PowerSplit, s_n, s_c) -> np.ndarray:
    s_n = np.asarray(s_n)
    s_c = np.asarray(s_c)
    if s_n.shape != s_c.shape:
        raise LengthMismatch(f"sample lengths differ: {s_n.shape} vs {s_c.shape}")
    return split.omega_n * s_n + split.omega_c * s_c


def _pair(h_u, h_s):
    h_u = np.asarray(h_u, dtype=complex)
    h_s = np.asarray(h_s, dtype=complex)
    if h_u.shape != h_s.shape:
        raise LengthMismatch(f"channel lengths differ: {h_u.shape} vs {h_s.shape}")
    return h_u, h_s


def cascaded_gain(h_u, panel: RisPanel, h_s) -> float:
    """|sum_n a_n exp(j theta_n) h_u[n] h_s[n]|^2."""
    h_u, h_s = _pair(h_u, h_s)
    if h_u.shape[-1] != panel.n_elements:
        raise LengthMismatch("panel size does not match the channel length")
    return float(np.abs(np.sum(panel.reflection * h_u * h_s)) ** 2)


def cascade(h_u, panel: RisPanel, h_s) -> CascadedChannel:
    h_u, h_s = _pair(h_u, h_s)
    return CascadedChannel(h_u, h_s, cascaded_gain(h_u, panel, h_s))


def align_phases(h_u, h_s, amplitudes=None) -> RisPanel:
    """Co-phase every reflected path: theta_n = -arg(h_u[n] h_s[n]).

    Elements whose product channel is zero get theta = 0.
    """
    h_u, h_s = _pair(h_u, h_s)
    prod = h_u * h_s
    phases = np.where(prod == 0, 0.0, -np.angle(prod))
    amps = np.ones(prod.shape) if amplitudes is None else amplitudes
    return RisPanel(phases, amps)


def aligned_gain(h_u, h_s, amplitudes=1.0):
    """Closed form of the co-phased gain, (sum_n a_n |h_u[n]| |h_s[n]|)^2.

    Vectorized over leading axes.
    """
    h_u, h_s = _pair(h_u, h_s)
    return np.sum(np.asarray(amplitudes) * np.abs(h_u) * np.abs(h_s), axis=-1) ** 2


def capacity_pair(gain, split: PowerSplit, mode: ServiceMode, bandwidth, noise_power):
    """Return ``(c_nav, c_com)`` in bit/s.

    In NO mode navigation is decoded after SIC (no interference term) and
    communication sees the navigation power as interference; CO mode swaps
    the roles. Works elementwise on an array of gains.
    """
    if noise_power <= 0:
        raise NonPositiveNoise("noise power must be positive")
    g = np.asarray(gain, dtype=float)
    if np.any(g < 0):
        raise ValueError("gain must be non-negative")
    mode = ServiceMode(mode)
    wn2, wc2 = split.omega_n ** 2, split.omega_c ** 2
    delta_nav = 0.0 if mode is ServiceMode.NO else 1.0
    delta_com = 1.0 - delta_nav
    c_nav = bandwidth * np.log2(1.0 + g * wn2 / (delta_nav * g * wc2 + noise_power))
    c_com = bandwidth * np.log2(1.0 + g * wc2 / (delta_com * g * wn2 + noise_power))
    if g.ndim == 0:
        return float(c_nav), float(c_com)
    return c_nav, c_com


# --- ergodic rates --------------------------------------------------------------

@dataclass(frozen=True)
class FadingModel:
    """RIS-assisted channel used for ergodic-rate estimates.

    The satellite->RIS leg is deterministic line-of-sight; the RIS->user leg
    is Rician with factor ``k_factor`` (``math.inf`` gives pure LoS).
    Element channels are scaled so that with co-phasing and no fading the
    composite gain equals ``mean_gain`` (transmit power, antenna and path
    gains all folded in, in watts relative to ``noise_power``).
    """
    n_elements: int = 64
    k_factor: float = 10.0
    mean_gain: float = 1.0
    amplitude: float = 1.0
    aligned: bool = True

    def draw(self, trials: int, rng) -> tuple[np.ndarray, np.ndarray]:
        n = self.n_elements
        h_s = np.full((trials, n), math.sqrt(self.mean_gain) / n, dtype=complex)
        if math.isinf(self.k_factor):
            h_u = np.ones((trials, n), dtype=complex)
        else:
            los = math.sqrt(self.k_factor / (self.k_factor + 1.0))
            nlos = math.sqrt(1.0 / (2.0 * (self.k_factor + 1.0)))
            scatter = rng.standard_normal((trials, n, 2))
            h_u = los + nlos * (scatter[..., 0] + 1j * scatter[..., 1])
        return h_u, h_s

    def gains(self, trials: int, rng) -> np.ndarray:
        h_u, h_s = self.draw(trials, rng)
        if self.aligned:
            return aligned_gain(h_u, h_s, self.amplitude)
        theta = rng.uniform(0.0, 2.0 * math.pi, h_u.shape)
        return np.abs(np.sum(self.amplitude * np.exp(1j * theta) * h_u * h_s, axis=-1)) ** 2


@dataclass(frozen=True)
class ErgodicRates:
    c_nav: float
    c_com: float
    c_nav_halfwidth: float
    c_com_halfwidth: float


def ergodic_rates(model: FadingModel, split: PowerSplit, mode: ServiceMode,
                  trials: int, rng, bandwidth: float = 1.0,
                  noise_power: float = 1.0) -> ErgodicRates:
    """Monte Carlo mean of :func:`capacity_pair` over channel draws.

    Half-widths are 1.96 * sample std / sqrt(trials).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    gains = model.gains(trials, rng)
    c_nav, c_com = capacity_pair(gains, split, mode, bandwidth, noise_power)

    def half(x):
        return float(1.96 * np.std(x, ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0

    return ErgodicRates(float(np.mean(c_nav)), float(np.mean(c_com)), half(c_nav), half(c_com))
