"""Link-budget primitives for every hop class in the four-layer network.

All functions are pure and reentrant. Distances are meters, powers are
watts, bandwidths are Hz, angles are degrees, gains are linear unless a
name says dB. Rates come out in bits per second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s
BOLTZMANN_NOISE_DBM_HZ = -174.0  # thermal noise density at ~290 K


class ChannelDomainError(ValueError):
    """Raised when a channel function is called outside its domain."""


@dataclass(frozen=True)
class AirGroundParams:
    """Constants of the aerial-to-ground path-loss model.

    Defaults are the suburban constant set used throughout the default
    configuration: (3.04, -23.29, -3.61, 4.14, 20.7) for
    (phi, eta, omega0_deg, gamma, k0).
    """

    phi: float = 3.04          # terrestrial path-loss exponent
    eta: float = -23.29        # excess path loss, dB
    omega0_deg: float = -3.61  # angle offset, degrees
    gamma: float = 4.14        # angle scalar
    k0: float = 20.7           # excess path-loss offset, dB

    def __post_init__(self) -> None:
        if self.gamma == 0:
            raise ChannelDomainError("gamma must be nonzero")


@dataclass(frozen=True)
class RadioParams:
    """Per-link-class radio constants used by the rate equations."""

    bandwidth_hz: float
    tx_power_w: float
    noise_power_w: float
    tx_gain: float = 1.0
    rx_gain: float = 1.0
    wavelength_m: float = 0.015

    def __post_init__(self) -> None:
        for name in ("bandwidth_hz", "tx_power_w", "noise_power_w",
                     "tx_gain", "rx_gain", "wavelength_m"):
            if getattr(self, name) <= 0:
                raise ChannelDomainError(f"{name} must be positive")


@dataclass(frozen=True)
class RainModel:
    """Rain attenuation on ground-satellite hops: fixed dB or Weibull draws."""

    mode: str = "fixed"     # "fixed" | "weibull"
    fixed_db: float = 6.0
    shape: float = 2.0
    scale_db: float = 6.0

    def __post_init__(self) -> None:
        if self.mode not in ("fixed", "weibull"):
            raise ChannelDomainError(f"unknown rain mode {self.mode!r}")
        if self.fixed_db < 0:
            raise ChannelDomainError("fixed_db must be >= 0")
        if self.shape <= 0 or self.scale_db <= 0:
            raise ChannelDomainError("shape and scale_db must be positive")


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        raise ChannelDomainError("linear value must be positive for dB conversion")
    return 10.0 * math.log10(x)


def thermal_noise_w(bandwidth_hz: float, density_dbm_hz: float = BOLTZMANN_NOISE_DBM_HZ) -> float:
    """Thermal noise floor in watts for a given bandwidth."""
    if bandwidth_hz <= 0:
        raise ChannelDomainError("bandwidth_hz must be positive")
    return db_to_linear(density_dbm_hz - 30.0) * bandwidth_hz


def path_loss_uav_bs(l_ub_m: float, omega_deg: float, p: AirGroundParams) -> float:
    """Path loss in dB between an aerial relay and a base station.

    ``l_ub_m`` is the horizontal distance and ``omega_deg`` the vertical
    angle of the slant path. The loss is the sum of a log-distance term,
    an angle-dependent excess term, and a constant offset:

        10*phi*log10(l) + eta*(omega - omega0)*exp((omega0 - omega)/gamma) + k0
    """
    if l_ub_m <= 0:
        raise ChannelDomainError("l_ub_m must be positive")
    angle = (omega_deg - p.omega0_deg) * math.exp((p.omega0_deg - omega_deg) / p.gamma)
    return 10.0 * p.phi * math.log10(l_ub_m) + p.eta * angle + p.k0


def vertical_angle_deg(altitude_diff_m: float, horizontal_m: float) -> float:
    """Vertical angle of a slant path, from altitude difference and ground range."""
    return math.degrees(math.atan2(altitude_diff_m, horizontal_m))


def rate_from_path_loss(r: RadioParams, path_loss_db: float) -> float:
    """Shannon rate of a link characterized by a path loss in dB."""
    snr = r.tx_power_w * db_to_linear(-path_loss_db) / r.noise_power_w
    return r.bandwidth_hz * math.log2(1.0 + snr)


def rain_attenuation(m: RainModel, rng: np.random.Generator | None = None) -> float:
    """Rain attenuation sample in dB.

    Fixed mode returns the configured constant without consuming the rng;
    weibull mode draws scale_db * Weibull(shape) from ``rng``.
    """
    if m.mode == "fixed":
        return m.fixed_db
    if rng is None:
        raise ChannelDomainError("weibull mode needs a random generator")
    return m.scale_db * float(rng.weibull(m.shape))


def gain_ground_satellite(r: RadioParams, distance_m: float, f_rain_db: float) -> float:
    """Linear channel gain of a ground/aerial to satellite hop with rain loss.

        Gtx * Grx * lambda^2 / (4 pi d)^2 * 10^(-F_rain/10)
    """
    if distance_m <= 0:
        raise ChannelDomainError("distance_m must be positive")
    free_space = r.tx_gain * r.rx_gain * r.wavelength_m ** 2 / (4.0 * math.pi * distance_m) ** 2
    return free_space * db_to_linear(-f_rain_db)


def gain_inter_satellite(r: RadioParams, distance_m: float) -> float:
    """Linear channel gain between two satellites (free space, no rain)."""
    return gain_ground_satellite(r, distance_m, 0.0)


def rate_from_gain(r: RadioParams, gain: float) -> float:
    """Shannon rate of a link characterized by a linear channel gain."""
    if gain < 0:
        raise ChannelDomainError("gain must be non-negative")
    snr = r.tx_power_w * gain / r.noise_power_w
    return r.bandwidth_hz * math.log2(1.0 + snr)
