"""RF primitives: piecewise antenna gain masks, free-space path loss,
atmospheric attenuation, the channel plan, and end-to-end link gain.

Gain masks follow the regulatory piecewise form: flat mainlobe, a quadratic
3 dB rolloff region for the transmitter, a 25*log10 sidelobe slope, and a
flat far-sidelobe floor. Boundary angles belong to the lower branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import BOLTZMANN, SPEED_OF_LIGHT, db_to_linear


@dataclass(frozen=True)
class TxAntennaPattern:
    g_max_dbi: float = 40.0
    half_beamwidth_deg: float = 1.0  # half of the 3 dB beamwidth
    sidelobe_edge_deg: float = 20.0
    far_sidelobe_dbi: float = 5.0


@dataclass(frozen=True)
class RxAntennaPattern:
    g_max_dbi: float = 35.0
    mainlobe_edge_deg: float = 1.0
    sidelobe_edge_deg: float = 40.0
    far_sidelobe_dbi: float = -5.0


def tx_gain_dbi(pattern: TxAntennaPattern, off_axis_deg):
    """Transmit gain toward an off-axis angle in degrees. Array friendly."""
    ph = pattern.half_beamwidth_deg
    g_quad_edge = pattern.g_max_dbi - 3.0 * 1.5**2  # value at 1.5*ph
    if np.ndim(off_axis_deg) == 0:
        phi = abs(float(off_axis_deg))
        if phi <= ph:
            return float(pattern.g_max_dbi)
        if phi <= 1.5 * ph:
            t = phi / ph
            return pattern.g_max_dbi - 3.0 * (t * t)
        if phi <= pattern.sidelobe_edge_deg:
            # np.log10 keeps scalar and array calls bit-identical
            return float(g_quad_edge - 25.0 * np.log10(2.0 * phi / (3.0 * ph)))
        return float(pattern.far_sidelobe_dbi)
    phi = np.abs(np.asarray(off_axis_deg, dtype=float))
    t = phi / ph
    with np.errstate(divide="ignore"):
        sidelobe = g_quad_edge - 25.0 * np.log10(2.0 * phi / (3.0 * ph))
    return np.where(
        phi <= ph,
        pattern.g_max_dbi,
        np.where(
            phi <= 1.5 * ph,
            pattern.g_max_dbi - 3.0 * (t * t),
            np.where(phi <= pattern.sidelobe_edge_deg, sidelobe, pattern.far_sidelobe_dbi),
        ),
    )


def rx_gain_dbi(pattern: RxAntennaPattern, off_axis_deg):
    """Receive gain toward an off-axis angle in degrees. Array friendly."""
    pe = pattern.mainlobe_edge_deg
    if np.ndim(off_axis_deg) == 0:
        psi = abs(float(off_axis_deg))
        if psi <= pe:
            return float(pattern.g_max_dbi)
        if psi <= pattern.sidelobe_edge_deg:
            return float(pattern.g_max_dbi - 25.0 * np.log10(psi / pe))
        return float(pattern.far_sidelobe_dbi)
    psi = np.abs(np.asarray(off_axis_deg, dtype=float))
    with np.errstate(divide="ignore"):
        sidelobe = pattern.g_max_dbi - 25.0 * np.log10(psi / pe)
    return np.where(
        psi <= pe,
        pattern.g_max_dbi,
        np.where(psi <= pattern.sidelobe_edge_deg, sidelobe, pattern.far_sidelobe_dbi),
    )


def fspl_linear(distance_m, frequency_hz):
    """Free-space path loss (4 pi d f / c)^2 as a linear power ratio >= 1."""
    d = np.asarray(distance_m, dtype=float)
    out = (4.0 * math.pi * d * np.asarray(frequency_hz, dtype=float) / SPEED_OF_LIGHT) ** 2
    return float(out) if out.ndim == 0 else out


def fspl_db(distance_m, frequency_hz):
    return 10.0 * np.log10(fspl_linear(distance_m, frequency_hz))


@dataclass(frozen=True)
class AtmosphericModel:
    """Slot-level attenuation with a doubly log-normal spread.

    The attenuation in dB is log-normal around a log-median that is itself
    re-drawn log-normally each slot. With deterministic=True every draw
    returns the analytic mean attenuation, which keeps paired runs noise-free.
    """

    median_db: float = 0.5
    sigma_inner: float = 0.25  # shape of the per-link draw, log-dB domain
    sigma_outer: float = 0.25  # shape of the per-slot median perturbation
    deterministic: bool = True

    @property
    def mean_attenuation_db(self) -> float:
        s2 = self.sigma_inner**2 + self.sigma_outer**2
        return self.median_db * math.exp(s2 / 2.0)

    def sample_db(self, rng: np.random.Generator | None, n: int | None = None):
        if self.deterministic:
            val = self.mean_attenuation_db
            return val if n is None else np.full(n, val)
        if self.median_db <= 0.0:
            return 0.0 if n is None else np.zeros(n)
        assert rng is not None, "stochastic attenuation needs an explicit rng"
        size = 1 if n is None else n
        log_median = math.log(self.median_db) + self.sigma_outer * rng.standard_normal()
        draws = np.exp(log_median + self.sigma_inner * rng.standard_normal(size))
        return float(draws[0]) if n is None else draws

    def sample_linear(self, rng: np.random.Generator | None, n: int | None = None):
        """Attenuation as a linear power loss factor, always >= 1."""
        return db_to_linear(self.sample_db(rng, n))


@dataclass(frozen=True)
class ChannelPlan:
    num_channels: int = 8
    bandwidth_hz: float = 250e6
    center_frequency_hz: float = 12e9

    def carrier_frequency_hz(self, m) -> np.ndarray | float:
        """Center frequency of channel m, channels packed edge to edge."""
        idx = np.asarray(m, dtype=float)
        offset = (idx - (self.num_channels - 1) / 2.0) * self.bandwidth_hz
        out = self.center_frequency_hz + offset
        return float(out) if np.ndim(m) == 0 else out

    @property
    def carrier_frequencies_hz(self) -> np.ndarray:
        return self.carrier_frequency_hz(np.arange(self.num_channels))


def noise_power_w(system_temperature_k: float, bandwidth_hz: float) -> float:
    return BOLTZMANN * system_temperature_k * bandwidth_hz


def eirp_power_cap_w(
    eirp_density_dbw_per_mhz: float, occupied_bandwidth_hz: float, tx_g_max_dbi: float
) -> float:
    """Transmit power allowed by an EIRP spectral-density ceiling.

    Applied per beam-channel with the channel bandwidth, or across the whole
    plan (num_channels * bandwidth) to size the satellite power budget.
    """
    eirp_dbw = eirp_density_dbw_per_mhz + 10.0 * math.log10(occupied_bandwidth_hz / 1e6)
    return float(db_to_linear(eirp_dbw - tx_g_max_dbi))


@dataclass(frozen=True)
class LinkGeometry:
    """Pointing summary of one transmitter-beam to receiver path."""

    distance_m: float
    tx_off_axis_deg: float  # beam boresight to receiver, seen from satellite
    rx_off_axis_deg: float  # receiver boresight to satellite, seen from ground


def channel_gain(
    link: LinkGeometry,
    tx: TxAntennaPattern,
    rx: RxAntennaPattern,
    frequency_hz: float,
    atmospheric_loss_linear: float = 1.0,
) -> float:
    """Linear power gain G_t * G_r / (xi * L) for one link on one channel."""
    gt = db_to_linear(tx_gain_dbi(tx, link.tx_off_axis_deg))
    gr = db_to_linear(rx_gain_dbi(rx, link.rx_off_axis_deg))
    loss = fspl_linear(link.distance_m, frequency_hz) * atmospheric_loss_linear
    return float(gt * gr / loss)
