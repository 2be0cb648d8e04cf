"""Received-power bookkeeping: co-channel interference within and across
satellites, per-channel SINR and rate, and equivalent power flux density
(EPFD) checks against protected ground receivers.

All powers are watts, all gains linear. Cross-satellite terms are computed
from transmitter snapshots, so the caller decides which slot's allocations a
satellite can actually know about (the harness feeds previous-slot
snapshots for neighbors).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rf
from .constants import db_to_linear, linear_to_db
from .geom import unit


@dataclass
class PowerAllocation:
    """Per-satellite transmit powers, indexed [beam, channel]."""

    powers_w: np.ndarray  # (B, M)
    beam_budgets_w: np.ndarray  # (B,)
    total_budget_w: float

    @classmethod
    def zeros(cls, num_beams: int, num_channels: int, beam_budgets_w, total_budget_w):
        return cls(
            np.zeros((num_beams, num_channels)),
            np.asarray(beam_budgets_w, dtype=float),
            float(total_budget_w),
        )

    def copy(self) -> "PowerAllocation":
        return PowerAllocation(
            self.powers_w.copy(), self.beam_budgets_w.copy(), self.total_budget_w
        )

    def channels_per_beam(self) -> np.ndarray:
        return (self.powers_w > 0.0).sum(axis=1)

    def total_w(self) -> float:
        return float(self.powers_w.sum())


def validate_allocation(alloc: PowerAllocation, max_channels_per_beam: int, rel_tol: float = 1e-9):
    """Return a list of constraint-violation descriptions (empty when clean)."""
    out = []
    p = alloc.powers_w
    if np.any(p < 0.0):
        out.append("negative transmit power")
    slack = alloc.total_budget_w * (1.0 + rel_tol)
    if p.sum() > slack:
        out.append(f"total power {p.sum():.6g} W exceeds budget {alloc.total_budget_w:.6g} W")
    over = np.nonzero(alloc.channels_per_beam() > max_channels_per_beam)[0]
    for b in over:
        out.append(f"beam {b} uses {int((p[b] > 0).sum())} channels, limit {max_channels_per_beam}")
    return out


@dataclass(frozen=True)
class RfEnvironment:
    """Static RF context shared by every link computation in a run."""

    tx: rf.TxAntennaPattern
    rx: rf.RxAntennaPattern
    channels: rf.ChannelPlan
    noise_w: float  # per-channel thermal noise power


@dataclass
class TransmitterSnapshot:
    """What one satellite is radiating in some slot."""

    sat_id: int
    position: np.ndarray  # (3,)
    boresights: np.ndarray  # (B, 3) unit vectors, spot beams
    powers_w: np.ndarray  # (B, M)


def beam_gain_table(
    env: RfEnvironment,
    sat_pos: np.ndarray,
    boresights: np.ndarray,
    ut_pos: np.ndarray,
    rx_off_axis_deg: float,
    xi_linear: float,
    aligned_beam: int | None = None,
) -> np.ndarray:
    """Linear gains (B, M) from each beam of one satellite to one terminal.

    rx_off_axis_deg is the terminal's pointing error toward this satellite
    (zero for the serving satellite). aligned_beam forces exact boresight
    alignment for the serving beam.
    """
    los = np.asarray(ut_pos, dtype=float) - np.asarray(sat_pos, dtype=float)
    d = float(np.linalg.norm(los))
    los_hat = los / d
    dots = np.clip(boresights @ los_hat, -1.0, 1.0)
    tx_off = np.degrees(np.arccos(dots))
    if aligned_beam is not None:
        tx_off[aligned_beam] = 0.0
    gt = db_to_linear(rf.tx_gain_dbi(env.tx, tx_off))  # (B,)
    gr = db_to_linear(rf.rx_gain_dbi(env.rx, rx_off_axis_deg))
    loss = rf.fspl_linear(d, env.channels.carrier_frequencies_hz) * xi_linear  # (M,)
    return gt[:, None] * gr / loss[None, :]


def rx_pointing_error_deg(ut_pos, serving_sat_pos, other_sat_pos) -> float:
    """Angle at the terminal between its serving satellite and another one."""
    u = np.asarray(ut_pos, dtype=float)
    a = unit(np.asarray(serving_sat_pos, dtype=float) - u)
    b = unit(np.asarray(other_sat_pos, dtype=float) - u)
    return math.degrees(math.acos(float(np.clip(a @ b, -1.0, 1.0))))


def intra_cci_w(
    env: RfEnvironment,
    serving: TransmitterSnapshot,
    serving_beam: int,
    ut_pos: np.ndarray,
    xi_linear: float,
) -> np.ndarray:
    """Co-channel interference (M,) from the serving satellite's other beams.

    The terminal tracks its serving satellite, so the receive pointing error
    is zero for every beam of that satellite.
    """
    gains = beam_gain_table(env, serving.position, serving.boresights, ut_pos, 0.0, xi_linear)
    contrib = serving.powers_w * gains
    contrib[serving_beam, :] = 0.0
    return contrib.sum(axis=0)


def inter_cci_w(
    env: RfEnvironment,
    ut_pos: np.ndarray,
    serving_sat_pos: np.ndarray,
    neighbor_snapshots: list[TransmitterSnapshot],
    xi_by_sat: dict[int, float] | None = None,
) -> np.ndarray:
    """Co-channel interference (M,) from neighbor satellites' transmissions."""
    total = np.zeros(env.channels.num_channels)
    for snap in neighbor_snapshots:
        psi = rx_pointing_error_deg(ut_pos, serving_sat_pos, snap.position)
        xi = 1.0 if xi_by_sat is None else xi_by_sat.get(snap.sat_id, 1.0)
        gains = beam_gain_table(env, snap.position, snap.boresights, ut_pos, psi, xi)
        total += (snap.powers_w * gains).sum(axis=0)
    return total


@dataclass
class SinrBreakdown:
    """Per-channel link accounting for one served terminal."""

    signal_w: np.ndarray  # (M,)
    intra_w: np.ndarray
    inter_w: np.ndarray
    noise_w: float

    @property
    def sinr(self) -> np.ndarray:
        return self.signal_w / (self.noise_w + self.intra_w + self.inter_w)


def sinr_breakdown(
    env: RfEnvironment,
    serving: TransmitterSnapshot,
    serving_beam: int,
    ut_pos: np.ndarray,
    xi_serving: float,
    neighbor_snapshots: list[TransmitterSnapshot] | None = None,
    xi_by_sat: dict[int, float] | None = None,
) -> SinrBreakdown:
    gains = beam_gain_table(
        env, serving.position, serving.boresights, ut_pos, 0.0, xi_serving,
        aligned_beam=serving_beam,
    )
    signal = serving.powers_w[serving_beam, :] * gains[serving_beam, :]
    contrib = serving.powers_w * gains
    contrib[serving_beam, :] = 0.0
    intra = contrib.sum(axis=0)
    inter = inter_cci_w(env, ut_pos, serving.position, neighbor_snapshots or [], xi_by_sat)
    return SinrBreakdown(signal, intra, inter, env.noise_w)


def downlink_rate_bps(breakdown: SinrBreakdown, bandwidth_hz: float) -> float:
    """Shannon rate summed over the serving beam's active channels."""
    active = breakdown.signal_w > 0.0
    sinr = breakdown.sinr[active]
    return float(bandwidth_hz * np.log2(1.0 + sinr).sum())


@dataclass(frozen=True)
class ProtectedUser:
    """Ground receiver with a flux-density ceiling, e.g. a radio telescope."""

    user_id: int
    position: np.ndarray
    boresight: np.ndarray  # unit vector of its receive pointing
    rx: rf.RxAntennaPattern
    kappa_dbw_per_m2: float = -160.0  # ceiling per reference bandwidth
    active_channels: frozenset[int] = frozenset()
    reference_bandwidth_hz: float = 100e6

    def is_active(self, channel: int) -> bool:
        return channel in self.active_channels


def epfd_per_channel_w_m2(
    env: RfEnvironment, snap: TransmitterSnapshot, user: ProtectedUser
) -> np.ndarray:
    """Raw flux density (M,) at the protected user from one satellite.

    Channels the user is not listening on contribute zero. Atmospheric loss
    is deliberately excluded: the ceiling is on radiated flux density.
    """
    los = user.position - snap.position
    d = float(np.linalg.norm(los))
    los_hat = los / d
    dots = np.clip(snap.boresights @ los_hat, -1.0, 1.0)
    tx_off = np.degrees(np.arccos(dots))
    gt = db_to_linear(rf.tx_gain_dbi(env.tx, tx_off))  # (B,)
    psi = math.degrees(
        math.acos(float(np.clip(unit(user.boresight) @ unit(-los), -1.0, 1.0)))
    )
    discrimination = db_to_linear(rf.rx_gain_dbi(user.rx, psi) - user.rx.g_max_dbi)
    per_beam = snap.powers_w * gt[:, None] / (4.0 * math.pi * d**2) * discrimination
    out = per_beam.sum(axis=0)
    mask = np.zeros(env.channels.num_channels, dtype=bool)
    for m in user.active_channels:
        mask[m] = True
    out[~mask] = 0.0
    return out


def epfd_bandwidth_scale(channel_bandwidth_hz: float, reference_bandwidth_hz: float) -> float:
    """Fraction of a channel's flux falling in the reference measurement band."""
    if channel_bandwidth_hz > reference_bandwidth_hz:
        return reference_bandwidth_hz / channel_bandwidth_hz
    return 1.0


@dataclass
class EpfdResult:
    user_id: int
    sat_id: int
    total_w_m2: float  # normalized to the reference bandwidth
    margin_db: float  # ceiling minus actual; >= 0 means compliant

    @property
    def compliant(self) -> bool:
        return self.margin_db >= 0.0


def epfd_check(
    env: RfEnvironment,
    snap: TransmitterSnapshot,
    user: ProtectedUser,
    reference_bandwidth_hz: float = 100e6,
) -> EpfdResult:
    per_channel = epfd_per_channel_w_m2(env, snap, user)
    scale = epfd_bandwidth_scale(env.channels.bandwidth_hz, reference_bandwidth_hz)
    total = float(per_channel.sum() * scale)
    if total <= 0.0:
        margin = math.inf
    else:
        margin = user.kappa_dbw_per_m2 - float(linear_to_db(total))
    return EpfdResult(user.user_id, snap.sat_id, total, margin)
