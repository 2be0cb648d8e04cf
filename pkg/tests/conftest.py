"""Shared builders for the test suite.

Most tests construct a one-satellite slot context: terminals dropped in a
small cap under a satellite hovering over (0 N, 0 E), beams planned by the
scheduler, optional neighbor snapshots and protected receivers.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from leosched import geom
from leosched.allocgraph import SlotContext
from leosched.constants import BOLTZMANN
from leosched.interference import ProtectedUser, RfEnvironment, TransmitterSnapshot
from leosched.rf import (
    AtmosphericModel,
    ChannelPlan,
    RxAntennaPattern,
    TxAntennaPattern,
    noise_power_w,
)
from leosched.scheduler import plan_beams

ALTITUDE_M = 550e3


def make_env(num_channels: int = 4, bandwidth_hz: float = 250e6) -> RfEnvironment:
    channels = ChannelPlan(num_channels, bandwidth_hz, 12e9)
    return RfEnvironment(
        tx=TxAntennaPattern(),
        rx=RxAntennaPattern(),
        channels=channels,
        noise_w=noise_power_w(290.0, bandwidth_hz),
    )


def make_satellite_position(lat_deg: float = 0.0, lon_deg: float = 0.0) -> np.ndarray:
    ground = geom.ground_position(lat_deg, lon_deg)
    return geom.unit(ground) * (np.linalg.norm(ground) + ALTITUDE_M)


def make_context(
    rng: np.random.Generator,
    num_uts: int = 12,
    num_beams: int = 4,
    num_channels: int = 4,
    total_power_w: float = 2.0,
    max_channels_per_beam: int = 2,
    drop_half_angle_rad: float = 0.02,
    neighbor_snapshots: list[TransmitterSnapshot] | None = None,
    protected_users: list[ProtectedUser] | None = None,
    per_edge_cap_w: float = math.inf,
    backlog_bits: np.ndarray | None = None,
    env: RfEnvironment | None = None,
) -> SlotContext:
    env = env or make_env(num_channels)
    sat_pos = make_satellite_position()
    center = geom.ground_position(0.0, 0.0)
    ut_positions = geom.sample_cap(rng, center, drop_half_angle_rad, num_uts)
    ut_ids = np.arange(num_uts)
    if backlog_bits is None:
        backlog_bits = rng.uniform(1e6, 5e7, size=num_uts)
    wait_slots = rng.integers(0, 20, size=num_uts).astype(float)
    assignment, budgets = plan_beams(
        sat_pos, ut_positions, ut_ids, backlog_bits, wait_slots, num_beams, total_power_w
    )
    xi_serving = np.ones(num_uts)
    xi_inter = None
    if neighbor_snapshots:
        xi_inter = {s.sat_id: np.ones(num_uts) for s in neighbor_snapshots}
    return SlotContext(
        env=env,
        sat_id=0,
        sat_pos=sat_pos,
        assignment=assignment,
        beam_budgets_w=budgets,
        total_budget_w=total_power_w,
        ut_positions=ut_positions,
        ut_ids=ut_ids,
        backlog_bits=backlog_bits,
        wait_slots=wait_slots,
        xi_serving=xi_serving,
        neighbor_snapshots=neighbor_snapshots or [],
        xi_inter=xi_inter,
        protected_users=protected_users or [],
        max_channels_per_beam=max_channels_per_beam,
        per_edge_cap_w=per_edge_cap_w,
    )


def make_neighbor_snapshot(
    rng: np.random.Generator,
    sat_id: int = 1,
    lat_deg: float = 0.2,
    num_beams: int = 4,
    num_channels: int = 4,
    power_scale: float = 0.5,
) -> TransmitterSnapshot:
    pos = make_satellite_position(lat_deg, 0.0)
    center = geom.ground_position(lat_deg, 0.0)
    targets = geom.sample_cap(rng, center, 0.02, num_beams)
    bores = np.stack([geom.unit(t - pos) for t in targets])
    powers = rng.uniform(0.0, power_scale, size=(num_beams, num_channels))
    return TransmitterSnapshot(sat_id, pos, bores, powers)


@pytest.fixture
def env():
    return make_env()


def assert_close(a, b, rel=1e-9, msg=""):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    denom = np.maximum(np.abs(a), np.abs(b))
    denom[denom == 0.0] = 1.0
    err = np.max(np.abs(a - b) / denom)
    assert err <= rel, f"{msg} relative error {err:.3e} > {rel:.1e}"
