"""Reference allocation strategies: full frequency reuse with even power
split, and single-channel selection against a measured interference map.
"""

from __future__ import annotations

import math

import numpy as np

from conftest import make_context, make_env
from leosched import geom
from leosched.baselines import full_reuse_allocation, single_channel_allocation
from leosched.interference import ProtectedUser, validate_allocation


def test_full_reuse_even_split():
    rng = np.random.default_rng(0)
    ctx = make_context(rng, num_beams=2, num_channels=8, total_power_w=8.0)
    g = full_reuse_allocation(ctx)
    for b in g.served_beams:
        assert sorted(g.edges_of_beam(b)) == list(range(8))
        share = ctx.beam_budgets_w[b] / 8.0
        np.testing.assert_allclose(g.alloc.powers_w[b], np.full(8, share), rtol=1e-12)
    # platform budget exactly exhausted
    assert math.isclose(g.alloc.powers_w.sum(), 8.0, rel_tol=1e-12)


def test_full_reuse_idle_beams_get_no_edges():
    rng = np.random.default_rng(1)
    backlog = np.array([4e6, 0.0, 0.0, 0.0, 0.0, 0.0])
    ctx = make_context(rng, num_uts=6, num_beams=3, backlog_bits=backlog)
    g = full_reuse_allocation(ctx)
    assert len(g.served_beams) == 1
    served = g.served_beams[0]
    for b in range(g.num_beams):
        if b != served:
            assert g.edges_of_beam(b) == []


def test_full_reuse_flags_relaxed_channel_limit():
    rng = np.random.default_rng(2)
    ctx = make_context(rng, num_channels=4, max_channels_per_beam=2)
    g = full_reuse_allocation(ctx)
    assert g.relaxed_n is True
    ctx = make_context(rng, num_channels=4, max_channels_per_beam=4)
    g = full_reuse_allocation(ctx)
    assert g.relaxed_n is False
    assert validate_allocation(g.alloc, ctx.max_channels_per_beam) == []


def test_full_reuse_respects_edge_cap():
    rng = np.random.default_rng(3)
    ctx = make_context(rng, num_beams=2, num_channels=4, total_power_w=8.0, per_edge_cap_w=0.1)
    g = full_reuse_allocation(ctx)
    assert np.all(g.alloc.powers_w <= 0.1 + 1e-15)


def test_full_reuse_projection_not_refilled():
    # a zenith-pointing protected receiver kills its channel satellite-wide;
    # the freed power must stay unspent, not flow to other channels
    rng = np.random.default_rng(4)
    env = make_env()
    pos = geom.ground_position(0.0, 0.0)
    ctx0 = make_context(np.random.default_rng(4))
    user = ProtectedUser(
        user_id=0,
        position=pos,
        boresight=geom.unit(ctx0.sat_pos - pos),
        rx=env.rx,
        kappa_dbw_per_m2=-210.0,
        active_channels=frozenset({1}),
    )
    ctx = make_context(rng, num_beams=4, num_channels=4, total_power_w=2.0, protected_users=[user])
    g = full_reuse_allocation(ctx)
    assert np.all(g.alloc.powers_w[:, 1] <= 1e-9)
    for b in g.served_beams:
        share = ctx.beam_budgets_w[b] / 4.0
        for m in (0, 2, 3):
            assert math.isclose(g.alloc.powers_w[b, m], share, rel_tol=1e-12)
    for margin in g.epfd_margins_db().values():
        assert margin >= 0.0


def test_single_channel_quiet_spectrum_tie_breaks_low():
    rng = np.random.default_rng(5)
    # one beam, no measurements: channel 0 by tie-break, full budget on it
    backlog = np.array([5e6, 0.0, 0.0, 0.0])
    ctx = make_context(rng, num_uts=4, num_beams=1, num_channels=4, backlog_bits=backlog)
    g = single_channel_allocation(ctx)
    b = g.served_beams[0]
    assert g.edges == [(0, b)]
    assert math.isclose(g.alloc.powers_w[b, 0], float(ctx.beam_budgets_w[b]), rel_tol=1e-12)


def test_single_channel_avoids_loud_channel():
    rng = np.random.default_rng(6)
    backlog = np.array([5e6, 0.0, 0.0, 0.0])
    ctx = make_context(rng, num_uts=4, num_beams=1, num_channels=4, backlog_bits=backlog)
    measured = np.zeros((4, 4))
    measured[:, 0] = 1e-9  # strong co-located interferer parked on channel 0
    g = single_channel_allocation(ctx, prev_interference_w=measured)
    (m, b) = g.edges[0]
    assert m == 1  # next-quietest, lowest index among the zeros
    assert math.isclose(g.alloc.powers_w[b, m], float(ctx.beam_budgets_w[b]), rel_tol=1e-12)


def test_single_channel_spreads_same_slot_siblings():
    rng = np.random.default_rng(7)
    # co-located beams know each other's same-slot commitments exactly, so
    # later beams dodge the channels earlier beams just took
    ctx = make_context(rng, num_uts=12, num_beams=4, num_channels=4, drop_half_angle_rad=0.003)
    g = single_channel_allocation(ctx)
    chans = [g.edges_of_beam(b)[0] for b in g.served_beams]
    assert len(set(chans)) == len(chans)


def test_single_channel_full_budget_and_constraints():
    for seed in range(5):
        rng = np.random.default_rng(10 + seed)
        ctx = make_context(rng, num_beams=4, num_channels=4)
        measured = np.abs(np.random.default_rng(seed).normal(0, 1e-12, size=(12, 4)))
        g = single_channel_allocation(ctx, prev_interference_w=measured)
        assert validate_allocation(g.alloc, ctx.max_channels_per_beam) == []
        for b in g.served_beams:
            assert len(g.edges_of_beam(b)) == 1
            m = g.edges_of_beam(b)[0]
            assert math.isclose(
                g.alloc.powers_w[b, m], float(ctx.beam_budgets_w[b]), rel_tol=1e-12
            )


def test_single_channel_projection_enforces_ceiling():
    rng = np.random.default_rng(8)
    env = make_env()
    pos = geom.ground_position(0.0, 0.0)
    ctx0 = make_context(np.random.default_rng(8))
    user = ProtectedUser(
        user_id=0,
        position=pos,
        boresight=geom.unit(ctx0.sat_pos - pos),
        rx=env.rx,
        kappa_dbw_per_m2=-200.0,
        active_channels=frozenset({0}),
    )
    ctx = make_context(rng, num_beams=3, num_channels=4, protected_users=[user])
    g = single_channel_allocation(ctx)
    for margin in g.epfd_margins_db().values():
        assert margin >= 0.0
    assert validate_allocation(g.alloc, ctx.max_channels_per_beam) == []
