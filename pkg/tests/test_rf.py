"""Antenna masks, path loss, atmosphere, channel plan, and power budgets.

The numeric anchors here are recomputed from the formulas by hand in each
test rather than imported from the module under test.
"""

from __future__ import annotations

import math

import numpy as np

from leosched.constants import (
    BOLTZMANN,
    SPEED_OF_LIGHT,
    db_to_linear,
    linear_to_db,
    watts_to_dbw,
)
from leosched.rf import (
    AtmosphericModel,
    ChannelPlan,
    RxAntennaPattern,
    TxAntennaPattern,
    channel_gain,
    eirp_power_cap_w,
    fspl_db,
    fspl_linear,
    noise_power_w,
    rx_gain_dbi,
    tx_gain_dbi,
)

TX = TxAntennaPattern()
RX = RxAntennaPattern()


def test_tx_mask_anchor_points():
    assert tx_gain_dbi(TX, 0.0) == 40.0
    # parabolic rolloff: 40 - 3*(1.5/1)^2 = 33.25
    assert abs(tx_gain_dbi(TX, 1.5) - 33.25) < 1e-12
    # far sidelobe floor
    assert tx_gain_dbi(TX, 25.0) == 5.0


def test_tx_mask_piecewise_structure():
    # flat peak across the main lobe, quadratic shoulder to 1.5 beamwidths
    for theta in (0.0, 0.3, 0.7, 1.0):
        assert tx_gain_dbi(TX, theta) == 40.0
    for theta in (1.2, 1.5):
        assert abs(tx_gain_dbi(TX, theta) - (40.0 - 3.0 * theta**2)) < 1e-12
    # beyond the sidelobe edge the mask is flat
    assert tx_gain_dbi(TX, 20.5) == tx_gain_dbi(TX, 90.0) == 5.0
    # mask is nonincreasing
    thetas = np.linspace(0.0, 90.0, 901)
    g = tx_gain_dbi(TX, thetas)
    assert np.all(np.diff(g) <= 1e-12)


def test_tx_mask_log_region_formula():
    for theta in (2.0, 5.0, 10.0):
        expect = 33.25 - 25.0 * math.log10(2.0 * theta / 3.0)
        got = float(tx_gain_dbi(TX, theta))
        if expect < 5.0:
            expect = 5.0
        assert abs(got - expect) < 1e-12


def test_rx_mask_anchor_points():
    assert rx_gain_dbi(RX, 0.0) == 35.0
    assert abs(rx_gain_dbi(RX, 10.0) - 10.0) < 1e-12  # 35 - 25*log10(10)
    assert rx_gain_dbi(RX, 50.0) == -5.0


def test_rx_mask_monotone_and_floor():
    psis = np.linspace(0.0, 90.0, 901)
    g = rx_gain_dbi(RX, psis)
    # nonincreasing except where the log branch hands off to the far floor
    # (the branch dips ~0.05 dB below the floor just before the edge)
    rising = np.nonzero(np.diff(g) > 1e-12)[0]
    assert all(g[i + 1] == -5.0 for i in rising)
    assert g.min() >= -5.0 - 0.06
    assert g[-1] == -5.0


def test_fspl_golden_value():
    # (4 pi d f / c)^2 at 550 km and 12 GHz with c = 3.0e8
    loss_db = fspl_db(550e3, 12e9)
    by_hand = 20.0 * math.log10(4.0 * math.pi * 550e3 * 12e9 / SPEED_OF_LIGHT)
    assert abs(loss_db - by_hand) < 1e-12
    assert abs(loss_db - 168.83) < 0.01


def test_fspl_scalar_and_array_shapes():
    d = np.array([500e3, 550e3, 600e3])
    f = 12e9
    arr = fspl_linear(d, f)
    assert arr.shape == (3,)
    for i in range(3):
        assert abs(arr[i] - fspl_linear(float(d[i]), f)) < 1e-3
    freqs = np.array([11.8e9, 12.2e9])
    arr2 = fspl_linear(550e3, freqs)
    assert arr2.shape == (2,)
    assert isinstance(fspl_linear(550e3, 12e9), float)


def test_fspl_scales_with_distance_squared():
    assert abs(fspl_linear(1100e3, 12e9) / fspl_linear(550e3, 12e9) - 4.0) < 1e-12


def test_noise_power_golden():
    # k_B * 290 K * 250 MHz
    sigma2 = noise_power_w(290.0, 250e6)
    assert abs(sigma2 - BOLTZMANN * 290.0 * 250e6) < 1e-30
    assert abs(linear_to_db(sigma2) - (-120.0)) < 0.1


def test_channel_plan_frequencies():
    plan = ChannelPlan(num_channels=8, bandwidth_hz=250e6, center_frequency_hz=12e9)
    freqs = plan.carrier_frequencies_hz
    assert len(freqs) == 8
    # evenly spaced by the bandwidth and centered on the band center
    assert abs(np.mean(freqs) - 12e9) < 1e-3
    assert np.allclose(np.diff(freqs), 250e6)


def test_eirp_power_cap_values():
    # P(dBW) = 15 + 10*log10(occupied MHz) - G_max
    p8 = eirp_power_cap_w(15.0, 8 * 250e6, 40.0)
    assert abs(p8 - 10 ** ((15.0 + 10.0 * math.log10(2000.0) - 40.0) / 10.0)) < 1e-12
    assert abs(p8 - 6.33) < 0.01
    p4 = eirp_power_cap_w(15.0, 4 * 250e6, 40.0)
    assert abs(p4 - 10 ** (5.0 / 10.0)) < 1e-12
    p1 = eirp_power_cap_w(15.0, 250e6, 40.0)
    assert abs(p1 - 10 ** ((15.0 + 10.0 * math.log10(250.0) - 40.0) / 10.0)) < 1e-12


def test_atmosphere_deterministic_mean():
    model = AtmosphericModel(median_db=0.5, sigma_inner=0.25, sigma_outer=0.25, deterministic=True)
    # mean of a lognormal with median 0.5 dB: 0.5 * exp((s1^2+s2^2)/2)
    expect = 0.5 * math.exp((0.25**2 + 0.25**2) / 2.0)
    assert abs(model.mean_attenuation_db - expect) < 1e-12
    rng = np.random.default_rng(0)
    s = model.sample_db(rng, 5)
    assert np.allclose(s, expect)


def test_atmosphere_stochastic_median():
    """One call shares an outer draw; statistics need many calls."""
    model = AtmosphericModel(median_db=0.5, sigma_inner=0.25, sigma_outer=0.25, deterministic=False)
    rng = np.random.default_rng(7)
    calls = np.concatenate([model.sample_db(rng, 40) for _ in range(5000)])
    assert calls.shape == (200_000,)
    assert np.all(calls > 0.0)
    # median of the product of two centered lognormals is the median itself
    assert abs(np.median(calls) - 0.5) < 0.01
    assert abs(np.mean(calls) - model.mean_attenuation_db) < 0.02


def test_atmosphere_sample_linear_matches_db():
    """Linear form is a loss factor >= 1 that multiplies the denominator."""
    model = AtmosphericModel(deterministic=False)
    r1 = np.random.default_rng(3)
    r2 = np.random.default_rng(3)
    db = model.sample_db(r1, 64)
    lin = model.sample_linear(r2, 64)
    assert np.allclose(lin, db_to_linear(db))
    assert np.all(lin >= 1.0)


def test_channel_gain_composition():
    """Aligned link: gain(dB) = G_t + G_r - FSPL - atmosphere."""
    from leosched.rf import LinkGeometry

    d = 550e3
    f = 12e9
    link = LinkGeometry(distance_m=d, tx_off_axis_deg=0.0, rx_off_axis_deg=0.0)
    g = channel_gain(link, TX, RX, f)
    expect_db = 40.0 + 35.0 - fspl_db(d, f)
    assert abs(linear_to_db(g) - expect_db) < 1e-9
    assert abs(expect_db - (-93.83)) < 0.01
    # atmosphere divides linearly, i.e. subtracts straight dB
    g2 = channel_gain(link, TX, RX, f, atmospheric_loss_linear=db_to_linear(3.0))
    assert abs(linear_to_db(g2) - (expect_db - 3.0)) < 1e-9


def test_db_helpers_round_trip():
    rng = np.random.default_rng(11)
    for _ in range(50):
        x = float(rng.uniform(-80, 40))
        assert abs(linear_to_db(db_to_linear(x)) - x) < 1e-9
    assert watts_to_dbw(0.0) == -300.0
    assert abs(watts_to_dbw(2.0) - 10.0 * math.log10(2.0)) < 1e-12
