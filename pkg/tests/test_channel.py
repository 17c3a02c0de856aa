import numpy as np
import pytest

from ndnoma.channel import downlink_receive, uplink_combine
from ndnoma.noise import ChannelRealization, SeedSpec


def test_zero_in_zero_out():
    z = np.zeros(10)
    y = uplink_combine(z, z, z, ChannelRealization(1 + 1j, 2, 3j), 0.0, SeedSpec(1))
    np.testing.assert_array_equal(y.samples, np.zeros(10))


def test_identity_channel_sums():
    r = np.random.default_rng(0)
    f = [r.standard_normal(16) for _ in range(3)]
    y = uplink_combine(*f, ChannelRealization(1, 1, 1), 0.0, SeedSpec(1))
    np.testing.assert_allclose(y.samples, f[0] + f[1] + f[2], atol=1e-15)
    assert np.all(y.samples.imag == 0)


def test_linearity_in_taps():
    r = np.random.default_rng(1)
    f = [r.standard_normal(8) for _ in range(3)]
    ch = ChannelRealization(0.3 - 0.2j, 1.1j, -0.7)
    y = uplink_combine(*f, ch, 0.0, SeedSpec(1)).samples
    np.testing.assert_allclose(y, ch.h1 * f[0] + ch.h2 * f[1] + ch.h3 * f[2], atol=1e-14)


def test_power_additivity():
    r = np.random.default_rng(2)
    f = [r.standard_normal(1_000_000) for _ in range(3)]
    ch = ChannelRealization(1, 1j, (1 + 1j) / np.sqrt(2))
    y = uplink_combine(*f, ch, 1.0, SeedSpec(2)).samples
    assert abs(np.mean(np.abs(y) ** 2) / 4 - 1) < 0.02


def test_shape_mismatch():
    with pytest.raises(ValueError):
        uplink_combine(np.zeros(4), np.zeros(4), np.zeros(6), ChannelRealization(1, 1, 1), 0.0, SeedSpec(1))


def test_batched_taps():
    f = np.ones((3, 4))
    ch = ChannelRealization(np.array([1, 2, 3]), np.zeros(3), np.zeros(3))
    y = uplink_combine(f, 0 * f, 0 * f, ch, 0.0, SeedSpec(1)).samples
    np.testing.assert_array_equal(y[:, 0], [1, 2, 3])


def test_downlink_rotation():
    f = np.arange(6.0)
    y = downlink_receive(f, 1j, 0.0, SeedSpec(1))
    np.testing.assert_array_equal(y.samples, 1j * f)
    assert y.channel == 1j


def test_downlink_second_moment():
    r = np.random.default_rng(3)
    f = 0.8 + 1.5 * r.standard_normal(1_000_000)
    h = 0.6 - 0.9j
    y = downlink_receive(f, h, 0.5, SeedSpec(3)).samples
    assert abs(np.mean(y) / (h * 0.8) - 1) < 0.02
    expected = abs(h) ** 2 * 1.5**2 + abs(h * 0.8) ** 2 + 0.5
    assert abs(np.mean(np.abs(y) ** 2) / expected - 1) < 0.02
