import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from usstyle.core import ChannelStats, channel_stats
from usstyle.network import make_identity_network
from usstyle.transfer import (
    DepthWindowConfig,
    TransferConfig,
    adain,
    adain_depth,
    hist_equalize,
    transfer_image,
    wct,
)
from usstyle.wavelet import haar_pool, haar_unpool


def depth_reference(x, y, bandwidth_frac, epsilon):
    """Independent slice-and-average evaluation of the depth-windowed transform.

    Slices the two row windows explicitly, styles each with the matching
    proportional window of y, and assembles the output row by row.
    """
    h, hy = x.shape[1], y.shape[1]
    b = math.ceil(bandwidth_frac * h)
    by = math.ceil(bandwidth_frac * hy)
    top = adain(x[:, 0:b], channel_stats(y[:, 0:by]), epsilon)
    bottom = adain(x[:, h - b : h], channel_stats(y[:, hy - by : hy]), epsilon)
    out = np.empty_like(x)
    for row in range(h):
        in_top = row < b
        in_bottom = row >= h - b
        if in_top and in_bottom:
            out[:, row] = 0.5 * (top[:, row] + bottom[:, row - (h - b)])
        elif in_top:
            out[:, row] = top[:, row]
        else:
            out[:, row] = bottom[:, row - (h - b)]
    return out


class TestAdain:
    def test_hand_example(self):
        x = np.array([[[0.0, 2.0]]])
        out = adain(x, ChannelStats(mean=np.array([5.0]), std=np.array([3.0])), 0.0)
        assert_array_equal(out, np.array([[[2.0, 8.0]]]))

    def test_own_stats_is_identity(self):
        rng = np.random.default_rng(0)
        x = rng.random((3, 6, 6))
        assert_array_equal(adain(x, channel_stats(x), 0.0), x)

    def test_constant_input_collapses_to_target_mean(self):
        x = np.full((2, 4, 4), 0.5)
        stats = ChannelStats(mean=np.array([0.1, 0.9]), std=np.array([0.2, 0.3]))
        out = adain(x, stats, 1e-5)
        assert_allclose(out[0], 0.1, atol=1e-12)
        assert_allclose(out[1], 0.9, atol=1e-12)

    def test_constant_input_finite_with_zero_epsilon(self):
        out = adain(np.full((1, 3, 3), 0.25), ChannelStats(np.array([0.7]), np.array([0.1])), 0.0)
        assert np.all(np.isfinite(out))
        assert_allclose(out, 0.7, atol=1e-12)

    def test_output_stats_match_target(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            x = rng.standard_normal((4, 8, 8)) * rng.uniform(1e-3, 2.0)
            target = ChannelStats(mean=rng.uniform(-1, 1, 4), std=rng.uniform(0.1, 2.0, 4))
            got = channel_stats(adain(x, target, 0.0))
            assert_allclose(got.mean, target.mean, atol=1e-6)
            assert_allclose(got.std, target.std, atol=1e-6)

    def test_idempotent(self):
        rng = np.random.default_rng(2)
        x = rng.random((2, 8, 8))
        target = ChannelStats(mean=np.array([0.3, 0.6]), std=np.array([0.05, 0.2]))
        once = adain(x, target, 0.0)
        assert_allclose(adain(once, target, 0.0), once, atol=1e-6)

    def test_spatial_permutation_equivariance(self):
        rng = np.random.default_rng(3)
        x = rng.random((2, 4, 6))
        target = ChannelStats(mean=np.array([0.2, 0.8]), std=np.array([0.4, 0.1]))
        perm = rng.permutation(4 * 6)
        permuted = x.reshape(2, -1)[:, perm].reshape(2, 4, 6)
        out_then_perm = adain(x, target, 1e-5).reshape(2, -1)[:, perm].reshape(2, 4, 6)
        assert_allclose(adain(permuted, target, 1e-5), out_then_perm, atol=1e-12)

    def test_channel_mismatch(self):
        with pytest.raises(ValueError, match="channel"):
            adain(np.zeros((2, 3, 3)), ChannelStats(np.zeros(3), np.ones(3)))


class TestAdainDepth:
    def test_h6_window_geometry(self):
        """Height 6: windows are rows [0,4) and [2,6), rows 2-3 averaged."""
        x = np.arange(6, dtype=np.float64).reshape(1, 6, 1)
        y = np.random.default_rng(4).random((1, 6, 1))
        cfg = DepthWindowConfig()
        b = math.ceil(cfg.bandwidth_frac * 6)
        assert b == 4
        out = adain_depth(x, y, cfg, 0.0)
        top = adain(x[:, 0:4], channel_stats(y[:, 0:4]), 0.0)
        bottom = adain(x[:, 2:6], channel_stats(y[:, 2:6]), 0.0)
        assert_array_equal(out[:, 0:2], top[:, 0:2])
        assert_array_equal(out[:, 4:6], bottom[:, 2:4])
        assert_array_equal(out[:, 2:4], 0.5 * (top[:, 2:4] + bottom[:, 0:2]))

    @pytest.mark.parametrize("h", [3, 4, 5, 6, 7, 9, 16, 33])
    def test_matches_reference_bitwise(self, h):
        rng = np.random.default_rng(h)
        x = rng.random((2, h, 5))
        y = rng.random((2, h + 3, 4))
        out = adain_depth(x, y, DepthWindowConfig(), 1e-5)
        ref = depth_reference(x, y, 2.0 / 3.0, 1e-5)
        assert_array_equal(out, ref)

    def test_constant_inputs(self):
        x = np.full((1, 9, 4), 0.2)
        y = np.full((1, 9, 4), 0.7)
        assert_allclose(adain_depth(x, y, epsilon=1e-5), 0.7, atol=1e-12)

    def test_full_bandwidth_equals_plain_adain(self):
        rng = np.random.default_rng(6)
        x = rng.random((2, 10, 7))
        y = rng.random((2, 8, 7))
        cfg = DepthWindowConfig(bandwidth_frac=1.0, stride_frac=1.0)
        assert_array_equal(adain_depth(x, y, cfg, 1e-5), adain(x, channel_stats(y), 1e-5))

    def test_style_windows_flag(self):
        rng = np.random.default_rng(7)
        x = rng.random((1, 12, 4))
        y = rng.random((1, 12, 4))
        windowed = adain_depth(x, y, DepthWindowConfig(style_windows=True), 1e-5)
        whole = adain_depth(x, y, DepthWindowConfig(style_windows=False), 1e-5)
        assert not np.array_equal(windowed, whole)

    def test_too_short(self):
        with pytest.raises(ValueError, match="height"):
            adain_depth(np.zeros((1, 2, 4)), np.zeros((1, 8, 4)))

    def test_channel_mismatch(self):
        with pytest.raises(ValueError, match="channel"):
            adain_depth(np.zeros((1, 6, 4)), np.zeros((2, 6, 4)))

    def test_window_config_validation(self):
        with pytest.raises(ValueError):
            DepthWindowConfig(bandwidth_frac=0.5, stride_frac=0.7)

    def test_narrow_windows_leave_gap(self):
        cfg = DepthWindowConfig(bandwidth_frac=0.3, stride_frac=0.3)
        with pytest.raises(ValueError, match="uncovered"):
            adain_depth(np.random.default_rng(0).random((1, 20, 4)), np.zeros((1, 20, 4)), cfg)


def _cov(x):
    flat = x.reshape(x.shape[0], -1)
    centered = flat - flat.mean(axis=1, keepdims=True)
    return centered @ centered.T / centered.shape[1]


class TestWct:
    def test_own_style_preserves_covariance(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal((4, 16, 16))
        out = wct(x, x, 0.0)
        assert np.abs(_cov(out) - _cov(x)).max() <= 1e-6

    def test_output_covariance_matches_style(self):
        rng = np.random.default_rng(9)
        x = rng.standard_normal((4, 32, 32))
        y = 0.5 * rng.standard_normal((4, 32, 32)) + 0.2
        out = wct(x, y, 1e-8)
        assert np.abs(_cov(out) - _cov(y)).max() <= 1e-4
        assert_allclose(out.reshape(4, -1).mean(axis=1), y.reshape(4, -1).mean(axis=1), atol=1e-8)

    def test_whitened_input_covariance_identity(self):
        rng = np.random.default_rng(10)
        x = rng.standard_normal((3, 40, 40))
        out = wct(x, x, 1e-8)
        # compare through covariance, not values: eigenbasis signs are arbitrary
        assert np.abs(_cov(out) - _cov(x)).max() <= 1e-6

    def test_channel_mismatch(self):
        with pytest.raises(ValueError, match="channel"):
            wct(np.zeros((2, 4, 4)), np.zeros((3, 4, 4)))

    def test_too_few_samples(self):
        with pytest.raises(ValueError, match="samples"):
            wct(np.zeros((2, 1, 1)), np.zeros((2, 4, 4)))


class TestTransferImage:
    @pytest.mark.parametrize("method", ["adain", "adain_d", "wct"])
    def test_style_equals_content(self, method):
        spec, weights = make_identity_network(2)
        img = np.random.default_rng(11).random((1, 16, 16))
        cfg = TransferConfig(method=method, epsilon=1e-12)
        out = transfer_image(img, img, spec, weights, cfg)
        assert np.abs(out - img).max() <= 1e-6

    def test_bottleneck_adain_matches_flat_pipeline(self):
        spec, weights = make_identity_network(1)
        rng = np.random.default_rng(12)
        content = rng.random((1, 8, 8))
        style = np.clip(rng.random((1, 8, 8)) * 0.5 + 0.3, 0.0, 1.0)
        cfg = TransferConfig(method="adain", epsilon=1e-5, sites=("bottleneck",))
        out = transfer_image(content, style, spec, weights, cfg)

        cb = haar_pool(content)
        sb = haar_pool(style)
        ll = adain(cb.ll, channel_stats(sb.ll), 1e-5)
        expected = np.clip(haar_unpool(cb._replace(ll=ll)), 0.0, 1.0)
        assert_allclose(out, expected, atol=1e-12)

    def test_odd_size_content_cropped_back(self):
        spec, weights = make_identity_network(2)
        rng = np.random.default_rng(13)
        content = rng.random((1, 13, 17))
        style = rng.random((1, 20, 10))
        out = transfer_image(content, style, spec, weights, TransferConfig())
        assert out.shape == content.shape
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_small_feature_heights_fall_back_to_plain_adain(self):
        # 8x8 at 2 levels leaves a 2-row bottleneck: windows coincide there
        spec, weights = make_identity_network(2)
        rng = np.random.default_rng(14)
        content = rng.random((1, 8, 8))
        style = rng.random((1, 8, 8))
        out = transfer_image(content, style, spec, weights, TransferConfig(method="adain_d"))
        assert np.all(np.isfinite(out))

    def test_unknown_site(self):
        spec, weights = make_identity_network(1)
        cfg = TransferConfig(sites=("enc7",))
        with pytest.raises(ValueError, match="unknown"):
            transfer_image(np.zeros((1, 4, 4)), np.zeros((1, 4, 4)), spec, weights, cfg)

    def test_config_validation(self):
        with pytest.raises(ValueError, match="method"):
            TransferConfig(method="magic")
        with pytest.raises(ValueError, match="epsilon"):
            TransferConfig(epsilon=0.0)


class TestHistEqualize:
    def test_two_value_image(self):
        img = np.concatenate([np.full((1, 2, 4), 0.25), np.full((1, 2, 4), 0.75)], axis=1)
        out = hist_equalize(img)
        assert_allclose(np.unique(out), [0.5, 1.0])

    def test_constant_image(self):
        out = hist_equalize(np.full((1, 5, 5), 0.4))
        assert_allclose(out, 1.0)

    def test_uniform_histogram_near_identity(self):
        img = (np.arange(256) / 255.0).reshape(1, 16, 16)
        out = hist_equalize(img)
        assert np.abs(out - img).max() <= 0.005

    def test_multichannel_rejected(self):
        with pytest.raises(ValueError, match="grayscale"):
            hist_equalize(np.zeros((3, 4, 4)))
