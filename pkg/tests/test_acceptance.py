"""Acceptance suite: one test per release criterion, one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines.
Every tolerance is pinned here; nothing is deferred to later calibration.
"""

import math
import time

import numpy as np
import pytest

from usstyle.core import ChannelStats, channel_stats
from usstyle.metrics import dice, hausdorff_boundary, jaccard, psnr, ssim
from usstyle.network import decode, encode, make_identity_network
from usstyle.pipeline import evaluate_corpus, run_benchmark
from usstyle.styleselect import (
    LBPConfig,
    StyleIndex,
    StyleIndexEntry,
    hist_correlation,
    lbp_histogram,
    lbp_spectrum,
    retrieve_topk,
    select_style,
)
from usstyle.tgcsim import gen_corpus
from usstyle.transfer import DepthWindowConfig, TransferConfig, adain, adain_depth, wct
from usstyle.wavelet import crop_to, haar_pool, haar_unpool, pad_to_multiple


def _report(num, name, ok, detail=""):
    tag = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[{tag}] criterion {num}: {name}{suffix}")
    assert ok, f"criterion {num} failed: {name}{suffix}"


def test_criterion_01_wavelet_exactness():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst_err = 0.0
    worst_energy = 0.0
    for _ in range(120):
        c = int(rng.integers(1, 5))
        h = 2 * int(rng.integers(1, 33))
        w = 2 * int(rng.integers(1, 33))
        x = rng.uniform(-2.0, 2.0, (c, h, w))
        bands = haar_pool(x)
        worst_err = max(worst_err, float(np.abs(haar_unpool(bands) - x).max()))
        energy_in = float(np.sum(np.square(x)))
        energy_out = sum(float(np.sum(np.square(b))) for b in bands)
        worst_energy = max(worst_energy, abs(energy_out - energy_in) / energy_in)
    elapsed = time.perf_counter() - start
    ok = worst_err <= 1e-10 and worst_energy <= 1e-12 and elapsed < 5.0
    _report(
        1, "wavelet exactness", ok,
        f"max err {worst_err:.2e}, energy rel {worst_energy:.2e}, {elapsed:.2f}s",
    )


def test_criterion_02_network_exactness():
    rng = np.random.default_rng(102)
    worst = 0.0
    for levels in (1, 2, 3):
        spec, weights = make_identity_network(levels)
        block = 1 << levels
        for h, w in [(4 * block, 4 * block), (37, 53), (block, 5 * block + 3), (61, 61)]:
            img = rng.random((1, h, w))
            padded, orig = pad_to_multiple(img, block)
            out = crop_to(decode(encode(padded, spec, weights), spec, weights), orig)
            worst = max(worst, float(np.abs(out - img).max()))
    ok = worst <= 1e-9
    _report(2, "identity-network reconstruction", ok, f"max err {worst:.2e}")


def test_criterion_03_adain_contract():
    rng = np.random.default_rng(103)
    worst_stats = 0.0
    for _ in range(50):
        c = int(rng.integers(1, 6))
        x = rng.standard_normal((c, 16, 16)) * rng.uniform(1e-3, 2.0, (c, 1, 1))
        x += rng.uniform(-1.0, 1.0, (c, 1, 1))
        target = ChannelStats(
            mean=rng.uniform(-1.0, 1.0, c), std=rng.uniform(1e-3, 3.0, c)
        )
        got = channel_stats(adain(x, target, 0.0))
        worst_stats = max(
            worst_stats,
            float(np.abs(got.mean - target.mean).max()),
            float(np.abs(got.std - target.std).max()),
        )
    x = rng.uniform(0.05, 1.0, (3, 24, 24))
    identity = adain(x, channel_stats(x), 0.0)
    rel = float((np.abs(identity - x) / np.abs(x)).max())
    ok = worst_stats <= 1e-6 and rel <= 1e-5
    _report(3, "adain stat alignment", ok, f"stat err {worst_stats:.2e}, identity rel {rel:.2e}")


def _depth_oracle(x, y, bandwidth_frac, epsilon):
    """Slice the two row windows, style each, average the shared rows."""
    h, hy = x.shape[1], y.shape[1]
    b = math.ceil(bandwidth_frac * h)
    by = math.ceil(bandwidth_frac * hy)
    top = adain(x[:, :b], channel_stats(y[:, :by]), epsilon)
    bottom = adain(x[:, h - b :], channel_stats(y[:, hy - by :]), epsilon)
    out = np.empty_like(x)
    for row in range(h):
        parts = []
        if row < b:
            parts.append(top[:, row])
        if row >= h - b:
            parts.append(bottom[:, row - (h - b)])
        out[:, row] = parts[0] if len(parts) == 1 else 0.5 * (parts[0] + parts[1])
    return out


def test_criterion_04_adain_depth_geometry():
    rng = np.random.default_rng(104)
    cfg = DepthWindowConfig()
    bitwise = True
    for h in range(3, 65):
        c = int(rng.integers(1, 4))
        x = rng.random((c, h, int(rng.integers(2, 9))))
        y = rng.random((c, int(rng.integers(3, 65)), int(rng.integers(2, 9))))
        got = adain_depth(x, y, cfg, 1e-5)
        if not np.array_equal(got, _depth_oracle(x, y, cfg.bandwidth_frac, 1e-5)):
            bitwise = False
            break
    # height 6: windows [0,4) and [2,6), rows 2-3 averaged
    b6 = math.ceil(cfg.bandwidth_frac * 6)
    x = rng.random((1, 6, 4))
    y = rng.random((1, 6, 4))
    got = adain_depth(x, y, cfg, 0.0)
    top = adain(x[:, 0:4], channel_stats(y[:, 0:4]), 0.0)
    bottom = adain(x[:, 2:6], channel_stats(y[:, 2:6]), 0.0)
    h6 = (
        b6 == 4
        and np.array_equal(got[:, 0:2], top[:, 0:2])
        and np.array_equal(got[:, 4:6], bottom[:, 2:4])
        and np.array_equal(got[:, 2:4], 0.5 * (top[:, 2:4] + bottom[:, 0:2]))
    )
    _report(4, "depth-window geometry vs slice oracle", bitwise and h6,
            "bit-for-bit H=3..64" if bitwise else "mismatch")


def test_criterion_05_wct_contract():
    rng = np.random.default_rng(105)
    worst = 0.0
    for c in (4, 8, 16):
        x = rng.standard_normal((c, 32, 32))
        y = rng.standard_normal((c, 32, 32)) * rng.uniform(0.5, 1.5, (c, 1, 1))
        out = wct(x, y, 1e-8)

        def cov(t):
            flat = t.reshape(t.shape[0], -1)
            centered = flat - flat.mean(axis=1, keepdims=True)
            return centered @ centered.T / centered.shape[1]

        worst = max(worst, float(np.abs(cov(out) - cov(y)).max()))
    ok = worst <= 1e-4
    _report(5, "wct covariance alignment", ok, f"max cov err {worst:.2e}")


def test_criterion_06_block_speedup():
    rows, ratios = run_benchmark([(256, 64, 64)], repetitions=11, seed=106)
    medians = {r.method: r.median_ms for r in rows}
    ratio = ratios["256x64x64"]
    ok = medians["adain"] <= medians["wct"] / 10.0
    _report(
        6, "adain vs wct block speed", ok,
        f"adain {medians['adain']:.2f} ms, wct {medians['wct']:.2f} ms, ratio {ratio:.1f}x",
    )


def _texture_image(rng, size=24):
    kind = rng.integers(0, 3)
    if kind == 0:
        img = rng.integers(0, 256, (size, size)) / 255.0
    elif kind == 1:
        base = rng.integers(0, 256, (size // 4, size // 4)) / 255.0
        img = np.kron(base, np.ones((4, 4)))
    else:
        ramp = np.linspace(0.0, 1.0, size)
        img = np.outer(ramp, ramp) + 0.2 * rng.random((size, size))
        img = np.clip(img / img.max(), 0.0, 1.0)
    return np.floor(img * 255.0 + 0.5)[np.newaxis] / 255.0


def test_criterion_07_selection_matches_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(107)
    cfg = LBPConfig()
    queries = 0
    agreements = 0
    for _ in range(20):
        n = int(rng.integers(50, 201))
        entries = []
        histograms = []
        for i in range(n):
            if i > 0 and rng.random() < 0.05:
                clone = int(rng.integers(0, i))  # duplicates exercise tie-breaks
                hist = histograms[clone].copy()
                mean, std = entries[clone].mean, entries[clone].std
            else:
                img = _texture_image(rng)
                hist = lbp_histogram(lbp_spectrum(img, cfg), cfg)
                stats = channel_stats(img)
                mean, std = float(stats.mean[0]), float(stats.std[0])
            histograms.append(hist)
            entries.append(
                StyleIndexEntry(id=i, path=f"mem_{i:03d}", histogram=hist, mean=mean, std=std)
            )
        index = StyleIndex(entries=entries, lbp=cfg)
        for _ in range(3):
            query = _texture_image(rng)
            q_hist = lbp_histogram(lbp_spectrum(query, cfg), cfg)
            q_stats = channel_stats(query)
            q_mean, q_std = float(q_stats.mean[0]), float(q_stats.std[0])

            got = select_style(retrieve_topk(index, q_hist, 10), q_mean, q_std)
            ranked = sorted(
                entries, key=lambda e: (-hist_correlation(e.histogram, q_hist), e.id)
            )[:10]
            want = min(
                ranked, key=lambda e: (abs(e.mean - q_mean) + abs(e.std - q_std), e.id)
            )
            queries += 1
            agreements += got.id == want.id
    elapsed = time.perf_counter() - start
    ok = agreements == queries and elapsed < 60.0
    _report(
        7, "retrieve+select equals brute force", ok,
        f"{agreements}/{queries} queries, {elapsed:.1f}s",
    )


def test_criterion_08_lbp_invariance():
    rng = np.random.default_rng(108)
    identical = True
    for _ in range(20):
        size = int(rng.integers(16, 40))
        img = rng.integers(0, 256, (1, size, size)) / 255.0
        base = lbp_spectrum(img)
        if not (
            np.array_equal(base, lbp_spectrum(img**2))
            and np.array_equal(base, lbp_spectrum(0.5 + 0.5 * img))
        ):
            identical = False
            break
    hist = lbp_histogram(lbp_spectrum(np.full((1, 20, 20), 0.6)))
    indicator = hist[57] == 1.0 and hist.sum() == pytest.approx(1.0, abs=1e-12)
    _report(8, "lbp remap invariance", identical and indicator)


def test_criterion_09_end_to_end_restoration(tmp_path):
    start = time.perf_counter()
    manifest = gen_corpus(42, 50, 4, tmp_path / "corpus", h=96, w=96)
    spec, weights = make_identity_network(2)
    report = evaluate_corpus(manifest, spec, weights, TransferConfig(method="adain_d"))
    raw = {(r.group, r.variant): r for r in report.rows if r.method == "none"}
    styled = {(r.group, r.variant): r for r in report.rows if r.method == "transfer"}
    keys = sorted(raw)
    psnr_gain = np.array([styled[k].psnr - raw[k].psnr for k in keys])
    ssim_gain = np.array([styled[k].ssim - raw[k].ssim for k in keys])
    elapsed = time.perf_counter() - start
    ok = (
        len(keys) == 200
        and psnr_gain.mean() > 0.0
        and ssim_gain.mean() > 0.0
        and (psnr_gain > 0).mean() >= 0.9
        and (ssim_gain > 0).mean() >= 0.9
        and elapsed < 300.0
    )
    _report(
        9, "corpus restoration beats no-processing", ok,
        f"psnr +{psnr_gain.mean():.2f} dB ({(psnr_gain > 0).mean():.0%} up), "
        f"ssim +{ssim_gain.mean():.4f} ({(ssim_gain > 0).mean():.0%} up), {elapsed:.0f}s",
    )


def test_criterion_10_metric_sanity():
    rng = np.random.default_rng(110)
    x = rng.random((1, 24, 24))
    ssim_self = ssim(x, x.copy())

    a = np.zeros((1, 4, 4))
    b = np.full((1, 4, 4), 0.5)  # MSE = 0.25
    psnr_quarter = psnr(a, b)

    ma = np.zeros((1, 8), dtype=np.uint8)
    mb = np.zeros((1, 8), dtype=np.uint8)
    ma[0, 0:4] = 1
    mb[0, 2:6] = 1

    ha = np.zeros((5, 6), dtype=np.uint8)
    hb = np.zeros((5, 6), dtype=np.uint8)
    ha[0, 0] = 1
    hb[3, 4] = 1

    ok = (
        abs(ssim_self - 1.0) <= 1e-9
        and abs(psnr_quarter - 6.0206) <= 1e-3
        and dice(ma, mb) == 0.5
        and jaccard(ma, mb) == 1.0 / 3.0
        and hausdorff_boundary(ha, hb) == 5.0
    )
    _report(
        10, "metric fixtures", ok,
        f"ssim self {ssim_self:.10f}, psnr(0.25) {psnr_quarter:.4f}",
    )
