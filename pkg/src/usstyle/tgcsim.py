"""Synthetic depth-dependent gain shift and speckle phantoms.

The generator stands in for scanner data at desk scale: a phantom is a
speckle-textured image with one bright elliptical structure (returned with
its mask), and a gain profile multiplies each row by a piecewise-linear
depth gain, mimicking what console gain sliders do to tissue bands.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

from .core import require_tensor, save_image

GAIN_MIN = 0.4
GAIN_MAX = 1.8
_GAIN_GAP = 0.08  # one-sided profiles keep this margin from unity
_MIN_MEAN_SHIFT = 0.15  # redraw profiles whose row-averaged |gain - 1| is below this


@dataclass(frozen=True)
class GainProfile:
    """Piecewise-linear depth gain: (depth_frac, gain) control points.

    Depth fractions must be strictly increasing with endpoints 0 and 1,
    gains non-negative.
    """

    points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if len(self.points) < 2:
            raise ValueError("gain profile needs at least two control points")
        depths = [d for d, _ in self.points]
        gains = [g for _, g in self.points]
        if depths[0] != 0.0 or depths[-1] != 1.0:
            raise ValueError(f"profile must span depths 0..1, got {depths[0]}..{depths[-1]}")
        if any(b <= a for a, b in zip(depths, depths[1:])):
            raise ValueError("profile depths must be strictly increasing")
        if any(g < 0.0 for g in gains):
            raise ValueError("gains must be non-negative")

    def gains_for_rows(self, height: int) -> np.ndarray:
        depths = np.zeros(height) if height == 1 else np.arange(height) / (height - 1)
        xs = [d for d, _ in self.points]
        ys = [g for _, g in self.points]
        return np.interp(depths, xs, ys)


def apply_tgc(img: np.ndarray, profile: GainProfile) -> np.ndarray:
    """Multiply each row by the interpolated depth gain, clamped to [0, 1]."""
    img = require_tensor(img, channels=1)
    gains = profile.gains_for_rows(img.shape[1])
    return np.clip(img * gains[None, :, None], 0.0, 1.0)


def gen_phantom(seed: int, h: int, w: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic speckle phantom with one bright ellipse; returns (image, mask).

    The background level, ellipse brightness and speckle strength stay in a
    narrow band across seeds so that a library of phantoms has consistent
    whole-image statistics.
    """
    if h < 32 or w < 32:
        raise ValueError(f"phantom needs h, w >= 32, got {h}x{w}")
    rng = np.random.default_rng(seed)

    rows = np.arange(h)[:, None] / (h - 1)
    base = rng.uniform(0.34, 0.42)
    slope = rng.uniform(-0.06, 0.06)
    field = gaussian_filter(rng.standard_normal((h, w)), sigma=min(h, w) / 8.0)
    field *= 0.05 / max(np.abs(field).max(), 1e-12)
    background = base + slope * (rows - 0.5) + field

    cy = rng.uniform(0.4, 0.6) * (h - 1)
    cx = rng.uniform(0.4, 0.6) * (w - 1)
    a = rng.uniform(0.17, 0.24) * h
    b = rng.uniform(0.17, 0.24) * w
    angle = rng.uniform(0.0, np.pi)
    yy, xx = np.mgrid[0:h, 0:w]
    u = (xx - cx) * np.cos(angle) + (yy - cy) * np.sin(angle)
    v = -(xx - cx) * np.sin(angle) + (yy - cy) * np.cos(angle)
    inside = (u / b) ** 2 + (v / a) ** 2 <= 1.0
    brightness = rng.uniform(0.31, 0.36)
    img = background + brightness * inside

    speckle = 1.0 + 0.14 * gaussian_filter(rng.standard_normal((h, w)), sigma=0.8)
    img = np.clip(img * speckle, 0.0, 1.0)
    return img[np.newaxis], inside.astype(np.uint8)


def random_profile(rng: np.random.Generator) -> GainProfile:
    """Randomized one-sided profile with 3-5 control points, gains in [0.4, 1.8].

    Each profile brightens or darkens throughout (gains stay on one side of
    unity), the way a run of misadjusted depth sliders shifts whole tissue
    bands. Profiles whose row-averaged |gain - 1| is too small are redrawn
    so every variant carries a visible shift.
    """
    while True:
        n_points = int(rng.integers(3, 6))
        interior = np.sort(rng.uniform(0.1, 0.9, size=n_points - 2))
        if np.any(np.diff(interior) < 0.05):
            continue
        if rng.random() < 0.5:
            gains = rng.uniform(GAIN_MIN, 1.0 - _GAIN_GAP, size=n_points)
        else:
            gains = rng.uniform(1.0 + _GAIN_GAP, GAIN_MAX, size=n_points)
        depths = np.concatenate([[0.0], interior, [1.0]])
        row_gains = np.interp(np.linspace(0.0, 1.0, 64), depths, gains)
        if np.abs(row_gains - 1.0).mean() < _MIN_MEAN_SHIFT:
            continue
        return GainProfile(tuple(zip(depths.tolist(), gains.tolist())))


def gen_corpus(
    seed: int,
    n: int,
    variants: int,
    out_dir: str | os.PathLike,
    h: int = 96,
    w: int = 96,
) -> Path:
    """Write `n` phantom groups (original + TGC variants + mask) and a manifest.

    Regenerating with the same arguments reproduces identical bytes. Returns
    the manifest path; all manifest paths are relative to its directory.
    """
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    phantom_seeds = np.random.SeedSequence(seed).generate_state(n)
    groups = []
    for i in range(n):
        img, mask = gen_phantom(int(phantom_seeds[i]), h, w)
        original = f"phantom_{i:03d}.png"
        mask_name = f"phantom_{i:03d}_mask.png"
        save_image(img, root / original)
        save_image(mask[np.newaxis].astype(np.float64), root / mask_name)
        rng = np.random.default_rng([seed, i])
        names = []
        for k in range(variants):
            variant = apply_tgc(img, random_profile(rng))
            name = f"phantom_{i:03d}_var{k}.png"
            save_image(variant, root / name)
            names.append(name)
        groups.append({"original": original, "variants": names, "mask": mask_name})
    manifest = {"seed": seed, "height": h, "width": w, "groups": groups}
    manifest_path = root / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest_path


def load_manifest(path: str | os.PathLike) -> dict:
    p = Path(path)
    if not p.exists():
        raise ValueError(f"corpus manifest not found: {p}")
    return json.loads(p.read_text(encoding="utf-8"))
