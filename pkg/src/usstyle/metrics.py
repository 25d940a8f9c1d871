"""Image-quality and mask-overlap metrics.

SSIM follows the canonical Gaussian-weighted formulation (11x11 window,
sigma 1.5, K1=0.01, K2=0.03) with dynamic range 1.0; PSNR uses MAX=1 and is
capped at 100 dB. Mask metrics treat any nonzero pixel as foreground.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.ndimage import correlate1d
from scipy.spatial.distance import cdist

from .core import require_tensor

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
PSNR_CAP = 100.0

_radius = SSIM_WINDOW // 2
_offsets = np.arange(-_radius, _radius + 1, dtype=np.float64)
_GAUSS = np.exp(-0.5 * (_offsets / SSIM_SIGMA) ** 2)
_GAUSS /= _GAUSS.sum()


def _windowed(img: np.ndarray) -> np.ndarray:
    """Gaussian-weighted local mean, cropped to where the window fits fully."""
    t = correlate1d(img, _GAUSS, axis=0, mode="constant")
    t = correlate1d(t, _GAUSS, axis=1, mode="constant")
    return t[_radius:-_radius, _radius:-_radius]


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean local structural similarity between two grayscale tensors."""
    a = require_tensor(a, channels=1)
    b = require_tensor(b, channels=1)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if min(a.shape[1], a.shape[2]) < SSIM_WINDOW:
        raise ValueError(
            f"image {a.shape[1]}x{a.shape[2]} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} ssim window"
        )
    x, y = a[0], b[0]
    mu_x = _windowed(x)
    mu_y = _windowed(y)
    var_x = _windowed(x * x) - mu_x * mu_x
    var_y = _windowed(y * y) - mu_y * mu_y
    cov = _windowed(x * y) - mu_x * mu_y
    c1 = SSIM_K1**2
    c2 = SSIM_K2**2
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB with MAX=1, capped at 100."""
    a = require_tensor(a)
    b = require_tensor(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_CAP
    return min(PSNR_CAP, 10.0 * math.log10(1.0 / mse))


def _as_mask(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {m.shape}")
    return m != 0


def dice(a: np.ndarray, b: np.ndarray) -> float:
    """Overlap coefficient 2|A&B| / (|A|+|B|); 1.0 when both masks are empty."""
    a, b = _as_mask(a), _as_mask(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    total = int(a.sum()) + int(b.sum())
    if total == 0:
        return 1.0
    return 2.0 * int((a & b).sum()) / total


def jaccard(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union; 1.0 when both masks are empty."""
    a, b = _as_mask(a), _as_mask(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    union = int((a | b).sum())
    if union == 0:
        return 1.0
    return int((a & b).sum()) / union


def boundary_pixels(mask: np.ndarray) -> np.ndarray:
    """Coordinates of foreground pixels with a 4-neighbor outside the foreground.

    Neighbors beyond the image edge count as background, so edge-touching
    foreground pixels are boundary.
    """
    m = _as_mask(mask)
    padded = np.pad(m, 1, constant_values=False)
    interior = (
        padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    )
    return np.argwhere(m & ~interior)


def hausdorff_boundary(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between the two masks' boundary pixel sets."""
    a, b = _as_mask(a), _as_mask(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    pa = boundary_pixels(a)
    pb = boundary_pixels(b)
    if len(pa) == 0 or len(pb) == 0:
        raise ValueError("hausdorff distance needs two non-empty masks")
    d = cdist(pa.astype(np.float64), pb.astype(np.float64))
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))
