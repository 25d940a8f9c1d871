"""Haar wavelet pooling and unpooling with orthonormal kernels.

One pooling step maps each non-overlapping 2x2 block [[a, b], [c, d]] to
four half-resolution sub-bands:

    ll = (a + b + c + d) / 2      lh = (a + b - c - d) / 2
    hl = (a - b + c - d) / 2      hh = (a - b - c + d) / 2

The kernel entries are +-1/2, so the transform is orthonormal: unpooling
inverts pooling exactly and total energy is preserved.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .core import require_tensor


class WaveletBands(NamedTuple):
    """The four sub-bands of one pooling step, each of shape (c, h/2, w/2)."""

    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray


def haar_pool(x: np.ndarray) -> WaveletBands:
    """Split a tensor with even height/width into its four Haar sub-bands."""
    x = require_tensor(x)
    _, h, w = x.shape
    if h % 2 or w % 2:
        raise ValueError(f"haar_pool needs even height and width, got {h}x{w}")
    a = x[:, 0::2, 0::2]
    b = x[:, 0::2, 1::2]
    c = x[:, 1::2, 0::2]
    d = x[:, 1::2, 1::2]
    return WaveletBands(
        ll=(a + b + c + d) * 0.5,
        lh=(a + b - c - d) * 0.5,
        hl=(a - b + c - d) * 0.5,
        hh=(a - b - c + d) * 0.5,
    )


def haar_unpool(bands: WaveletBands) -> np.ndarray:
    """Reassemble the full-resolution tensor from its four sub-bands (exact inverse)."""
    ll, lh, hl, hh = (require_tensor(b) for b in bands)
    if not (ll.shape == lh.shape == hl.shape == hh.shape):
        raise ValueError(
            "wavelet bands must share one shape, got "
            f"{ll.shape}/{lh.shape}/{hl.shape}/{hh.shape}"
        )
    c, h, w = ll.shape
    out = np.empty((c, 2 * h, 2 * w))
    out[:, 0::2, 0::2] = (ll + lh + hl + hh) * 0.5
    out[:, 0::2, 1::2] = (ll + lh - hl - hh) * 0.5
    out[:, 1::2, 0::2] = (ll - lh + hl - hh) * 0.5
    out[:, 1::2, 1::2] = (ll - lh - hl + hh) * 0.5
    return out


def pad_to_multiple(x: np.ndarray, multiple: int) -> tuple[np.ndarray, tuple[int, int]]:
    """Edge-replicate rows/columns at the bottom/right until h and w divide `multiple`.

    Returns the padded tensor and the original (h, w) for `crop_to`.
    """
    x = require_tensor(x)
    if multiple < 1 or (multiple & (multiple - 1)):
        raise ValueError(f"padding multiple must be a power of two, got {multiple}")
    _, h, w = x.shape
    if h == 0 or w == 0:
        raise ValueError("cannot pad an empty tensor")
    ph = (-h) % multiple
    pw = (-w) % multiple
    if ph == 0 and pw == 0:
        return x, (h, w)
    return np.pad(x, ((0, 0), (0, ph), (0, pw)), mode="edge"), (h, w)


def crop_to(x: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Crop a padded tensor back to its original (h, w)."""
    h, w = shape
    return x[:, :h, :w]
