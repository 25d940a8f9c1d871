"""Dense image tensors, 8-bit image I/O and per-channel statistics.

Images and feature maps are plain ``numpy.ndarray`` objects with shape
``(channels, height, width)``, float64, values in [0, 1] for images.
Tensors are treated as immutable: no public operation mutates its input.
"""

from __future__ import annotations

import io
import os
from pathlib import Path
from typing import NamedTuple

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import CorruptImageError, MissingFileError, UnsupportedFormatError

_REC601 = np.array([0.299, 0.587, 0.114])


class ChannelStats(NamedTuple):
    """Per-channel mean and population standard deviation."""

    mean: np.ndarray
    std: np.ndarray


def require_tensor(x: np.ndarray, channels: int | None = None) -> np.ndarray:
    """Check that `x` is a (c, h, w) float array, optionally with a fixed channel count."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ValueError(f"expected a (channels, height, width) tensor, got shape {x.shape}")
    if channels is not None and x.shape[0] != channels:
        raise ValueError(f"expected {channels} channel(s), got {x.shape[0]}")
    return x


def _decode(source, origin: str) -> np.ndarray:
    try:
        with Image.open(source) as im:
            fmt = im.format
            if fmt not in ("PNG", "PPM"):
                raise UnsupportedFormatError(
                    f"unsupported image format {fmt!r} in {origin} (8-bit PNG/PGM only)"
                )
            if im.mode not in ("L", "RGB"):
                raise UnsupportedFormatError(
                    f"unsupported pixel mode {im.mode!r} in {origin} (8-bit grayscale/RGB only)"
                )
            data = np.asarray(im, dtype=np.float64) / 255.0
    except UnidentifiedImageError as exc:
        raise CorruptImageError(f"cannot decode image data in {origin}") from exc
    except OSError as exc:
        raise CorruptImageError(f"corrupt or truncated image file {origin}: {exc}") from exc
    if data.ndim == 2:
        return data[np.newaxis]
    return np.ascontiguousarray(data.transpose(2, 0, 1))


def load_image(path: str | os.PathLike) -> np.ndarray:
    """Load an 8-bit PNG or binary PGM as a (c, h, w) tensor scaled to [0, 1].

    Grayscale images become c=1, RGB images c=3.
    """
    p = Path(path)
    if not p.exists():
        raise MissingFileError(f"image file not found: {p}")
    return _decode(p, str(p))


def load_image_bytes(data: bytes, origin: str = "<bytes>") -> np.ndarray:
    """Decode in-memory PNG/PGM bytes with the same contract as `load_image`."""
    return _decode(io.BytesIO(data), origin)


def quantize_u8(t: np.ndarray) -> np.ndarray:
    """Clamp to [0, 1] and quantize round-half-up: byte = floor(255*v + 0.5)."""
    t = require_tensor(t)
    return np.floor(np.clip(t, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def _to_pil(t: np.ndarray) -> Image.Image:
    data = quantize_u8(t)
    if data.shape[0] == 1:
        return Image.fromarray(data[0], mode="L")
    return Image.fromarray(data.transpose(1, 2, 0), mode="RGB")


def save_image(t: np.ndarray, path: str | os.PathLike) -> None:
    """Write a tensor as an 8-bit PNG or binary PGM, clamping to [0, 1]."""
    t = require_tensor(t)
    c = t.shape[0]
    if c not in (1, 3):
        raise ValueError(f"unsupported channel count {c} for image output (need 1 or 3)")
    p = Path(path)
    suffix = p.suffix.lower()
    if suffix == ".png":
        fmt = "PNG"
    elif suffix == ".pgm":
        if c != 1:
            raise UnsupportedFormatError(f"PGM output is grayscale-only, got {c} channels: {p}")
        fmt = "PPM"
    else:
        raise UnsupportedFormatError(f"unsupported output format {suffix!r} for {p}")
    _to_pil(t).save(p, format=fmt)


def image_to_png_bytes(t: np.ndarray) -> bytes:
    """Encode a tensor as PNG bytes (same quantization as `save_image`)."""
    c = require_tensor(t).shape[0]
    if c not in (1, 3):
        raise ValueError(f"unsupported channel count {c} for image output (need 1 or 3)")
    buf = io.BytesIO()
    _to_pil(t).save(buf, format="PNG")
    return buf.getvalue()


def to_grayscale(t: np.ndarray) -> np.ndarray:
    """Collapse an RGB tensor to one channel with Rec. 601 weights; identity for c=1."""
    t = require_tensor(t)
    c = t.shape[0]
    if c == 1:
        return t
    if c != 3:
        raise ValueError(f"unsupported channel count {c} for grayscale conversion")
    return np.tensordot(_REC601, t, axes=(0, 0))[np.newaxis]


def channel_stats(t: np.ndarray) -> ChannelStats:
    """Mean and population std of every channel over its h*w values."""
    t = require_tensor(t)
    n = t.shape[1] * t.shape[2]
    if n == 0:
        raise ValueError("cannot compute channel statistics of an empty tensor")
    mean = t.mean(axis=(1, 2))
    sumsq = np.einsum("chw,chw->c", t, t, optimize=True)
    var = np.maximum(sumsq / n - mean * mean, 0.0)
    return ChannelStats(mean=mean, std=np.sqrt(var))
