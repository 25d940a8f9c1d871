"""Case-specific style image selection.

Pipeline: uniform local-binary-pattern spectrum -> normalized 59-bin
histogram -> Pearson-correlation retrieval of the top-k library entries ->
final pick by smallest |mean_s - mean_c| + |std_s - std_c| over whole-image
grayscale statistics.
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .core import channel_stats, load_image, require_tensor, to_grayscale
from .errors import UsstyleError

log = logging.getLogger(__name__)

INDEX_VERSION = 1
IMAGE_SUFFIXES = (".png", ".pgm")


@dataclass(frozen=True)
class LBPConfig:
    """Circular LBP sampling: `points` neighbors on a circle of `radius`."""

    points: int = 8
    radius: float = 3.0
    variant: str = "uniform"

    def __post_init__(self) -> None:
        if self.points < 4:
            raise ValueError(f"need at least 4 sample points, got {self.points}")
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.variant != "uniform":
            raise ValueError(f"unsupported LBP variant {self.variant!r}")

    @property
    def n_bins(self) -> int:
        # P*(P-1)+2 uniform codes plus one catch-all bin
        return self.points * (self.points - 1) + 3


@lru_cache(maxsize=None)
def _uniform_label_table(points: int) -> np.ndarray:
    """Label for every P-bit code: uniform codes (<=2 circular transitions)
    get 0..n-1 in ascending code order, the rest share the catch-all label."""
    n_codes = 1 << points
    labels = np.empty(n_codes, dtype=np.int64)
    catch_all = points * (points - 1) + 2
    next_label = 0
    for code in range(n_codes):
        rotated = ((code >> 1) | ((code & 1) << (points - 1))) & (n_codes - 1)
        transitions = bin(code ^ rotated).count("1")
        if transitions <= 2:
            labels[code] = next_label
            next_label += 1
        else:
            labels[code] = catch_all
    return labels


def lbp_spectrum(gray: np.ndarray, cfg: LBPConfig | None = None) -> np.ndarray:
    """Uniform-LBP label map of the interior pixels of a grayscale tensor.

    Every neighbor comparison (neighbor >= center) is evaluated at the four
    pixels around the sampling point and blended bilinearly; the bit is the
    majority of that blend. Interpolating the comparisons rather than the
    intensities keeps the label map exactly invariant under any strictly
    increasing intensity remap. Pixels within the sampling radius of the
    border are excluded.
    """
    cfg = cfg or LBPConfig()
    gray = require_tensor(gray, channels=1)
    img = gray[0]
    h, w = img.shape
    margin = math.ceil(cfg.radius)
    if min(h, w) <= 2 * cfg.radius + 1:
        raise ValueError(
            f"image {h}x{w} too small for LBP radius {cfg.radius} (needs > {2 * cfg.radius + 1})"
        )
    centers = img[margin : h - margin, margin : w - margin]

    def shifted(dr: int, dc: int) -> np.ndarray:
        return img[margin + dr : h - margin + dr, margin + dc : w - margin + dc]

    codes = np.zeros(centers.shape, dtype=np.int64)
    for p in range(cfg.points):
        angle = 2.0 * math.pi * p / cfg.points
        dc = round(cfg.radius * math.cos(angle), 8)
        dr = round(-cfg.radius * math.sin(angle), 8)
        r0, c0 = math.floor(dr), math.floor(dc)
        fr, fc = dr - r0, dc - c0
        blend = np.zeros(centers.shape)
        for (roff, coff, weight) in (
            (r0, c0, (1 - fr) * (1 - fc)),
            (r0, c0 + 1, (1 - fr) * fc),
            (r0 + 1, c0, fr * (1 - fc)),
            (r0 + 1, c0 + 1, fr * fc),
        ):
            if weight > 0.0:
                blend += weight * (shifted(roff, coff) >= centers)
        codes |= (blend >= 0.5).astype(np.int64) << p
    return _uniform_label_table(cfg.points)[codes]


def lbp_histogram(labels: np.ndarray, cfg: LBPConfig | None = None) -> np.ndarray:
    """Normalized label-count histogram (59 bins for 8 points)."""
    cfg = cfg or LBPConfig()
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("cannot build a histogram from an empty label map")
    counts = np.bincount(labels.ravel(), minlength=cfg.n_bins)
    return counts / labels.size


def hist_correlation(h1: np.ndarray, h2: np.ndarray) -> float:
    """Pearson correlation between two histograms' bin vectors.

    Zero-variance histograms compare as 1.0 when equal, 0.0 otherwise, to
    keep retrieval total.
    """
    h1 = np.asarray(h1, dtype=np.float64)
    h2 = np.asarray(h2, dtype=np.float64)
    if h1.shape != h2.shape:
        raise ValueError(f"histogram length mismatch: {h1.shape} vs {h2.shape}")
    d1 = h1 - h1.mean()
    d2 = h2 - h2.mean()
    denom = math.sqrt(float(d1 @ d1) * float(d2 @ d2))
    if denom == 0.0:
        return 1.0 if np.array_equal(h1, h2) else 0.0
    return float(np.clip(float(d1 @ d2) / denom, -1.0, 1.0))


@dataclass(frozen=True)
class StyleIndexEntry:
    id: int
    path: str
    histogram: np.ndarray
    mean: float
    std: float


@dataclass
class StyleIndex:
    """Ordered style library entries plus the LBP config that produced them."""

    entries: list[StyleIndexEntry] = field(default_factory=list)
    lbp: LBPConfig = field(default_factory=LBPConfig)
    skipped: list[str] = field(default_factory=list)


def describe_image(img: np.ndarray, cfg: LBPConfig) -> tuple[np.ndarray, float, float]:
    """Histogram plus whole-image grayscale mean/std for one image tensor."""
    gray = to_grayscale(img)
    hist = lbp_histogram(lbp_spectrum(gray, cfg), cfg)
    stats = channel_stats(gray)
    return hist, float(stats.mean[0]), float(stats.std[0])


def retrieve_topk(index: StyleIndex, content_hist: np.ndarray, k: int = 10) -> list[StyleIndexEntry]:
    """The k entries most correlated with the content histogram, ties by id."""
    if not index.entries:
        raise ValueError("style index is empty")
    scored = sorted(
        index.entries,
        key=lambda e: (-hist_correlation(e.histogram, content_hist), e.id),
    )
    return scored[: min(k, len(scored))]


def select_style(
    candidates: list[StyleIndexEntry], content_mean: float, content_std: float
) -> StyleIndexEntry:
    """Candidate with the smallest |mean - mean_c| + |std - std_c|, ties by id."""
    if not candidates:
        raise ValueError("no style candidates to select from")
    return min(
        candidates,
        key=lambda e: (abs(e.mean - content_mean) + abs(e.std - content_std), e.id),
    )


def build_index(directory: str | os.PathLike, cfg: LBPConfig | None = None) -> StyleIndex:
    """Index every readable image under `directory`, ids in lexicographic path order.

    Unreadable images are skipped with a warning and recorded in the index.
    """
    cfg = cfg or LBPConfig()
    root = Path(directory)
    if not root.is_dir():
        raise ValueError(f"style library directory not found: {root}")
    paths = sorted(p for p in root.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not paths:
        raise ValueError(f"no images (png/pgm) in style library directory: {root}")
    index = StyleIndex(lbp=cfg)
    for path in paths:
        try:
            hist, mean, std = describe_image(load_image(path), cfg)
        except (UsstyleError, ValueError) as exc:
            log.warning("skipping unreadable style image %s: %s", path, exc)
            index.skipped.append(str(path))
            continue
        index.entries.append(
            StyleIndexEntry(id=len(index.entries), path=str(path), histogram=hist, mean=mean, std=std)
        )
    if not index.entries:
        raise ValueError(f"no usable images in style library directory: {root}")
    return index


# --- persistence --------------------------------------------------------------
#
# Floats are emitted with %.17g so the file round-trips exactly and rebuilding
# an index over an unchanged directory reproduces identical bytes.


def _format_json(value, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(value, dict):
        items = ",\n".join(
            f'{pad}  {json.dumps(k)}: {_format_json(v, indent + 1).lstrip()}'
            for k, v in value.items()
        )
        return f"{pad}{{\n{items}\n{pad}}}"
    if isinstance(value, list):
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            return pad + "[" + ", ".join(_format_json(v).strip() for v in value) + "]"
        items = ",\n".join(_format_json(v, indent + 1) for v in value)
        return f"{pad}[\n{items}\n{pad}]"
    if isinstance(value, float):
        return pad + format(value, ".17g")
    return pad + json.dumps(value)


def save_index(index: StyleIndex, path: str | os.PathLike) -> None:
    doc = {
        "version": INDEX_VERSION,
        "lbp": {
            "points": index.lbp.points,
            "radius": float(index.lbp.radius),
            "variant": index.lbp.variant,
        },
        "entries": [
            {
                "id": e.id,
                "path": e.path,
                "hist": [float(v) for v in e.histogram],
                "mean": float(e.mean),
                "std": float(e.std),
            }
            for e in index.entries
        ],
        "skipped": list(index.skipped),
    }
    Path(path).write_text(_format_json(doc) + "\n", encoding="utf-8")


def load_index(path: str | os.PathLike) -> StyleIndex:
    p = Path(path)
    if not p.exists():
        raise ValueError(f"style index file not found: {p}")
    doc = json.loads(p.read_text(encoding="utf-8"))
    if doc.get("version") != INDEX_VERSION:
        raise ValueError(f"unsupported style index version {doc.get('version')!r} in {p}")
    cfg = LBPConfig(
        points=doc["lbp"]["points"],
        radius=doc["lbp"]["radius"],
        variant=doc["lbp"]["variant"],
    )
    entries = [
        StyleIndexEntry(
            id=e["id"],
            path=e["path"],
            histogram=np.asarray(e["hist"], dtype=np.float64),
            mean=e["mean"],
            std=e["std"],
        )
        for e in doc["entries"]
    ]
    return StyleIndex(entries=entries, lbp=cfg, skipped=list(doc.get("skipped", [])))
