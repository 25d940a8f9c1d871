"""High-level operations tying selection, transfer and evaluation together.

Both the HTTP service and the CLI sit on top of these functions. Batch
operations run on a thread pool sized by the USSTYLE_THREADS environment
variable; result rows are always ordered by input, not by completion.
"""

from __future__ import annotations

import csv
import io
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import channel_stats, load_image, to_grayscale
from .errors import UsstyleError
from .metrics import psnr, ssim
from .network import NetworkSpec, WeightStore
from .styleselect import (
    LBPConfig,
    StyleIndex,
    StyleIndexEntry,
    describe_image,
    hist_correlation,
    lbp_histogram,
    lbp_spectrum,
    retrieve_topk,
    select_style,
)
from .tgcsim import load_manifest
from .transfer import TransferConfig, adain, adain_depth, hist_equalize, transfer_image, wct


def thread_count() -> int:
    """Worker count for batch operations, capped by USSTYLE_THREADS."""
    cap = os.environ.get("USSTYLE_THREADS")
    if cap is not None:
        try:
            return max(1, int(cap))
        except ValueError:
            raise ValueError(f"USSTYLE_THREADS must be an integer, got {cap!r}") from None
    return min(4, os.cpu_count() or 1)


def _map_ordered(fn: Callable, items: Sequence) -> list:
    workers = thread_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def rows_to_csv(header: Sequence[str], rows: Iterable[Sequence], comment: str) -> str:
    """CSV text with a single `#` comment line on top; bytes are deterministic."""
    buf = io.StringIO()
    buf.write(f"# {comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


@dataclass
class SelectionResult:
    entry: StyleIndexEntry
    candidates: list[StyleIndexEntry]
    correlation: float
    distance: float
    content_mean: float
    content_std: float
    content_hist: np.ndarray


def select_for_image(index: StyleIndex, image: np.ndarray, k: int = 10) -> SelectionResult:
    """Retrieve the top-k correlated library entries, then pick by statistics."""
    gray = to_grayscale(image)
    hist = lbp_histogram(lbp_spectrum(gray, index.lbp), index.lbp)
    stats = channel_stats(gray)
    mean, std = float(stats.mean[0]), float(stats.std[0])
    candidates = retrieve_topk(index, hist, k)
    entry = select_style(candidates, mean, std)
    return SelectionResult(
        entry=entry,
        candidates=candidates,
        correlation=hist_correlation(entry.histogram, hist),
        distance=abs(entry.mean - mean) + abs(entry.std - std),
        content_mean=mean,
        content_std=std,
        content_hist=hist,
    )


@dataclass
class TransferOutcome:
    output: np.ndarray
    style_id: int | None
    style_path: str | None
    timings_ms: dict[str, float]
    ssim_vs_content: float
    psnr_vs_content: float


def run_transfer(
    content: np.ndarray,
    spec: NetworkSpec,
    weights: WeightStore,
    cfg: TransferConfig,
    style: np.ndarray | None = None,
    index: StyleIndex | None = None,
) -> TransferOutcome:
    """Transfer `content` against an explicit style or an index-selected one."""
    timings: dict[str, float] = {}
    style_id = None
    style_path = None
    if style is None:
        if index is None:
            raise ValueError("need either an explicit style image or a style index")
        t0 = time.perf_counter()
        selection = select_for_image(index, content)
        style_id = selection.entry.id
        style_path = selection.entry.path
        style = load_image(style_path)
        timings["select_ms"] = 1e3 * (time.perf_counter() - t0)
    t0 = time.perf_counter()
    output = transfer_image(content, style, spec, weights, cfg)
    timings["transfer_ms"] = 1e3 * (time.perf_counter() - t0)
    t0 = time.perf_counter()
    quality_ssim = ssim(to_grayscale(output), to_grayscale(content))
    quality_psnr = psnr(output, content)
    timings["metrics_ms"] = 1e3 * (time.perf_counter() - t0)
    return TransferOutcome(
        output=output,
        style_id=style_id,
        style_path=style_path,
        timings_ms=timings,
        ssim_vs_content=quality_ssim,
        psnr_vs_content=quality_psnr,
    )


@dataclass
class SweepRow:
    style_id: int
    value: float
    selected: bool


def run_sweep(
    content: np.ndarray,
    index: StyleIndex,
    spec: NetworkSpec,
    weights: WeightStore,
    cfg: TransferConfig,
    metric: str = "psnr",
    reference: np.ndarray | None = None,
) -> list[SweepRow]:
    """Transfer against every library style, scored against `reference`.

    Rows come back sorted by metric descending (ties by ascending id) with
    the selector's choice marked. Reference defaults to the content itself.
    """
    if metric not in ("psnr", "ssim"):
        raise ValueError(f"unknown sweep metric {metric!r}")
    ref = content if reference is None else reference
    selected_id = select_for_image(index, content).entry.id

    def score(entry: StyleIndexEntry) -> SweepRow:
        out = transfer_image(content, load_image(entry.path), spec, weights, cfg)
        if metric == "psnr":
            value = psnr(out, ref)
        else:
            value = ssim(to_grayscale(out), to_grayscale(ref))
        return SweepRow(style_id=entry.id, value=value, selected=entry.id == selected_id)

    rows = _map_ordered(score, index.entries)
    rows.sort(key=lambda r: (-r.value, r.style_id))
    return rows


def index_from_images(
    paths: Sequence[str | os.PathLike], cfg: LBPConfig | None = None
) -> StyleIndex:
    """In-memory style index over an explicit list of image paths (id = position)."""
    cfg = cfg or LBPConfig()

    def describe(item: tuple[int, str | os.PathLike]) -> StyleIndexEntry:
        i, path = item
        hist, mean, std = describe_image(load_image(path), cfg)
        return StyleIndexEntry(id=i, path=str(path), histogram=hist, mean=mean, std=std)

    entries = _map_ordered(describe, list(enumerate(paths)))
    return StyleIndex(entries=entries, lbp=cfg)


EVAL_METHODS = ("none", "he", "transfer")


@dataclass
class EvalRow:
    group: int
    variant: str
    method: str
    psnr: float
    ssim: float
    style_id: int | None = None


@dataclass
class EvalReport:
    rows: list[EvalRow] = field(default_factory=list)
    missing: list[str] = field(default_factory=list)

    def summary(self) -> dict[str, dict[str, float]]:
        out: dict[str, dict[str, float]] = {}
        for method in EVAL_METHODS:
            p = np.array([r.psnr for r in self.rows if r.method == method])
            s = np.array([r.ssim for r in self.rows if r.method == method])
            if p.size:
                out[method] = {
                    "psnr_mean": float(p.mean()),
                    "psnr_std": float(p.std()),
                    "ssim_mean": float(s.mean()),
                    "ssim_std": float(s.std()),
                }
        return out


def evaluate_corpus(
    manifest_path: str | os.PathLike,
    spec: NetworkSpec,
    weights: WeightStore,
    cfg: TransferConfig,
    lbp_cfg: LBPConfig | None = None,
) -> EvalReport:
    """Score every corpus variant against its original: raw, equalized, transferred.

    The style library is the corpus' own originals. Missing files are reported
    and skipped; the run continues.
    """
    manifest_path = Path(manifest_path)
    manifest = load_manifest(manifest_path)
    root = manifest_path.parent
    report = EvalReport()

    present_originals = []
    for group in manifest["groups"]:
        path = root / group["original"]
        if path.exists():
            present_originals.append(path)
        else:
            report.missing.append(str(path))
    if not present_originals:
        raise UsstyleError(f"corpus has no readable originals under {root}")
    index = index_from_images(present_originals, lbp_cfg)

    jobs = []
    for gi, group in enumerate(manifest["groups"]):
        original_path = root / group["original"]
        if not original_path.exists():
            continue
        for name in group["variants"]:
            jobs.append((gi, original_path, name))

    def score(job: tuple[int, Path, str]) -> list[EvalRow] | str:
        gi, original_path, name = job
        variant_path = root / name
        if not variant_path.exists():
            return str(variant_path)
        original = load_image(original_path)
        variant = load_image(variant_path)
        rows = [
            EvalRow(gi, name, "none", psnr(variant, original), ssim(variant, original)),
        ]
        equalized = hist_equalize(variant)
        rows.append(EvalRow(gi, name, "he", psnr(equalized, original), ssim(equalized, original)))
        selection = select_for_image(index, variant)
        out = transfer_image(variant, load_image(selection.entry.path), spec, weights, cfg)
        rows.append(
            EvalRow(
                gi, name, "transfer",
                psnr(out, original), ssim(out, original),
                style_id=selection.entry.id,
            )
        )
        return rows

    for result in _map_ordered(score, jobs):
        if isinstance(result, str):
            report.missing.append(result)
        else:
            report.rows.extend(result)
    return report


BENCH_METHODS = ("adain", "adain_d", "wct")


@dataclass
class BenchRow:
    size: str
    method: str
    median_ms: float


def run_benchmark(
    sizes: Sequence[tuple[int, int, int]],
    repetitions: int = 11,
    seed: int = 42,
) -> tuple[list[BenchRow], dict[str, float]]:
    """Median block runtimes of the three transforms on random feature maps.

    Returns the rows plus the wct/adain median ratio per size.
    """
    if repetitions < 1:
        raise ValueError("need at least one repetition")
    rows: list[BenchRow] = []
    ratios: dict[str, float] = {}
    rng = np.random.default_rng(seed)
    for c, h, w in sizes:
        x = rng.standard_normal((c, h, w))
        y = rng.standard_normal((c, h, w))
        label = f"{c}x{h}x{w}"
        medians: dict[str, float] = {}
        for method in BENCH_METHODS:
            samples = []
            for _ in range(repetitions):
                t0 = time.perf_counter()
                if method == "adain":
                    adain(x, channel_stats(y))
                elif method == "adain_d":
                    adain_depth(x, y)
                else:
                    wct(x, y)
                samples.append(1e3 * (time.perf_counter() - t0))
            medians[method] = float(np.median(samples))
            rows.append(BenchRow(size=label, method=method, median_ms=medians[method]))
        ratios[label] = medians["wct"] / medians["adain"]
    return rows, ratios
