"""FastAPI service exposing the transfer pipeline.

The service is stateless: every request names its own network, index and
images (as server-side paths or base64 bytes), so concurrent clients never
interfere. Library errors map to 400, missing files to 404.
"""

from __future__ import annotations

import base64
from contextlib import contextmanager

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..core import image_to_png_bytes, load_image, load_image_bytes, save_image
from ..errors import MissingFileError, UsstyleError
from ..network import NetworkSpec, WeightStore, load_spec, load_weights, make_identity_network
from ..pipeline import (
    evaluate_corpus,
    rows_to_csv,
    run_benchmark,
    run_sweep,
    run_transfer,
    select_for_image,
)
from ..styleselect import build_index, hist_correlation, load_index, save_index
from ..tgcsim import gen_corpus
from ..transfer import DepthWindowConfig, TransferConfig
from . import schemas


@contextmanager
def _as_http_errors():
    try:
        yield
    except MissingFileError as exc:
        raise HTTPException(status_code=404, detail=str(exc)) from exc
    except (UsstyleError, ValueError, OSError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


def _image(ref: schemas.ImageRef, what: str) -> np.ndarray:
    if ref.path is not None:
        return load_image(ref.path)
    if ref.data_b64 is not None:
        return load_image_bytes(base64.b64decode(ref.data_b64), origin=f"<{what} bytes>")
    raise ValueError(f"{what} image needs either a path or base64 data")


def _network(ref: schemas.NetworkRef) -> tuple[NetworkSpec, WeightStore]:
    if ref.spec_path is None and ref.weights_path is None:
        return make_identity_network(ref.identity_levels)
    if ref.spec_path is None or ref.weights_path is None:
        raise ValueError("spec_path and weights_path must be given together")
    spec = load_spec(ref.spec_path)
    return spec, load_weights(ref.weights_path, spec)


def _config(settings: schemas.TransferSettings) -> TransferConfig:
    window = DepthWindowConfig(
        bandwidth_frac=settings.window.bandwidth_frac,
        stride_frac=settings.window.stride_frac,
        style_windows=settings.window.style_windows,
    )
    sites = tuple(settings.sites) if settings.sites is not None else None
    return TransferConfig(
        method=settings.method, epsilon=settings.epsilon, window=window, sites=sites
    )


def create_app() -> FastAPI:
    app = FastAPI(title="usstyle", version=__version__)

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/index/build", response_model=schemas.IndexBuildResponse)
    def index_build(req: schemas.IndexBuildRequest) -> schemas.IndexBuildResponse:
        with _as_http_errors():
            index = build_index(req.directory)
            save_index(index, req.output_path)
            return schemas.IndexBuildResponse(
                entries=len(index.entries), skipped=index.skipped, output_path=req.output_path
            )

    @app.post("/select", response_model=schemas.SelectResponse)
    def select(req: schemas.SelectRequest) -> schemas.SelectResponse:
        with _as_http_errors():
            index = load_index(req.index_path)
            content = _image(req.content, "content")
            result = select_for_image(index, content, k=req.k)
            candidates = [
                schemas.Candidate(
                    id=entry.id,
                    path=entry.path,
                    correlation=hist_correlation(entry.histogram, result.content_hist),
                )
                for entry in result.candidates
            ]
            return schemas.SelectResponse(
                style_id=result.entry.id,
                style_path=result.entry.path,
                correlation=result.correlation,
                distance=result.distance,
                content_mean=result.content_mean,
                content_std=result.content_std,
                candidates=candidates,
            )

    @app.post("/transfer", response_model=schemas.TransferResponse)
    def transfer(req: schemas.TransferRequest) -> schemas.TransferResponse:
        with _as_http_errors():
            spec, weights = _network(req.network)
            cfg = _config(req.settings)
            content = _image(req.content, "content")
            style = _image(req.style, "style") if req.style is not None else None
            index = load_index(req.index_path) if req.index_path else None
            outcome = run_transfer(content, spec, weights, cfg, style=style, index=index)
            output_b64 = None
            if req.output_path is not None:
                save_image(outcome.output, req.output_path)
            else:
                output_b64 = base64.b64encode(image_to_png_bytes(outcome.output)).decode()
            return schemas.TransferResponse(
                output_b64=output_b64,
                output_path=req.output_path,
                style_id=outcome.style_id,
                style_path=outcome.style_path,
                timings_ms=outcome.timings_ms,
                ssim_vs_content=outcome.ssim_vs_content,
                psnr_vs_content=outcome.psnr_vs_content,
            )

    @app.post("/sweep", response_model=schemas.SweepResponse)
    def sweep(req: schemas.SweepRequest) -> schemas.SweepResponse:
        with _as_http_errors():
            spec, weights = _network(req.network)
            cfg = _config(req.settings)
            index = load_index(req.index_path)
            content = _image(req.content, "content")
            reference = _image(req.reference, "reference") if req.reference else None
            rows = run_sweep(content, index, spec, weights, cfg, req.metric, reference)
            csv_text = rows_to_csv(
                ["style_id", req.metric, "selected"],
                [(r.style_id, f"{r.value:.6f}", int(r.selected)) for r in rows],
                f"usstyle sweep metric={req.metric} method={cfg.method} styles={len(rows)}",
            )
            return schemas.SweepResponse(
                rows=[
                    schemas.SweepRowModel(style_id=r.style_id, value=r.value, selected=r.selected)
                    for r in rows
                ],
                csv=csv_text,
            )

    @app.post("/simulate", response_model=schemas.SimulateResponse)
    def simulate(req: schemas.SimulateRequest) -> schemas.SimulateResponse:
        with _as_http_errors():
            manifest = gen_corpus(
                req.seed, req.n, req.variants, req.out_dir, h=req.height, w=req.width
            )
            return schemas.SimulateResponse(
                manifest_path=str(manifest),
                originals=req.n,
                variants=req.n * req.variants,
                masks=req.n,
            )

    @app.post("/evaluate", response_model=schemas.EvaluateResponse)
    def evaluate(req: schemas.EvaluateRequest) -> schemas.EvaluateResponse:
        with _as_http_errors():
            spec, weights = _network(req.network)
            cfg = _config(req.settings)
            report = evaluate_corpus(req.manifest_path, spec, weights, cfg)
            csv_text = rows_to_csv(
                ["group", "variant", "method", "psnr", "ssim", "style_id"],
                [
                    (
                        r.group,
                        r.variant,
                        r.method,
                        f"{r.psnr:.6f}",
                        f"{r.ssim:.6f}",
                        "" if r.style_id is None else r.style_id,
                    )
                    for r in report.rows
                ],
                f"usstyle evaluate manifest={req.manifest_path} method={cfg.method}",
            )
            return schemas.EvaluateResponse(
                rows=[
                    schemas.EvalRowModel(
                        group=r.group,
                        variant=r.variant,
                        method=r.method,
                        psnr=r.psnr,
                        ssim=r.ssim,
                        style_id=r.style_id,
                    )
                    for r in report.rows
                ],
                summary=report.summary(),
                missing=report.missing,
                csv=csv_text,
            )

    @app.post("/benchmark", response_model=schemas.BenchmarkResponse)
    def benchmark(req: schemas.BenchmarkRequest) -> schemas.BenchmarkResponse:
        with _as_http_errors():
            rows, ratios = run_benchmark(req.sizes, req.repetitions, req.seed)
            csv_text = rows_to_csv(
                ["size", "method", "median_ms"],
                [(r.size, r.method, f"{r.median_ms:.3f}") for r in rows],
                f"usstyle benchmark repetitions={req.repetitions} seed={req.seed}",
            )
            return schemas.BenchmarkResponse(
                rows=[
                    schemas.BenchRowModel(size=r.size, method=r.method, median_ms=r.median_ms)
                    for r in rows
                ],
                ratios=ratios,
                csv=csv_text,
            )

    return app


app = create_app()
