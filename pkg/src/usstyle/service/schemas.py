"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class ImageRef(BaseModel):
    """An image either as a server-side path or as base64 PNG/PGM bytes."""

    path: Optional[str] = None
    data_b64: Optional[str] = None


class NetworkRef(BaseModel):
    """Which encoder-decoder to run: files on the server, or a built-in identity net."""

    spec_path: Optional[str] = None
    weights_path: Optional[str] = None
    identity_levels: int = Field(default=2, ge=1)


class WindowSettings(BaseModel):
    bandwidth_frac: float = 2.0 / 3.0
    stride_frac: float = 1.0 / 3.0
    style_windows: bool = True


class TransferSettings(BaseModel):
    method: Literal["adain", "adain_d", "wct"] = "adain_d"
    epsilon: float = 1e-5
    sites: Optional[list[str]] = None
    window: WindowSettings = Field(default_factory=WindowSettings)


class TransferRequest(BaseModel):
    content: ImageRef
    style: Optional[ImageRef] = None
    index_path: Optional[str] = None
    network: NetworkRef = Field(default_factory=NetworkRef)
    settings: TransferSettings = Field(default_factory=TransferSettings)
    output_path: Optional[str] = None


class TransferResponse(BaseModel):
    output_b64: Optional[str] = None
    output_path: Optional[str] = None
    style_id: Optional[int] = None
    style_path: Optional[str] = None
    timings_ms: dict[str, float]
    ssim_vs_content: float
    psnr_vs_content: float


class Candidate(BaseModel):
    id: int
    path: str
    correlation: float


class SelectRequest(BaseModel):
    content: ImageRef
    index_path: str
    k: int = Field(default=10, ge=1)


class SelectResponse(BaseModel):
    style_id: int
    style_path: str
    correlation: float
    distance: float
    content_mean: float
    content_std: float
    candidates: list[Candidate]


class IndexBuildRequest(BaseModel):
    directory: str
    output_path: str


class IndexBuildResponse(BaseModel):
    entries: int
    skipped: list[str]
    output_path: str


class SweepRequest(BaseModel):
    content: ImageRef
    index_path: str
    network: NetworkRef = Field(default_factory=NetworkRef)
    settings: TransferSettings = Field(default_factory=TransferSettings)
    metric: Literal["psnr", "ssim"] = "psnr"
    reference: Optional[ImageRef] = None


class SweepRowModel(BaseModel):
    style_id: int
    value: float
    selected: bool


class SweepResponse(BaseModel):
    rows: list[SweepRowModel]
    csv: str


class SimulateRequest(BaseModel):
    seed: int = 42
    n: int = Field(default=10, ge=1)
    variants: int = Field(default=4, ge=1)
    out_dir: str
    height: int = Field(default=96, ge=32)
    width: int = Field(default=96, ge=32)


class SimulateResponse(BaseModel):
    manifest_path: str
    originals: int
    variants: int
    masks: int


class EvaluateRequest(BaseModel):
    manifest_path: str
    network: NetworkRef = Field(default_factory=NetworkRef)
    settings: TransferSettings = Field(default_factory=TransferSettings)


class EvalRowModel(BaseModel):
    group: int
    variant: str
    method: str
    psnr: float
    ssim: float
    style_id: Optional[int] = None


class EvaluateResponse(BaseModel):
    rows: list[EvalRowModel]
    summary: dict[str, dict[str, float]]
    missing: list[str]
    csv: str


class BenchmarkRequest(BaseModel):
    sizes: list[tuple[int, int, int]] = Field(default=[(256, 64, 64)])
    repetitions: int = Field(default=11, ge=1)
    seed: int = 42


class BenchRowModel(BaseModel):
    size: str
    method: str
    median_ms: float


class BenchmarkResponse(BaseModel):
    rows: list[BenchRowModel]
    ratios: dict[str, float]
    csv: str
