"""Wavelet-corrected encoder-decoder.

The encoder alternates convolutional stages with Haar pooling: the low
frequency band stays on the trunk, the three detail bands of every level
are skipped to the decoder untouched. The decoder mirrors the encoder,
unpooling each level with the matching skip bands, so with no feature
transform configured `decode(encode(x))` reconstructs `x` exactly.

Feature transforms plug in at named sites: "enc1".."encN" (after each
encoder stage) and "bottleneck" (the trunk after the last pooling).
"""

from __future__ import annotations

import json
import math
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, NamedTuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import require_tensor
from .errors import MissingFileError, WeightFormatError
from .wavelet import WaveletBands, haar_pool, haar_unpool

SiteTransform = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Conv:
    """Same-size cross-correlation layer with zero padding."""

    name: str
    in_channels: int
    out_channels: int
    kh: int = 3
    kw: int = 3


@dataclass(frozen=True)
class Relu:
    pass


Layer = Union[Conv, Relu]


class LayerWeights(NamedTuple):
    kernel: np.ndarray  # (out, in, kh, kw) float32
    bias: np.ndarray  # (out,) float32


def _stage_channels(stage: list[Layer], c_in: int, where: str) -> int:
    c = c_in
    for layer in stage:
        if isinstance(layer, Conv):
            if layer.in_channels != c:
                raise ValueError(
                    f"channel chain broken at {where} layer {layer.name!r}: "
                    f"expects {layer.in_channels} in-channels, gets {c}"
                )
            c = layer.out_channels
    return c


@dataclass
class NetworkSpec:
    """Declarative encoder-decoder architecture.

    `encoder[i]` runs before pooling step i+1, `decoder[i]` runs after the
    matching unpooling step; both lists have exactly `levels` stages.
    """

    levels: int
    in_channels: int = 1
    encoder: list[list[Layer]] = field(default_factory=list)
    decoder: list[list[Layer]] = field(default_factory=list)
    transfer_sites: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.levels < 1:
            raise ValueError("network needs at least one wavelet level")
        if len(self.encoder) != self.levels or len(self.decoder) != self.levels:
            raise ValueError(
                f"need exactly {self.levels} encoder and decoder stages, got "
                f"{len(self.encoder)}/{len(self.decoder)}"
            )
        if not self.transfer_sites:
            self.transfer_sites = [f"enc{i}" for i in range(1, self.levels + 1)]
            self.transfer_sites.append("bottleneck")
        c = self.in_channels
        self._encoder_out = []
        for i, stage in enumerate(self.encoder, start=1):
            c = _stage_channels(stage, c, f"encoder stage {i}")
            self._encoder_out.append(c)
        # decoder runs bottleneck-first; pooling/unpooling preserve channels
        for i in range(self.levels, 0, -1):
            c = _stage_channels(self.decoder[i - 1], c, f"decoder stage {i}")
        if c != self.in_channels:
            raise ValueError(
                f"decoder must end in {self.in_channels} channel(s), ends in {c}"
            )

    def conv_layers(self) -> list[Conv]:
        layers = []
        for stage in list(self.encoder) + list(self.decoder):
            layers.extend(l for l in stage if isinstance(l, Conv))
        return layers


@dataclass
class WeightStore:
    """Loadable parameters, one (kernel, bias) pair per conv layer name."""

    entries: dict[str, LayerWeights] = field(default_factory=dict)

    def add(self, name: str, kernel: np.ndarray, bias: np.ndarray) -> None:
        kernel = np.asarray(kernel, dtype=np.float32)
        bias = np.asarray(bias, dtype=np.float32)
        if kernel.ndim != 4 or bias.ndim != 1 or bias.shape[0] != kernel.shape[0]:
            raise ValueError(f"malformed weights for layer {name!r}")
        self.entries[name] = LayerWeights(kernel, bias)

    def validate_for(self, spec: NetworkSpec) -> None:
        for conv in spec.conv_layers():
            got = self.entries.get(conv.name)
            if got is None:
                raise ValueError(f"weight store has no entry for conv layer {conv.name!r}")
            want = (conv.out_channels, conv.in_channels, conv.kh, conv.kw)
            if got.kernel.shape != want:
                raise ValueError(
                    f"kernel shape mismatch for {conv.name!r}: "
                    f"store has {got.kernel.shape}, spec wants {want}"
                )


@dataclass
class EncodedState:
    """Trunk features per transfer site plus the per-level high-frequency skips."""

    sites: dict[str, np.ndarray]
    skips: list[tuple[np.ndarray, np.ndarray, np.ndarray]]


def conv2d(x: np.ndarray, kernel: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Same-size cross-correlation with zero padding and a per-channel bias."""
    x = require_tensor(x)
    kernel = np.asarray(kernel, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64)
    _, cin, kh, kw = kernel.shape
    if x.shape[0] != cin:
        raise ValueError(f"kernel expects {cin} in-channels, tensor has {x.shape[0]}")
    pt = (kh - 1) // 2
    pl = (kw - 1) // 2
    padded = np.pad(x, ((0, 0), (pt, kh - 1 - pt), (pl, kw - 1 - pl)))
    windows = sliding_window_view(padded, (kh, kw), axis=(1, 2))
    out = np.einsum("oikl,ihwkl->ohw", kernel, windows, optimize=True)
    return out + bias[:, None, None]


def _run_stage(stage: list[Layer], x: np.ndarray, weights: WeightStore) -> np.ndarray:
    for layer in stage:
        if isinstance(layer, Conv):
            k, b = weights.entries[layer.name]
            x = conv2d(x, k, b)
        else:
            x = np.maximum(x, 0.0)
    return x


def encode(img: np.ndarray, spec: NetworkSpec, weights: WeightStore) -> EncodedState:
    """Run the encoder: conv stage, record site feature, pool, skip the details."""
    img = require_tensor(img, channels=spec.in_channels)
    weights.validate_for(spec)
    _, h, w = img.shape
    block = 1 << spec.levels
    if h % block or w % block:
        raise ValueError(
            f"encoder input must be a multiple of {block} in both dims, got {h}x{w}"
        )
    sites: dict[str, np.ndarray] = {}
    skips: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
    f = img
    for level in range(1, spec.levels + 1):
        f = _run_stage(spec.encoder[level - 1], f, weights)
        sites[f"enc{level}"] = f
        bands = haar_pool(f)
        skips.append((bands.lh, bands.hl, bands.hh))
        f = bands.ll
    sites["bottleneck"] = f
    return EncodedState(sites=sites, skips=skips)


def decode(
    state: EncodedState,
    spec: NetworkSpec,
    weights: WeightStore,
    site_transforms: Mapping[str, SiteTransform] | None = None,
) -> np.ndarray:
    """Run the decoder, applying any configured transform at each site.

    The skip bands are consumed untouched; only the trunk is ever transformed.
    """
    weights.validate_for(spec)
    transforms = dict(site_transforms or {})
    unknown = set(transforms) - set(spec.transfer_sites)
    if unknown:
        raise ValueError(f"unknown transfer sites: {sorted(unknown)}")
    if len(state.skips) != spec.levels:
        raise ValueError(
            f"encoded state has {len(state.skips)} skip levels, spec has {spec.levels}"
        )
    f = state.sites["bottleneck"]
    if "bottleneck" in transforms:
        f = transforms["bottleneck"](f)
    for level in range(spec.levels, 0, -1):
        lh, hl, hh = state.skips[level - 1]
        f = haar_unpool(WaveletBands(f, lh, hl, hh))
        site = f"enc{level}"
        if site in transforms:
            f = transforms[site](f)
        f = _run_stage(spec.decoder[level - 1], f, weights)
    return f


def make_identity_network(levels: int) -> tuple[NetworkSpec, WeightStore]:
    """Single-channel network whose conv stages are 1x1 identities.

    Encode/decode then degrade to a pure wavelet cascade, the reference
    fixture for exactness tests.
    """
    if levels < 1:
        raise ValueError("network needs at least one wavelet level")
    encoder = [[Conv(f"enc{i}_conv", 1, 1, 1, 1)] for i in range(1, levels + 1)]
    decoder = [[Conv(f"dec{i}_conv", 1, 1, 1, 1)] for i in range(1, levels + 1)]
    spec = NetworkSpec(levels=levels, in_channels=1, encoder=encoder, decoder=decoder)
    store = WeightStore()
    for conv in spec.conv_layers():
        store.add(conv.name, np.ones((1, 1, 1, 1), dtype=np.float32), np.zeros(1, dtype=np.float32))
    return spec, store


# --- serialization -----------------------------------------------------------

_MAGIC = b"WTS1"


def save_weights(store: WeightStore, path: str | os.PathLike) -> None:
    """Write a WTS1 file: magic, length-prefixed UTF-8 header, float32 LE blobs."""
    records = []
    blobs = []
    for name, (kernel, bias) in store.entries.items():
        records.append({"name": name, "kernel": list(kernel.shape), "bias": int(bias.shape[0])})
        blobs.append(kernel.astype("<f4").tobytes())
        blobs.append(bias.astype("<f4").tobytes())
    header = json.dumps(records).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def load_weights(path: str | os.PathLike, spec: NetworkSpec | None = None) -> WeightStore:
    """Read a WTS1 file back; optionally validate the shapes against a spec."""
    p = Path(path)
    if not p.exists():
        raise MissingFileError(f"weights file not found: {p}")
    raw = p.read_bytes()
    if raw[:4] != _MAGIC:
        raise WeightFormatError(f"bad magic in weights file {p}: {raw[:4]!r}")
    if len(raw) < 8:
        raise WeightFormatError(f"truncated weights file {p}: no header length")
    (hlen,) = struct.unpack("<I", raw[4:8])
    if len(raw) < 8 + hlen:
        raise WeightFormatError(f"truncated weights file {p}: header cut short")
    try:
        records = json.loads(raw[8 : 8 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise WeightFormatError(f"unreadable header in weights file {p}: {exc}") from exc
    blob = raw[8 + hlen :]
    expected = sum(math.prod(r["kernel"]) + r["bias"] for r in records)
    if len(blob) != 4 * expected:
        raise WeightFormatError(
            f"truncated weights file {p}: header declares {expected} floats, "
            f"blob holds {len(blob) // 4}"
        )
    store = WeightStore()
    offset = 0
    for rec in records:
        ksize = math.prod(rec["kernel"])
        kernel = np.frombuffer(blob, dtype="<f4", count=ksize, offset=offset)
        offset += 4 * ksize
        bias = np.frombuffer(blob, dtype="<f4", count=rec["bias"], offset=offset)
        offset += 4 * rec["bias"]
        store.add(rec["name"], kernel.reshape(rec["kernel"]), bias)
    if spec is not None:
        store.validate_for(spec)
    return store


def _layer_to_json(layer: Layer) -> dict:
    if isinstance(layer, Conv):
        return {
            "type": "conv",
            "name": layer.name,
            "in": layer.in_channels,
            "out": layer.out_channels,
            "kernel": [layer.kh, layer.kw],
        }
    return {"type": "relu"}


def _layer_from_json(doc: dict) -> Layer:
    if doc["type"] == "conv":
        return Conv(doc["name"], doc["in"], doc["out"], doc["kernel"][0], doc["kernel"][1])
    if doc["type"] == "relu":
        return Relu()
    raise ValueError(f"unknown layer type {doc['type']!r}")


def save_spec(spec: NetworkSpec, path: str | os.PathLike) -> None:
    doc = {
        "levels": spec.levels,
        "in_channels": spec.in_channels,
        "encoder": [[_layer_to_json(l) for l in stage] for stage in spec.encoder],
        "decoder": [[_layer_to_json(l) for l in stage] for stage in spec.decoder],
        "transfer_sites": list(spec.transfer_sites),
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_spec(path: str | os.PathLike) -> NetworkSpec:
    p = Path(path)
    if not p.exists():
        raise MissingFileError(f"network spec file not found: {p}")
    doc = json.loads(p.read_text(encoding="utf-8"))
    return NetworkSpec(
        levels=doc["levels"],
        in_channels=doc.get("in_channels", 1),
        encoder=[[_layer_from_json(l) for l in stage] for stage in doc["encoder"]],
        decoder=[[_layer_from_json(l) for l in stage] for stage in doc["decoder"]],
        transfer_sites=list(doc.get("transfer_sites", [])),
    )
