"""Real-time wavelet style transfer for removing appearance shift in grayscale images."""

__version__ = "0.1.0"

from .core import ChannelStats, channel_stats, load_image, save_image, to_grayscale
from .metrics import dice, hausdorff_boundary, jaccard, psnr, ssim
from .network import NetworkSpec, WeightStore, decode, encode, make_identity_network
from .styleselect import LBPConfig, StyleIndex, build_index, load_index, save_index
from .tgcsim import GainProfile, apply_tgc, gen_corpus, gen_phantom
from .transfer import (
    DepthWindowConfig,
    TransferConfig,
    adain,
    adain_depth,
    hist_equalize,
    transfer_image,
    wct,
)
from .wavelet import WaveletBands, haar_pool, haar_unpool

__all__ = [
    "ChannelStats",
    "DepthWindowConfig",
    "GainProfile",
    "LBPConfig",
    "NetworkSpec",
    "StyleIndex",
    "TransferConfig",
    "WaveletBands",
    "WeightStore",
    "adain",
    "adain_depth",
    "apply_tgc",
    "build_index",
    "channel_stats",
    "decode",
    "dice",
    "encode",
    "gen_corpus",
    "gen_phantom",
    "haar_pool",
    "haar_unpool",
    "hausdorff_boundary",
    "hist_equalize",
    "jaccard",
    "load_image",
    "load_index",
    "make_identity_network",
    "psnr",
    "save_image",
    "save_index",
    "ssim",
    "to_grayscale",
    "transfer_image",
    "wct",
]
