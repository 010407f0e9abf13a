"""Flow-guided recurrent temporal denoising for low-light video.

Core pipeline: estimate optical flow between the previous refined frame
and the current one, warp the history into alignment, gate the blend per
pixel by a sigmoid of the residual, and propagate the result. Ships with
classical baselines, a Haar-wavelet texture objective, full-reference
metrics, and a seeded synthetic degradation harness.
"""

from .core import (
    AggregationParams,
    FlowField,
    Frame,
    TextureMap,
    WeightMap,
    frame_from_array,
    frame_new,
    luma,
)
from .aggregate import blend, dynamic_weight, refine_sequence, residual
from .flow import FlowParams, brightness_adjust, estimate_flow
from .quality import composite_loss, perceptual_proxy_map, psnr, ssim, tv_map
from .synth import DegradeParams, degrade_sequence, enhance_baseline, gen_scene, pseudo_gt
from .texture import dwt2_haar, idwt2_haar, texture_map
from .warp import warp_backward

__version__ = "0.1.0"

__all__ = [
    "AggregationParams",
    "DegradeParams",
    "FlowField",
    "FlowParams",
    "Frame",
    "TextureMap",
    "WeightMap",
    "blend",
    "brightness_adjust",
    "composite_loss",
    "degrade_sequence",
    "dwt2_haar",
    "dynamic_weight",
    "enhance_baseline",
    "estimate_flow",
    "frame_from_array",
    "frame_new",
    "gen_scene",
    "idwt2_haar",
    "luma",
    "perceptual_proxy_map",
    "pseudo_gt",
    "psnr",
    "refine_sequence",
    "residual",
    "ssim",
    "texture_map",
    "tv_map",
    "warp_backward",
]
