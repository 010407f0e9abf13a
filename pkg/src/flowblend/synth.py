"""Desk-scale experiment material: procedurally generated clean scenes,
synthetic low-light degradation (gamma-crushed gain plus read/shot
noise), static-region pseudo ground truth, and non-learned enhancement
baselines. Every operation is bit-reproducible from its seed."""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .core import Frame, frame_from_array, luma_plane

SCENE_KINDS = ("static-texture", "moving-square", "panning-texture")


@dataclass(frozen=True)
class DegradeParams:
    gain: float = 0.15
    gamma: float = 2.2
    read_sigma: float = 0.03
    shot_k: float = 0.02
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.gain <= 1.0):
            raise ValueError(f"gain must lie in (0, 1], got {self.gain}")
        if self.gamma < 1.0:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")
        if self.read_sigma < 0 or self.shot_k < 0:
            raise ValueError("noise parameters must be non-negative")
        if not (0 <= self.seed < 2 ** 64):
            raise ValueError("seed must be an unsigned 64-bit integer")


def _frame_rng(seed, frame_index):
    # counter-based generator keyed per (seed, frame) so any frame is
    # reproducible in isolation; within a frame the Philox counter stream
    # assigns samples by position
    key = np.array([seed, frame_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def degrade_frame(frame, params, frame_index):
    """Low-light degradation of one frame: (gain*x)^gamma plus Gaussian
    noise with variance read_sigma^2 + shot_k*gain*x, clamped to [0, 1]."""
    x = frame.samples.astype(np.float64)
    signal = (params.gain * x) ** params.gamma
    var = params.read_sigma ** 2 + params.shot_k * params.gain * x
    if params.read_sigma == 0.0 and params.shot_k == 0.0:
        noisy = signal
    else:
        rng = _frame_rng(params.seed, frame_index)
        noisy = signal + rng.standard_normal(x.shape) * np.sqrt(var)
    return Frame(frame.width, frame.height, frame.channels, noisy.astype(np.float32))


def degrade_sequence(frames, params):
    """Lazy degradation of a frame iterable; frame t uses key (seed, t)."""
    for t, frame in enumerate(frames):
        yield degrade_frame(frame, params, t)


def _smooth_texture(width, height, seed, lo, hi, smoothness=1.2):
    rng = _frame_rng(seed, 0xFFFFFFFF)
    base = rng.standard_normal((3, height, width))
    base = gaussian_filter(base, sigma=(0, smoothness, smoothness), mode="wrap")
    bmin, bmax = base.min(), base.max()
    if bmax - bmin < 1e-12:
        return np.full_like(base, (lo + hi) / 2.0)
    return lo + (hi - lo) * (base - bmin) / (bmax - bmin)


def square_position(width, t, x0=None, step=5):
    """Top-left column of the moving square at frame t (wraps around)."""
    if x0 is None:
        x0 = width // 8
    return (x0 + step * t) % width


def gen_scene(kind, width, height, n_frames, seed):
    """Deterministic clean test scenes.

    static-texture: one smooth seeded texture repeated every frame.
    moving-square: a bright square translating +5 px/frame (wrap-around)
    over a dark static texture.
    panning-texture: the whole texture translating (+2, +1) px/frame.
    """
    if width < 16 or height < 16:
        raise ValueError(f"scene must be at least 16x16, got {width}x{height}")
    if n_frames < 1:
        raise ValueError(f"need at least one frame, got {n_frames}")
    if kind == "static-texture":
        base = _smooth_texture(width, height, seed, 0.05, 0.50)
        frame = frame_from_array(base)
        return [frame] * n_frames
    if kind == "moving-square":
        base = _smooth_texture(width, height, seed, 0.0, 0.15, smoothness=2.0)
        side = max(8, min(width, height) // 4)
        y0 = height // 2 - side // 2
        frames = []
        for t in range(n_frames):
            a = base.copy()
            x0 = square_position(width, t)
            cols = (x0 + np.arange(side)) % width
            a[:, y0:y0 + side][:, :, cols] = 1.0
            frames.append(frame_from_array(a))
        return frames
    if kind == "panning-texture":
        base = _smooth_texture(width, height, seed, 0.05, 0.50)
        return [
            frame_from_array(np.roll(base, shift=(t, 2 * t), axis=(1, 2)))
            for t in range(n_frames)
        ]
    raise ValueError(f"unknown scene kind {kind!r}, expected one of {SCENE_KINDS}")


def pseudo_gt(frames, roi):
    """Per-pixel temporal mean of a static ROI: (x, y, w, h) -> Frame crop."""
    frames = list(frames)
    if len(frames) < 2:
        raise ValueError(f"need at least 2 frames, got {len(frames)}")
    x, y, w, h = roi
    first = frames[0]
    if x < 0 or y < 0 or w < 1 or h < 1 or x + w > first.width or y + h > first.height:
        raise ValueError(f"roi {roi} outside {first.width}x{first.height} frame")
    acc = np.zeros((first.channels, h, w), dtype=np.float64)
    for f in frames:
        acc += f.samples[:, y:y + h, x:x + w].astype(np.float64)
    acc /= len(frames)
    return Frame(w, h, first.channels, acc.astype(np.float32))


@dataclass(frozen=True)
class Identity:
    pass


@dataclass(frozen=True)
class HistStretch:
    p_lo: float = 1.0
    p_hi: float = 99.0

    def __post_init__(self):
        if not (0.0 <= self.p_lo < self.p_hi <= 100.0):
            raise ValueError(f"need 0 <= p_lo < p_hi <= 100, got ({self.p_lo}, {self.p_hi})")


@dataclass(frozen=True)
class Gamma:
    g: float = 2.2

    def __post_init__(self):
        if self.g <= 0:
            raise ValueError(f"gamma must be positive, got {self.g}")


def enhance_baseline(frame, method):
    """Non-learned brightness restoration; returns (frame, degenerate_flag).

    HistStretch maps the low/high luma percentiles affinely to [0, 1] per
    channel (degenerate percentiles leave the frame unchanged and set the
    flag); Gamma applies x^(1/g); Identity passes through.
    """
    if isinstance(method, Identity):
        return frame, False
    if isinstance(method, Gamma):
        out = frame.samples.astype(np.float64) ** (1.0 / method.g)
        return Frame(frame.width, frame.height, frame.channels, out.astype(np.float32)), False
    if isinstance(method, HistStretch):
        y = luma_plane(frame)
        lo, hi = np.percentile(y, [method.p_lo, method.p_hi])
        if hi - lo < 1e-12:
            return frame, True
        out = (frame.samples.astype(np.float64) - lo) / (hi - lo)
        return Frame(frame.width, frame.height, frame.channels, out.astype(np.float32)), False
    raise ValueError(f"unknown enhancement method {method!r}")
