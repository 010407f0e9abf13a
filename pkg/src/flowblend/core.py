"""Pixel-domain value types shared by every other module.

All image data lives in the unit interval. Arrays are planar
channel-major (C, H, W) float32; out-of-range writes clamp rather than
raise, since blending and warping can overshoot by sub-ULP amounts.
Instances are immutable after construction.
"""

from dataclasses import dataclass, field

import numpy as np

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def _freeze(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Frame:
    """One video frame: planar channel-major unit-interval samples."""

    width: int
    height: int
    channels: int
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"frame dimensions must be positive, got {self.width}x{self.height}")
        if self.channels not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {self.channels}")
        a = np.asarray(self.samples, dtype=np.float32)
        expected = (self.channels, self.height, self.width)
        if a.size != self.channels * self.height * self.width:
            raise ValueError(f"sample count {a.size} does not match {expected}")
        a = a.reshape(expected)
        if not np.all(np.isfinite(a)):
            raise ValueError("frame samples must be finite")
        a = np.clip(a, 0.0, 1.0)
        object.__setattr__(self, "samples", _freeze(a))

    @property
    def shape(self):
        return (self.channels, self.height, self.width)


def frame_new(width, height, channels, fill):
    """Constant-filled frame; fill must lie in [0, 1]."""
    if not (0.0 <= fill <= 1.0):
        raise ValueError(f"fill must be in [0, 1], got {fill}")
    samples = np.full((channels, height, width), fill, dtype=np.float32)
    return Frame(width, height, channels, samples)


def frame_from_array(a):
    """Frame from a (H, W), (C, H, W) or (H, W, C) array. Clamps to [0, 1]."""
    a = np.asarray(a, dtype=np.float32)
    if a.ndim == 2:
        a = a[None]
    elif a.ndim == 3 and a.shape[2] in (1, 3) and a.shape[0] not in (1, 3):
        a = np.moveaxis(a, 2, 0)
    if a.ndim != 3:
        raise ValueError(f"cannot interpret array of shape {a.shape} as a frame")
    c, h, w = a.shape
    return Frame(w, h, c, a)


def luma(frame):
    """Rec.601 luma of an RGB frame; 1-channel frames pass through."""
    if frame.channels == 1:
        return frame
    r, g, b = frame.samples
    y = LUMA_WEIGHTS[0] * r + LUMA_WEIGHTS[1] * g + LUMA_WEIGHTS[2] * b
    return Frame(frame.width, frame.height, 1, y.astype(np.float32))


def luma_plane(frame):
    """Luma as a bare float64 (H, W) plane, for internal numeric work."""
    if frame.channels == 1:
        return frame.samples[0].astype(np.float64)
    r, g, b = frame.samples.astype(np.float64)
    return LUMA_WEIGHTS[0] * r + LUMA_WEIGHTS[1] * g + LUMA_WEIGHTS[2] * b


@dataclass(frozen=True)
class FlowField:
    """Dense per-pixel displacement field, (u, v) in pixels, x-right / y-down."""

    width: int
    height: int
    vectors: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"flow dimensions must be positive, got {self.width}x{self.height}")
        a = np.asarray(self.vectors, dtype=np.float32)
        if a.size != self.width * self.height * 2:
            raise ValueError(f"vector count {a.size} does not match {self.width}x{self.height}x2")
        a = a.reshape(self.height, self.width, 2)
        if not np.all(np.isfinite(a)):
            raise ValueError("flow vectors must be finite")
        bound = float(max(self.width, self.height))
        mag = np.hypot(a[..., 0].astype(np.float64), a[..., 1].astype(np.float64))
        if mag.max(initial=0.0) > bound:
            raise ValueError(f"flow magnitude {mag.max():.3f} exceeds sanity bound {bound}")
        object.__setattr__(self, "vectors", _freeze(a))

    @property
    def u(self):
        return self.vectors[..., 0]

    @property
    def v(self):
        return self.vectors[..., 1]


def flow_zero(width, height):
    return FlowField(width, height, np.zeros((height, width, 2), dtype=np.float32))


@dataclass(frozen=True)
class WeightMap:
    """Per-pixel blend weight, values in [floor, 1]."""

    width: int
    height: int
    values: np.ndarray = field(repr=False)
    floor: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.floor < 1.0):
            raise ValueError(f"weight floor must lie in [0, 1), got {self.floor}")
        a = np.asarray(self.values, dtype=np.float32)
        if a.size != self.width * self.height:
            raise ValueError(f"value count {a.size} does not match {self.width}x{self.height}")
        a = a.reshape(self.height, self.width)
        if not np.all(np.isfinite(a)):
            raise ValueError("weights must be finite")
        a = np.clip(a, self.floor, 1.0)
        object.__setattr__(self, "values", _freeze(a))


@dataclass(frozen=True)
class TextureMap:
    """Per-pixel texture-complexity score in [0, 1]."""

    width: int
    height: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.values, dtype=np.float32)
        if a.size != self.width * self.height:
            raise ValueError(f"value count {a.size} does not match {self.width}x{self.height}")
        a = a.reshape(self.height, self.width)
        if not np.all(np.isfinite(a)):
            raise ValueError("texture values must be finite")
        a = np.clip(a, 0.0, 1.0)
        object.__setattr__(self, "values", _freeze(a))


AGGREGATION_MODES = ("dynamic", "ema", "window")


@dataclass(frozen=True)
class AggregationParams:
    """Blend-weight parameters: sigmoid steepness a, residual threshold b,
    weight floor c, plus the aggregation mode (dynamic / ema / window)."""

    a: float = 10.0
    b: float = 0.5
    c: float = 0.1
    mode: str = "dynamic"
    ema_lambda: float = 0.2
    window_n: int = 5

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError(f"steepness a must be > 0, got {self.a}")
        if not (0.0 < self.b < 1.0):
            raise ValueError(f"threshold b must lie in (0, 1), got {self.b}")
        if not (0.0 <= self.c < 1.0):
            raise ValueError(f"floor c must lie in [0, 1), got {self.c}")
        if self.mode not in AGGREGATION_MODES:
            raise ValueError(f"mode must be one of {AGGREGATION_MODES}, got {self.mode!r}")
        if self.mode == "ema" and not (0.0 < self.ema_lambda <= 1.0):
            raise ValueError(f"ema lambda must lie in (0, 1], got {self.ema_lambda}")
        if self.mode == "window" and self.window_n < 1:
            raise ValueError(f"window size must be >= 1, got {self.window_n}")
