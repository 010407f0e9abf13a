"""One-level orthonormal Haar wavelet transform and the texture-complexity
map built from its detail sub-bands."""

import numpy as np
from scipy.ndimage import uniform_filter

from .core import TextureMap
from .warp import sample_bilinear

DEGENERATE_RANGE = 1e-8


def _even_pad(plane):
    h, w = plane.shape
    if h % 2:
        plane = np.concatenate([plane, plane[-1:]], axis=0)
    if w % 2:
        plane = np.concatenate([plane, plane[:, -1:]], axis=1)
    return plane


def dwt2_haar(frame):
    """One-level orthonormal 2D Haar on disjoint 2x2 blocks.

    Returns (LL, LH, HL, HH), each of shape (channels, ceil(H/2),
    ceil(W/2)); odd dimensions are edge-replicated to even first.
    """
    ll, lh, hl, hh = [], [], [], []
    for c in range(frame.channels):
        x = _even_pad(frame.samples[c].astype(np.float64))
        p = x[0::2, 0::2]
        q = x[0::2, 1::2]
        r = x[1::2, 0::2]
        s = x[1::2, 1::2]
        ll.append((p + q + r + s) / 2.0)
        lh.append((p - q + r - s) / 2.0)
        hl.append((p + q - r - s) / 2.0)
        hh.append((p - q - r + s) / 2.0)
    return tuple(np.stack(b) for b in (ll, lh, hl, hh))


def idwt2_haar(ll, lh, hl, hh):
    """Inverse of dwt2_haar; returns a raw (C, 2h, 2w) float array."""
    c, h, w = ll.shape
    out = np.empty((c, 2 * h, 2 * w), dtype=np.float64)
    out[:, 0::2, 0::2] = (ll + lh + hl + hh) / 2.0
    out[:, 0::2, 1::2] = (ll - lh + hl - hh) / 2.0
    out[:, 1::2, 0::2] = (ll + lh - hl - hh) / 2.0
    out[:, 1::2, 1::2] = (ll - lh - hl + hh) / 2.0
    return out


def _upsample2(plane, shape):
    h, w = shape
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    return sample_bilinear(plane, (xs - 0.5) / 2.0, (ys - 0.5) / 2.0)


def texture_map(frame, window=8, sigma_axis="bands"):
    """Texture-complexity map from the detail sub-bands.

    The LH/HL/HH bands of every channel are stacked; sigma_axis="bands"
    (default) takes the per-pixel standard deviation across those planes
    followed by a box-mean of the given window, sigma_axis="spatial" the
    windowed spatial deviation per plane followed by the cross-plane
    mean. The result is bilinearly upsampled to frame resolution and
    min-max normalized, so a non-degenerate map attains 0 and 1 exactly;
    a degenerate (flat) input yields an all-zero map.
    """
    if frame.width < 2 or frame.height < 2:
        raise ValueError(f"frame must be at least 2x2, got {frame.width}x{frame.height}")
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    _, lh, hl, hh = dwt2_haar(frame)
    bands = np.concatenate([lh, hl, hh], axis=0)

    if sigma_axis == "bands":
        sigma = bands.std(axis=0)
        raw = uniform_filter(sigma, size=window, mode="nearest")
    elif sigma_axis == "spatial":
        mean = uniform_filter(bands, size=(1, window, window), mode="nearest")
        mean_sq = uniform_filter(bands * bands, size=(1, window, window), mode="nearest")
        sigma = np.sqrt(np.clip(mean_sq - mean * mean, 0.0, None))
        raw = sigma.mean(axis=0)
    else:
        raise ValueError(f"sigma_axis must be 'bands' or 'spatial', got {sigma_axis!r}")

    if raw.max() - raw.min() < DEGENERATE_RANGE:
        return TextureMap(frame.width, frame.height, np.zeros((frame.height, frame.width)))

    up = _upsample2(raw, (frame.height, frame.width))
    lo, hi = up.min(), up.max()
    norm = (up - lo) / (hi - lo)
    return TextureMap(frame.width, frame.height, norm.astype(np.float32))
