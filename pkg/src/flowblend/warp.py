"""Backward (pull) warping by a dense flow field, bilinear with edge clamp."""

import numpy as np

from .core import Frame


def sample_bilinear(plane, gx, gy):
    """Sample a 2D plane at fractional coords (gx, gy), edge-clamped.

    Exact (no interpolation arithmetic error beyond rounding) when the
    coordinates are integers.
    """
    h, w = plane.shape
    cx = np.clip(gx, 0.0, w - 1.0)
    cy = np.clip(gy, 0.0, h - 1.0)
    x0 = np.clip(np.floor(cx).astype(np.intp), 0, max(w - 2, 0))
    y0 = np.clip(np.floor(cy).astype(np.intp), 0, max(h - 2, 0))
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = cx - x0
    fy = cy - y0
    top = (1.0 - fx) * plane[y0, x0] + fx * plane[y0, x1]
    bot = (1.0 - fx) * plane[y1, x0] + fx * plane[y1, x1]
    return (1.0 - fy) * top + fy * bot


def warp_backward(frame, flow):
    """Warp frame by flow: out(x, y) = frame(x + u, y + v), bilinear.

    Source coordinates are clamped to the image rectangle; the returned
    validity mask is 1 where the pre-clamp source lies inside it.
    """
    if (frame.width, frame.height) != (flow.width, flow.height):
        raise ValueError(
            f"frame {frame.width}x{frame.height} vs flow {flow.width}x{flow.height}"
        )
    h, w = frame.height, frame.width
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    gx = xs + flow.u.astype(np.float64)
    gy = ys + flow.v.astype(np.float64)
    valid = ((gx >= 0.0) & (gx <= w - 1.0) & (gy >= 0.0) & (gy <= h - 1.0)).astype(np.float32)
    out = np.empty_like(frame.samples, dtype=np.float64)
    for c in range(frame.channels):
        out[c] = sample_bilinear(frame.samples[c].astype(np.float64), gx, gy)
    warped = Frame(w, h, frame.channels, out.astype(np.float32))
    return warped, valid
