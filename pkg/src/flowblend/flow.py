"""Classical dense optical flow: coarse-to-fine block matching on
brightness-adjusted luma. Deterministic by construction; learned flow can
be substituted through `.flo` files instead."""

from dataclasses import dataclass

import numpy as np

from .core import Frame, FlowField, luma_plane
from .warp import sample_bilinear

BRIGHTNESS_EPS = 1e-6
GAIN_MIN, GAIN_MAX = 0.25, 4.0


@dataclass(frozen=True)
class FlowParams:
    levels: int = 3
    block: int = 8
    radius: int = 4
    subpixel: bool = True

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError(f"levels must be >= 1, got {self.levels}")
        if self.block < 2:
            raise ValueError(f"block must be >= 2, got {self.block}")
        if self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")


def brightness_adjust(source, reference):
    """Scale source so its mean luma matches the reference's.

    Single gain g = mean(luma(ref)) / mean(luma(src)), clamped to
    [0.25, 4.0]; output clamped to [0, 1].
    """
    if (source.width, source.height) != (reference.width, reference.height):
        raise ValueError(
            f"source {source.width}x{source.height} vs reference "
            f"{reference.width}x{reference.height}"
        )
    src_mean = float(luma_plane(source).mean())
    ref_mean = float(luma_plane(reference).mean())
    g = ref_mean / max(src_mean, BRIGHTNESS_EPS)
    g = min(max(g, GAIN_MIN), GAIN_MAX)
    out = source.samples.astype(np.float64) * g
    return Frame(source.width, source.height, source.channels, out.astype(np.float32))


def _pad_to_even(plane):
    h, w = plane.shape
    if h % 2:
        plane = np.concatenate([plane, plane[-1:]], axis=0)
    if w % 2:
        plane = np.concatenate([plane, plane[:, -1:]], axis=1)
    return plane


def _downsample2(plane):
    p = _pad_to_even(plane)
    h, w = p.shape
    return p.reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3))


def _upsample_flow(dense, shape):
    """Double a coarse dense flow to a finer grid (coords and magnitudes)."""
    h, w = shape
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    gx = (xs - 0.5) / 2.0
    gy = (ys - 0.5) / 2.0
    u = sample_bilinear(dense[..., 0], gx, gy) * 2.0
    v = sample_bilinear(dense[..., 1], gx, gy) * 2.0
    return np.stack([u, v], axis=-1)


def _densify(block_flow, shape, block):
    """Bilinearly interpolate per-block vectors to a per-pixel field."""
    h, w = shape
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    gx = (xs - (block - 1) / 2.0) / block
    gy = (ys - (block - 1) / 2.0) / block
    u = sample_bilinear(block_flow[..., 0], gx, gy)
    v = sample_bilinear(block_flow[..., 1], gx, gy)
    return np.stack([u, v], axis=-1)


def _match_level(prev, curr, base_dense, block, radius, subpixel):
    """One pyramid level of block matching; returns a dense (h, w, 2) field.

    For every block, integer SAD search within `radius` of the upsampled
    coarser estimate. Ties prefer smaller total displacement, then
    row-major candidate order.
    """
    h, w = curr.shape
    hb = -(-h // block)
    wb = -(-w // block)
    hp, wp = hb * block, wb * block

    # edge-replicated coordinates so partial border blocks reuse edge pixels
    yy = np.clip(np.arange(hp), 0, h - 1)
    xx = np.clip(np.arange(wp), 0, w - 1)
    yp = yy[:, None] * np.ones(wp, dtype=np.intp)[None, :]
    xp = np.ones(hp, dtype=np.intp)[:, None] * xx[None, :]
    curr_p = curr[yp, xp]

    # per-block integer base offsets from the coarser level
    cyc = np.clip(np.arange(hb) * block + (block - 1) / 2.0, 0, h - 1).astype(np.intp)
    cxc = np.clip(np.arange(wb) * block + (block - 1) / 2.0, 0, w - 1).astype(np.intp)
    u0b = np.rint(base_dense[cyc[:, None], cxc[None, :], 0]).astype(np.intp)
    v0b = np.rint(base_dense[cyc[:, None], cxc[None, :], 1]).astype(np.intp)
    u0p = np.repeat(np.repeat(u0b, block, axis=0), block, axis=1)
    v0p = np.repeat(np.repeat(v0b, block, axis=0), block, axis=1)

    n = 2 * radius + 1
    k = n * n
    sad = np.empty((k, hb, wb), dtype=np.float64)
    mag2 = np.empty((k, hb, wb), dtype=np.float64)
    for i, dv in enumerate(range(-radius, radius + 1)):
        rows = np.clip(yp + v0p + dv, 0, h - 1)
        for j, du in enumerate(range(-radius, radius + 1)):
            cols = np.clip(xp + u0p + du, 0, w - 1)
            diff = np.abs(curr_p - prev[rows, cols])
            idx = i * n + j
            sad[idx] = diff.reshape(hb, block, wb, block).sum(axis=(1, 3))
            mag2[idx] = (u0b + du) ** 2 + (v0b + dv) ** 2

    # lexicographic argmin over (sad, displacement magnitude, candidate order)
    best_sad = sad.min(axis=0)
    tied = sad == best_sad
    mag2_masked = np.where(tied, mag2, np.inf)
    best_mag = mag2_masked.min(axis=0)
    winner = tied & (mag2_masked == best_mag)
    sel = winner.argmax(axis=0)

    dv_sel = sel // n - radius
    du_sel = sel % n - radius
    fu = np.zeros((hb, wb))
    fv = np.zeros((hb, wb))
    if subpixel:
        s0 = np.take_along_axis(sad, sel[None], axis=0)[0]
        refinable = s0 > 0.0

        du_idx = sel % n
        ok = refinable & (du_idx > 0) & (du_idx < n - 1)
        sm = np.take_along_axis(sad, np.clip(sel - 1, 0, k - 1)[None], axis=0)[0]
        sp = np.take_along_axis(sad, np.clip(sel + 1, 0, k - 1)[None], axis=0)[0]
        denom = sm - 2.0 * s0 + sp
        with np.errstate(divide="ignore", invalid="ignore"):
            off = 0.5 * (sm - sp) / denom
        fu = np.where(ok & (denom > 1e-12), np.clip(off, -0.5, 0.5), 0.0)

        dv_idx = sel // n
        ok = refinable & (dv_idx > 0) & (dv_idx < n - 1)
        sm = np.take_along_axis(sad, np.clip(sel - n, 0, k - 1)[None], axis=0)[0]
        sp = np.take_along_axis(sad, np.clip(sel + n, 0, k - 1)[None], axis=0)[0]
        denom = sm - 2.0 * s0 + sp
        with np.errstate(divide="ignore", invalid="ignore"):
            off = 0.5 * (sm - sp) / denom
        fv = np.where(ok & (denom > 1e-12), np.clip(off, -0.5, 0.5), 0.0)

    block_flow = np.stack([u0b + du_sel + fu, v0b + dv_sel + fv], axis=-1)
    return _densify(block_flow, (h, w), block)


def estimate_flow(prev, curr, params=FlowParams()):
    """Dense flow aligning prev to curr: warp_backward(prev, flow) ~ curr."""
    if (prev.width, prev.height) != (curr.width, curr.height):
        raise ValueError(
            f"prev {prev.width}x{prev.height} vs curr {curr.width}x{curr.height}"
        )
    lp = luma_plane(brightness_adjust(prev, curr))
    lc = luma_plane(curr)

    pyr_p, pyr_c = [lp], [lc]
    levels = params.levels
    while len(pyr_p) < levels and min(pyr_p[-1].shape) // 2 >= params.block:
        pyr_p.append(_downsample2(pyr_p[-1]))
        pyr_c.append(_downsample2(pyr_c[-1]))
    levels = len(pyr_p)

    dense = np.zeros(pyr_c[-1].shape + (2,), dtype=np.float64)
    for lvl in range(levels - 1, -1, -1):
        if lvl < levels - 1:
            dense = _upsample_flow(dense, pyr_c[lvl].shape)
        dense = _match_level(
            pyr_p[lvl], pyr_c[lvl], dense, params.block, params.radius, params.subpixel
        )

    bound = float(max(curr.width, curr.height))
    dense = np.clip(dense, -bound, bound)
    mag = np.hypot(dense[..., 0], dense[..., 1])
    # pull over-long vectors slightly inside the bound so neither the
    # rescale nor the float32 cast can round the magnitude back above it
    target = bound * (1.0 - 1e-6)
    over = mag > target
    if over.any():
        scale = np.where(over, target / np.maximum(mag, 1e-12), 1.0)
        dense = dense * scale[..., None]
    return FlowField(curr.width, curr.height, dense.astype(np.float32))
