"""Full-reference quality metrics (PSNR, SSIM) and the texture-gated
composite objective: L2 reconstruction plus a texture-weighted mix of a
multi-scale gradient detail term and total variation smoothing.

The detail term is a hand-crafted Sobel-pyramid proxy, reported as
"perceptual_proxy" everywhere; no pretrained network is involved.
"""

import numpy as np
from scipy.ndimage import correlate

from .core import luma_plane
from .texture import texture_map
from .warp import sample_bilinear

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_Y = SOBEL_X.T


def _check_dims(test, ref):
    if (test.width, test.height) != (ref.width, ref.height):
        raise ValueError(
            f"test {test.width}x{test.height} vs ref {ref.width}x{ref.height}"
        )


def psnr(test, ref):
    """10 log10(1 / MSE) over all channels; +inf when the frames match."""
    _check_dims(test, ref)
    diff = test.samples.astype(np.float64) - ref.samples.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return float("inf")
    return float(10.0 * np.log10(1.0 / mse))


def _gaussian_kernel(size, sigma):
    half = (size - 1) / 2.0
    x = np.arange(size) - half
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    k = np.outer(g, g)
    return k / k.sum()


def _filter_valid(plane, kernel):
    r = kernel.shape[0] // 2
    out = correlate(plane, kernel, mode="nearest")
    if r:
        out = out[r:-r, r:-r]
    return out


def ssim(test, ref):
    """Mean local SSIM on luma, 11x11 Gaussian window sigma 1.5, L=1."""
    _check_dims(test, ref)
    x = luma_plane(test)
    y = luma_plane(ref)
    win = min(SSIM_WINDOW, x.shape[0], x.shape[1])
    if win % 2 == 0:
        win -= 1
    kernel = _gaussian_kernel(win, SSIM_SIGMA)
    c1 = SSIM_K1 ** 2
    c2 = SSIM_K2 ** 2

    mu_x = _filter_valid(x, kernel)
    mu_y = _filter_valid(y, kernel)
    var_x = _filter_valid(x * x, kernel) - mu_x * mu_x
    var_y = _filter_valid(y * y, kernel) - mu_y * mu_y
    cov = _filter_valid(x * y, kernel) - mu_x * mu_y

    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def tv_map(frame):
    """Anisotropic total variation per pixel: mean over channels of
    |forward dx| + |forward dy|, zero difference past the last row/col."""
    x = frame.samples.astype(np.float64)
    dx = np.zeros_like(x)
    dy = np.zeros_like(x)
    dx[:, :, :-1] = np.abs(x[:, :, 1:] - x[:, :, :-1])
    dy[:, :-1, :] = np.abs(x[:, 1:, :] - x[:, :-1, :])
    return (dx + dy).mean(axis=0)


def _sobel_mag(plane):
    gx = correlate(plane, SOBEL_X, mode="nearest")
    gy = correlate(plane, SOBEL_Y, mode="nearest")
    return np.hypot(gx, gy)


def _downsample2(plane):
    h, w = plane.shape
    if h % 2:
        plane = np.concatenate([plane, plane[-1:]], axis=0)
    if w % 2:
        plane = np.concatenate([plane, plane[:, -1:]], axis=1)
    h, w = plane.shape
    return plane.reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3))


def _upsample_to(plane, shape):
    h, w = shape
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    return sample_bilinear(plane, (xs - 0.5) / 2.0, (ys - 0.5) / 2.0)


def perceptual_proxy_map(test, ref):
    """Per-pixel detail discrepancy: squared difference of Sobel gradient
    magnitudes on luma at scales 1, 1/2, 1/4, averaged at full resolution."""
    _check_dims(test, ref)
    xt = luma_plane(test)
    xr = luma_plane(ref)
    maps = []
    shapes = []
    for scale in range(3):
        d = (_sobel_mag(xt) - _sobel_mag(xr)) ** 2
        for shape in reversed(shapes):
            d = _upsample_to(d, shape)
        maps.append(d)
        if scale < 2:
            shapes.append(xt.shape)
            xt = _downsample2(xt)
            xr = _downsample2(xr)
    return np.mean(maps, axis=0)


def composite_loss(test, ref, alpha=0.5, window=8):
    """Texture-adaptive objective: mean squared error plus alpha times the
    texture-gated mix of the detail proxy (textured areas) and total
    variation of the output (flat areas). Returns (total, breakdown)."""
    _check_dims(test, ref)
    diff = test.samples.astype(np.float64) - ref.samples.astype(np.float64)
    pixel_map = (diff * diff).mean(axis=0)
    mt = texture_map(ref, window=window).values.astype(np.float64)
    proxy = perceptual_proxy_map(test, ref)
    tv = tv_map(test)

    pixel_term = float(pixel_map.mean())
    proxy_term = float((mt * proxy).mean())
    tv_term = float(((1.0 - mt) * tv).mean())
    total = pixel_term + alpha * (proxy_term + tv_term)
    return total, {
        "pixel": pixel_term,
        "perceptual_proxy": proxy_term,
        "tv": tv_term,
        "alpha": alpha,
        "total": total,
    }
