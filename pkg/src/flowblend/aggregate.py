"""The recurrent temporal refinement: residual-gated dynamic blending of
each frame with its flow-warped predecessor, plus the fixed-weight
baselines (constant-lambda EMA and unaligned sliding-window mean)."""

from collections import deque
from pathlib import Path

import numpy as np
from scipy.ndimage import median_filter

from .core import AggregationParams, Frame, WeightMap, luma_plane
from .flow import FlowParams, brightness_adjust, estimate_flow
from .seqio import FormatError, read_flo
from .warp import warp_backward


def residual(curr, warped_prev, reduce="mean"):
    """Per-pixel absolute difference, reduced over channels.

    reduce="mean" averages the per-channel absolute differences;
    reduce="luma" takes the absolute difference of the luma planes.
    """
    if (curr.width, curr.height) != (warped_prev.width, warped_prev.height):
        raise ValueError(
            f"curr {curr.width}x{curr.height} vs warped {warped_prev.width}x{warped_prev.height}"
        )
    if reduce == "luma":
        return np.abs(luma_plane(curr) - luma_plane(warped_prev))
    if reduce != "mean":
        raise ValueError(f"reduce must be 'mean' or 'luma', got {reduce!r}")
    d = np.abs(curr.samples.astype(np.float64) - warped_prev.samples.astype(np.float64))
    return d.mean(axis=0)


def dynamic_weight(r, params):
    """Residual-gated blend weight: c + (1-c) / (1 + exp(-a (R - b)))."""
    r = np.asarray(r, dtype=np.float64)
    w = params.c + (1.0 - params.c) / (1.0 + np.exp(-params.a * (r - params.b)))
    return WeightMap(r.shape[1], r.shape[0], w.astype(np.float32), floor=params.c)


def blend(curr, warped_prev, weights, validity):
    """Convex blend w*curr + (1-w)*warped_prev; w forced to 1 where the
    warp had no in-bounds source (validity 0)."""
    if (curr.width, curr.height) != (warped_prev.width, warped_prev.height):
        raise ValueError("blend inputs must share dimensions")
    w = np.asarray(weights.values, dtype=np.float64)
    if w.shape != (curr.height, curr.width):
        raise ValueError(f"weight map {w.shape} does not match frame {curr.height}x{curr.width}")
    if validity is not None:
        w = np.where(np.asarray(validity) == 0.0, 1.0, w)
    out = w * curr.samples.astype(np.float64) + (1.0 - w) * warped_prev.samples.astype(np.float64)
    return Frame(curr.width, curr.height, curr.channels, out.astype(np.float32))


def _flo_for_transition(flow_dir, index):
    path = Path(flow_dir) / f"{index:06d}.flo"
    if not path.exists():
        raise FileNotFoundError(f"no flow field for transition {index}: {path}")
    return read_flo(path)


def refine_sequence(
    frames,
    params=AggregationParams(),
    flow_params=FlowParams(),
    flow_dir=None,
    adjust_blend=True,
    residual_reduce="mean",
    median_weights=False,
    emit=None,
    tap=None,
):
    """Run the recurrence over a frame iterator.

    Frame 0 passes through unchanged. For t >= 1 in dynamic/ema modes the
    previous refined frame is brightness-adjusted to the current one,
    aligned by flow (built-in block matching, or `.flo` files named
    ``{t-1:06d}.flo`` in flow_dir), warped, and blended with a per-pixel
    weight (residual sigmoid in dynamic mode, constant lambda in ema
    mode). Window mode is the naive unaligned mean of the last N inputs.

    ``emit(t, frame)`` receives each refined frame in order; ``tap`` (if
    given) receives ``(t, info)`` with the residual / weight / validity
    arrays for inspection. Returns summary stats with per-frame mean
    weight and residual (None where undefined).
    """
    mean_weight = []
    mean_residual = []
    prev_refined = None
    dims = None
    window = deque(maxlen=params.window_n) if params.mode == "window" else None
    n = 0

    for t, curr in enumerate(frames):
        if dims is None:
            dims = (curr.width, curr.height, curr.channels)
        elif (curr.width, curr.height, curr.channels) != dims:
            raise FormatError(
                f"frame {t} is {curr.width}x{curr.height}x{curr.channels}, "
                f"sequence started as {dims[0]}x{dims[1]}x{dims[2]}"
            )

        if params.mode == "window":
            window.append(curr.samples.astype(np.float64))
            acc = np.mean(window, axis=0)
            refined = Frame(curr.width, curr.height, curr.channels, acc.astype(np.float32))
            mean_weight.append(None)
            mean_residual.append(None)
        elif t == 0:
            refined = curr
            mean_weight.append(None)
            mean_residual.append(None)
        else:
            adjusted = brightness_adjust(prev_refined, curr)
            if flow_dir is not None:
                fl = _flo_for_transition(flow_dir, t - 1)
                if (fl.width, fl.height) != (curr.width, curr.height):
                    raise FormatError(
                        f"flow for transition {t - 1} is {fl.width}x{fl.height}, "
                        f"frames are {curr.width}x{curr.height}"
                    )
            else:
                fl = estimate_flow(adjusted, curr, flow_params)
            history = adjusted if adjust_blend else prev_refined
            warped, validity = warp_backward(history, fl)
            r = residual(curr, warped, reduce=residual_reduce)
            if params.mode == "ema":
                w = WeightMap(
                    curr.width,
                    curr.height,
                    np.full((curr.height, curr.width), params.ema_lambda, dtype=np.float32),
                )
            else:
                w = dynamic_weight(r, params)
            if median_weights:
                w = WeightMap(
                    w.width,
                    w.height,
                    median_filter(w.values, size=3, mode="nearest"),
                    floor=w.floor,
                )
            refined = blend(curr, warped, w, validity)
            applied = np.where(validity == 0.0, 1.0, w.values.astype(np.float64))
            mean_weight.append(float(applied.mean()))
            mean_residual.append(float(r.mean()))
            if tap is not None:
                tap(t, {"residual": r, "weights": w, "validity": validity, "flow": fl})

        if emit is not None:
            emit(t, refined)
        prev_refined = refined
        n += 1

    if n == 0:
        raise ValueError("refine_sequence needs at least one frame")
    return {"frames": n, "mean_weight": mean_weight, "mean_residual": mean_residual}
