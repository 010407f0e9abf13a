import numpy as np
import pytest

from flowblend.aggregate import blend, dynamic_weight, refine_sequence, residual
from flowblend.core import AggregationParams, FlowField, WeightMap, frame_from_array, frame_new
from flowblend.seqio import FormatError, write_flo

from conftest import philox


def test_residual_identical_frames():
    f = frame_new(4, 4, 3, 0.5)
    assert np.all(residual(f, f) == 0.0)


def test_residual_maximal():
    ones = frame_new(4, 4, 3, 1.0)
    zeros = frame_new(4, 4, 3, 0.0)
    assert np.all(residual(ones, zeros) == 1.0)


def test_residual_channel_mean():
    a = frame_from_array(np.stack([np.full((2, 2), v) for v in (0.5, 0.3, 0.9)]))
    b = frame_from_array(np.stack([np.full((2, 2), v) for v in (0.2, 0.3, 0.3)]))
    # per-channel diffs (0.3, 0.0, 0.6) -> mean 0.3
    assert np.allclose(residual(a, b), 0.3, atol=1e-7)


def test_residual_luma_reduction():
    a = frame_new(2, 2, 3, 0.8)
    b = frame_new(2, 2, 3, 0.3)
    assert np.allclose(residual(a, b, reduce="luma"), 0.5, atol=1e-6)


def test_residual_dimension_mismatch():
    with pytest.raises(ValueError):
        residual(frame_new(4, 4, 3, 0.5), frame_new(4, 5, 3, 0.5))


def test_dynamic_weight_point_values():
    p = AggregationParams()
    r = np.array([[0.0, 0.5, 1.0]])
    w = dynamic_weight(r, p).values[0]
    assert w[1] == pytest.approx(0.55, abs=1e-6)
    assert w[0] == pytest.approx(0.1 + 0.9 / (1 + np.exp(5.0)), abs=1e-6)
    assert w[2] == pytest.approx(0.1 + 0.9 / (1 + np.exp(-5.0)), abs=1e-6)


def test_dynamic_weight_strict_bounds_and_monotone(rng):
    p = AggregationParams()
    r = np.sort(rng.random(1000)).reshape(1, -1)
    w = dynamic_weight(r, p).values[0]
    assert np.all(w > p.c)
    assert np.all(w < 1.0)
    assert np.all(np.diff(w) >= 0)


def test_blend_weight_one_returns_current(rng):
    curr = frame_from_array(rng.random((3, 4, 4)))
    warped = frame_from_array(rng.random((3, 4, 4)))
    w = WeightMap(4, 4, np.ones((4, 4)))
    out = blend(curr, warped, w, np.ones((4, 4)))
    assert np.array_equal(out.samples, curr.samples)


def test_blend_halfway():
    curr = frame_new(4, 4, 3, 0.8)
    warped = frame_new(4, 4, 3, 0.2)
    w = WeightMap(4, 4, np.full((4, 4), 0.5))
    out = blend(curr, warped, w, np.ones((4, 4)))
    assert np.allclose(out.samples, 0.5, atol=1e-7)


def test_blend_validity_override():
    curr = frame_new(2, 2, 3, 0.9)
    warped = frame_new(2, 2, 3, 0.1)
    w = WeightMap(2, 2, np.full((2, 2), 0.1))
    validity = np.array([[0.0, 1.0], [1.0, 1.0]])
    out = blend(curr, warped, w, validity)
    assert out.samples[0, 0, 0] == pytest.approx(0.9)
    assert out.samples[0, 0, 1] == pytest.approx(0.1 * 0.9 + 0.9 * 0.1)


def test_blend_convexity(rng):
    curr = frame_from_array(rng.random((3, 6, 6)))
    warped = frame_from_array(rng.random((3, 6, 6)))
    w = WeightMap(6, 6, rng.random((6, 6)))
    out = blend(curr, warped, w, np.ones((6, 6)))
    lo = np.minimum(curr.samples, warped.samples)
    hi = np.maximum(curr.samples, warped.samples)
    assert np.all(out.samples >= lo - 1e-6)
    assert np.all(out.samples <= hi + 1e-6)


def test_single_frame_passthrough(rng):
    f = frame_from_array(rng.random((3, 16, 16)))
    outs = []
    stats = refine_sequence([f], emit=lambda t, fr: outs.append(fr))
    assert stats["frames"] == 1
    assert np.array_equal(outs[0].samples, f.samples)
    assert stats["mean_weight"] == [None]


def _zero_flo_dir(tmp_path, w, h, n_transitions):
    d = tmp_path / "flows"
    d.mkdir()
    for i in range(n_transitions):
        write_flo(FlowField(w, h, np.zeros((h, w, 2))), d / f"{i:06d}.flo")
    return d


def noisy_static_sequence(n, sigma=0.05, seed=11, size=64):
    rng = philox(seed)
    clean = np.full((3, size, size), 0.5)
    return clean, [frame_from_array(clean + rng.standard_normal(clean.shape) * sigma) for _ in range(n)]


def steady_state_ratio(clean, frames, outs, start=50):
    in_var = np.var([f.samples - clean for f in frames[start:]], axis=0).mean()
    out_var = np.var([o.samples - clean for o in outs[start:]], axis=0).mean()
    return out_var / in_var


def test_ema_variance_law(tmp_path):
    clean, frames = noisy_static_sequence(150)
    flo = _zero_flo_dir(tmp_path, 64, 64, 149)
    outs = []
    refine_sequence(
        iter(frames),
        params=AggregationParams(mode="ema", ema_lambda=0.2),
        flow_dir=flo,
        emit=lambda t, f: outs.append(f),
    )
    ratio = steady_state_ratio(clean, frames, outs)
    expected = 0.2 / 1.8
    assert abs(ratio - expected) / expected < 0.10


def test_sliding_window_variance_law():
    clean, frames = noisy_static_sequence(150)
    outs = []
    refine_sequence(
        iter(frames),
        params=AggregationParams(mode="window", window_n=5),
        emit=lambda t, f: outs.append(f),
    )
    ratio = steady_state_ratio(clean, frames, outs)
    assert abs(ratio - 0.2) / 0.2 < 0.10


def test_window_mode_warmup_is_running_mean():
    frames = [frame_new(8, 8, 3, v) for v in (0.2, 0.4, 0.9)]
    outs = []
    refine_sequence(iter(frames), params=AggregationParams(mode="window", window_n=5),
                    emit=lambda t, f: outs.append(f))
    assert np.allclose(outs[0].samples, 0.2, atol=1e-6)
    assert np.allclose(outs[1].samples, 0.3, atol=1e-6)
    assert np.allclose(outs[2].samples, 0.5, atol=1e-6)


def test_missing_flo_names_transition(tmp_path):
    _, frames = noisy_static_sequence(3, seed=1, size=16)
    flo = _zero_flo_dir(tmp_path, 16, 16, 1)
    with pytest.raises(FileNotFoundError, match="transition 1"):
        refine_sequence(iter(frames), flow_dir=flo)


def test_dimension_drift_rejected():
    frames = [frame_new(16, 16, 3, 0.5), frame_new(16, 18, 3, 0.5)]
    with pytest.raises(FormatError, match="frame 1"):
        refine_sequence(iter(frames))


def test_refine_deterministic():
    _, frames = noisy_static_sequence(10, size=32)
    runs = []
    for _ in range(2):
        outs = []
        stats = refine_sequence(iter(frames), emit=lambda t, f: outs.append(f))
        runs.append((outs, stats))
    for a, b in zip(runs[0][0], runs[1][0]):
        assert np.array_equal(a.samples, b.samples)
    assert runs[0][1] == runs[1][1]


def test_summary_stats_shape():
    _, frames = noisy_static_sequence(5, size=32)
    stats = refine_sequence(iter(frames))
    assert stats["frames"] == 5
    assert len(stats["mean_weight"]) == 5
    assert stats["mean_weight"][0] is None
    assert all(isinstance(v, float) for v in stats["mean_weight"][1:])
    assert all(isinstance(v, float) for v in stats["mean_residual"][1:])
