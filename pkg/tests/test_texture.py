import numpy as np
import pytest
from scipy.ndimage import uniform_filter

from flowblend.core import frame_from_array, frame_new
from flowblend.texture import dwt2_haar, idwt2_haar, texture_map
from flowblend.warp import sample_bilinear


def test_haar_constant_block():
    f = frame_from_array(np.ones((1, 2, 2)))
    ll, lh, hl, hh = dwt2_haar(f)
    assert ll[0, 0, 0] == pytest.approx(2.0)
    assert lh[0, 0, 0] == 0.0
    assert hl[0, 0, 0] == 0.0
    assert hh[0, 0, 0] == 0.0


def test_haar_checker_block():
    f = frame_from_array(np.array([[[1.0, 0.0], [0.0, 1.0]]]))
    ll, lh, hl, hh = dwt2_haar(f)
    assert ll[0, 0, 0] == pytest.approx(1.0)
    assert lh[0, 0, 0] == 0.0
    assert hl[0, 0, 0] == 0.0
    assert hh[0, 0, 0] == pytest.approx(1.0)


def test_haar_horizontal_edge():
    f = frame_from_array(np.array([[[1.0, 1.0], [0.0, 0.0]]]))
    ll, lh, hl, hh = dwt2_haar(f)
    assert ll[0, 0, 0] == pytest.approx(1.0)
    assert hl[0, 0, 0] == pytest.approx(1.0)
    assert lh[0, 0, 0] == 0.0
    assert hh[0, 0, 0] == 0.0


def test_haar_perfect_reconstruction(rng):
    f = frame_from_array(rng.random((3, 16, 20)))
    back = idwt2_haar(*dwt2_haar(f))
    assert np.abs(back - f.samples).max() < 1e-6


def test_haar_odd_dims_pad_then_reconstruct(rng):
    f = frame_from_array(rng.random((3, 15, 17)))
    ll, lh, hl, hh = dwt2_haar(f)
    assert ll.shape == (3, 8, 9)
    back = idwt2_haar(ll, lh, hl, hh)[:, :15, :17]
    assert np.abs(back - f.samples).max() < 1e-6


def test_haar_energy_conservation(rng):
    f = frame_from_array(rng.random((3, 32, 32)))
    bands = dwt2_haar(f)
    energy = sum(float((b * b).sum()) for b in bands)
    assert energy == pytest.approx(float((f.samples.astype(np.float64) ** 2).sum()), abs=1e-5)


def test_constant_frame_gives_zero_map():
    m = texture_map(frame_new(32, 32, 3, 0.7))
    assert np.all(m.values == 0.0)


def test_map_attains_exact_endpoints(rng):
    # left half flat, right half checkerboard: strong spatial contrast in
    # detail energy, so the normalized map must hit 0 and 1 exactly
    a = np.full((3, 32, 32), 0.5)
    checker = np.indices((32, 16)).sum(axis=0) % 2
    a[:, :, 16:] = checker * 0.9 + 0.05
    m = texture_map(frame_from_array(a))
    assert m.values.min() == 0.0
    assert m.values.max() == 1.0
    assert m.values.shape == (32, 32)


def test_map_high_where_textured(rng):
    a = np.full((3, 32, 32), 0.5)
    a[:, :, 16:] = np.indices((32, 16)).sum(axis=0) % 2 * 0.9 + 0.05
    m = texture_map(frame_from_array(a))
    assert m.values[:, 24:].mean() > 0.8
    assert m.values[:, :8].mean() < 0.2


def test_map_matches_brute_force(rng):
    f = frame_from_array(rng.random((3, 16, 16)))
    m = texture_map(f, window=4)
    _, lh, hl, hh = dwt2_haar(f)
    bands = np.concatenate([lh, hl, hh], axis=0)
    sigma = bands.std(axis=0)
    raw = uniform_filter(sigma, size=4, mode="nearest")
    ys, xs = np.mgrid[0:16, 0:16].astype(np.float64)
    up = sample_bilinear(raw, (xs - 0.5) / 2.0, (ys - 0.5) / 2.0)
    expected = (up - up.min()) / (up.max() - up.min())
    assert np.allclose(m.values, expected, atol=1e-6)


def test_map_invariant_to_brightness_offset(rng):
    base = rng.random((3, 32, 32)) * 0.5
    m1 = texture_map(frame_from_array(base))
    m2 = texture_map(frame_from_array(base + 0.3))
    assert np.allclose(m1.values, m2.values, atol=1e-5)


def test_spatial_sigma_mode_runs(rng):
    f = frame_from_array(rng.random((3, 32, 32)))
    m = texture_map(f, sigma_axis="spatial")
    assert m.values.min() == 0.0
    assert m.values.max() == 1.0


def test_texture_map_validation():
    with pytest.raises(ValueError):
        texture_map(frame_new(1, 4, 1, 0.5))
    with pytest.raises(ValueError):
        texture_map(frame_new(8, 8, 1, 0.5), window=0)
    with pytest.raises(ValueError):
        texture_map(frame_new(8, 8, 1, 0.5), sigma_axis="bogus")
