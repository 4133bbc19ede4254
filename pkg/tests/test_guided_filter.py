import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tlgc.guided_filter import GuidedFilterParams, box_mean, box_sum, compute_guide, guided_filter
from tlgc.hsi_io import DimensionMismatchError, HsiCube


def brute_guided(p, I, r, eps):
    """Direct per-window evaluation with truncated borders."""
    h, w = p.shape
    a = np.zeros((h, w))
    b = np.zeros((h, w))
    win = lambda y, x: (slice(max(y - r, 0), y + r + 1), slice(max(x - r, 0), x + r + 1))
    for y in range(h):
        for x in range(w):
            Iw, pw = I[win(y, x)], p[win(y, x)]
            cov = (Iw * pw).mean() - Iw.mean() * pw.mean()
            a[y, x] = cov / (Iw.var() + eps)
            b[y, x] = pw.mean() - a[y, x] * Iw.mean()
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            out[y, x] = a[win(y, x)].mean() * I[y, x] + b[win(y, x)].mean()
    return out


def test_hand_example_1x3():
    cube = HsiCube(np.array([[[0.0, 3.0, 0.0]]]))
    out = guided_filter(cube, np.full((1, 3), 0.5), GuidedFilterParams(1, 0.01)).data[0, 0]
    assert np.max(np.abs(out - [1.25, 4 / 3, 1.25])) <= 1e-12


@pytest.mark.parametrize("shape,r,eps", [((5, 7), 1, 0.01), ((6, 4), 2, 0.1), ((9, 9), 4, 1e-3), ((3, 11), 5, 0.0)])
def test_matches_brute_force(shape, r, eps):
    gen = np.random.default_rng(sum(shape) + r)
    p = gen.normal(size=shape)
    I = gen.uniform(size=shape)
    out = guided_filter(HsiCube(p[None]), I, GuidedFilterParams(r, eps)).data[0]
    assert np.allclose(out, brute_guided(p, I, r, eps), atol=1e-10)


def test_box_sum_counts_truncated_windows():
    assert box_sum(np.ones((3, 4)), 1).tolist() == [[4, 6, 6, 4], [6, 9, 9, 6], [4, 6, 6, 4]]


@pytest.mark.parametrize("c", [0.1, -7.3, 1e6 / 3])
def test_constant_band_exact(c):
    guide = np.random.default_rng(0).uniform(size=(6, 5))
    out = guided_filter(HsiCube(np.full((1, 6, 5), c)), guide, GuidedFilterParams(2, 0.01)).data
    assert np.all(out == c)


def test_guide_equal_band_identity():
    band = np.random.default_rng(1).uniform(size=(7, 8))
    out = guided_filter(HsiCube(band[None]), band, GuidedFilterParams(1, 0.0)).data[0]
    assert np.max(np.abs(out - band)) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3), st.integers(1, 3))
def test_linear_in_band(seed, alpha, beta, r):
    gen = np.random.default_rng(seed)
    p1, p2 = gen.normal(size=(2, 6, 7))
    I = gen.uniform(size=(6, 7))
    params = GuidedFilterParams(r, 0.01)
    f = lambda p: guided_filter(HsiCube(p[None]), I, params).data[0]
    assert np.max(np.abs(f(alpha * p1 + beta * p2) - (alpha * f(p1) + beta * f(p2)))) <= 1e-10


def test_constant_guide_matches_brute_force():
    band = np.random.default_rng(2).normal(size=(8, 8))
    out = guided_filter(HsiCube(band[None]), np.zeros((8, 8)), GuidedFilterParams(2, 0.01)).data[0]
    assert np.all(np.isfinite(out))
    assert np.allclose(out, brute_guided(band, np.zeros((8, 8)), 2, 0.01), atol=1e-12)


def test_constant_guide_output_is_weighted_average():
    # a = 0, so each output pixel averages the band with nonnegative weights summing to one
    h, w = 5, 6
    basis = np.eye(h * w).reshape(h * w, h, w)
    W = guided_filter(HsiCube(basis), np.zeros((h, w)), GuidedFilterParams(2, 0.01)).data.reshape(h * w, -1)
    assert np.all(W >= -1e-15)
    assert np.allclose(W.sum(axis=0), 1.0, atol=1e-12)


def test_bands_filtered_independently():
    gen = np.random.default_rng(3)
    data = gen.normal(size=(3, 5, 6))
    I = gen.uniform(size=(5, 6))
    together = guided_filter(HsiCube(data), I).data
    apart = [guided_filter(HsiCube(data[b:b + 1]), I).data[0] for b in (2, 0, 1)]
    assert np.array_equal(together[[2, 0, 1]], np.array(apart))


def test_guide_shape_mismatch():
    with pytest.raises(DimensionMismatchError):
        guided_filter(HsiCube(np.zeros((1, 3, 3))), np.zeros((3, 4)))


@pytest.mark.parametrize("radius,eps", [(0, 0.1), (2, -1.0)])
def test_params_validated(radius, eps):
    with pytest.raises(ValueError):
        GuidedFilterParams(radius, eps)


def test_guide_constant_cube():
    cube = HsiCube(np.broadcast_to(np.array([1.0, 2.0, 3.0])[:, None, None], (3, 4, 4)).copy())
    assert np.all(compute_guide(cube) == 0)


def test_guide_rank_one_follows_pixel_mean():
    t = np.random.default_rng(4).uniform(-1, 1, size=(4, 5))
    cube = HsiCube(np.stack([t, t]))
    guide = compute_guide(cube)
    expected = (t - t.min()) / (t.max() - t.min())
    assert np.allclose(guide, expected, atol=1e-12)


def test_guide_single_band():
    band = np.random.default_rng(5).normal(size=(3, 6))
    guide = compute_guide(HsiCube(band[None]))
    assert np.allclose(guide, (band - band.min()) / (band.max() - band.min()), atol=1e-12)


def test_guide_sign_convention():
    t = np.random.default_rng(6).normal(size=(4, 4))
    # flipping every band flips the scores; the sign rule must undo it
    a = compute_guide(HsiCube(np.stack([2 * t, t])))
    b = compute_guide(HsiCube(np.stack([-2 * t, -t])))
    assert np.allclose(a, 1 - b, atol=1e-12)
    assert guided_filter(HsiCube(np.stack([t])), a).data.shape == (1, 4, 4)


def test_box_mean_of_constant_is_exact():
    img = np.full((2, 9, 13), 0.1)
    assert np.all(box_mean(img, 3) == 0.1)
