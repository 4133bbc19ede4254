"""Guided filtering of HSI bands with truncated (in-image) windows."""

from dataclasses import dataclass

import numpy as np

from .hsi_io import DimensionMismatchError, HsiCube


@dataclass(frozen=True)
class GuidedFilterParams:
    radius: int = 4
    epsilon: float = 0.01

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("radius must be >= 1")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")


def _window_bounds(n, r):
    i = np.arange(n)
    return np.maximum(i - r, 0), np.minimum(i + r, n - 1) + 1


def box_sum(img, r):
    """Sum over the (2r+1)^2 window clipped to the image, for the last two axes."""
    h, w = img.shape[-2:]
    pad = [(0, 0)] * (img.ndim - 2) + [(1, 0), (1, 0)]
    S = np.pad(img.cumsum(-2).cumsum(-1), pad)
    r0, r1 = _window_bounds(h, r)
    c0, c1 = _window_bounds(w, r)
    return (S[..., r1[:, None], c1] - S[..., r0[:, None], c1]
            - S[..., r1[:, None], c0] + S[..., r0[:, None], c0])


def box_count(h, w, r):
    r0, r1 = _window_bounds(h, r)
    c0, c1 = _window_bounds(w, r)
    return np.outer(r1 - r0, c1 - c0).astype(np.float64)


def box_mean(img, r):
    # offsetting by a reference pixel keeps constant images exact under the
    # cumulative-sum differences
    ref = img[..., :1, :1]
    return ref + box_sum(img - ref, r) / box_count(*img.shape[-2:], r)


def compute_guide(cube):
    """First principal-component score image, rescaled to [0, 1].

    The component's largest-magnitude loading is made positive so the guide
    is deterministic. A constant score image maps to all zeros.
    """
    Y = cube.pixels()
    Yc = Y - Y.mean(axis=1, keepdims=True)
    if cube.bands == 1:
        scores = Yc[0]
    else:
        _, vecs = np.linalg.eigh(Yc @ Yc.T)
        pc = vecs[:, -1]
        if pc[np.argmax(np.abs(pc))] < 0:
            pc = -pc
        scores = pc @ Yc
    lo, hi = scores.min(), scores.max()
    if hi - lo <= 1e-12 * max(1.0, abs(hi), abs(lo)):
        guide = np.zeros_like(scores)
    else:
        guide = (scores - lo) / (hi - lo)
    return guide.reshape(cube.height, cube.width)


def guided_filter(cube, guide, params=GuidedFilterParams()):
    I = np.asarray(guide, dtype=np.float64)
    if I.shape != (cube.height, cube.width):
        raise DimensionMismatchError(f"guide is {I.shape}, cube is {(cube.height, cube.width)}")
    r, eps = params.radius, params.epsilon
    # work on each band minus its first pixel so constant bands stay exact
    p0 = cube.data[:, :1, :1]
    p = cube.data - p0
    mean_I = box_mean(I, r)
    var_I = box_mean(I * I, r) - mean_I * mean_I
    mean_p = box_mean(p, r)
    cov_Ip = box_mean(I * p, r) - mean_I * mean_p
    denom = var_I + eps
    # denom == 0 only for eps == 0 on a constant guide window; fall back to a = 0
    safe = np.where(denom > 0, denom, 1.0)
    a = np.where(denom > 0, cov_Ip / safe, 0.0)
    b = mean_p - a * mean_I + p0
    return HsiCube(box_mean(a, r) * I + box_mean(b, r))
