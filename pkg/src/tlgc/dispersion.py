"""Pairwise between/within-class structures.

``build_scatter`` gives the L2 dissimilarity matrices S_B, S_W, S_T used by
the scaling-cut baseline. ``build_dispersions`` materializes the weighted
pairwise difference columns F (cross-class) and G (same-class) consumed by
the L1 solver. Columns are ordered class-major, then i, then j, over all
ordered pairs; same-class pairs include i == j as zero columns.
"""

from dataclasses import dataclass

import numpy as np


class SingleClassError(ValueError):
    pass


@dataclass
class ScatterPair:
    S_B: np.ndarray
    S_W: np.ndarray

    @property
    def S_T(self):
        return self.S_B + self.S_W


@dataclass
class DispersionSet:
    F: np.ndarray
    G: np.ndarray
    # (class k, i, j) per column; i, j index samples of the source dataset
    F_pairs: np.ndarray
    G_pairs: np.ndarray

    @property
    def n_features(self):
        return self.F.shape[0]


def _class_members(ds):
    members = [np.flatnonzero(ds.labels == k) for k in range(1, ds.n_classes + 1)]
    members = [(k, m) for k, m in zip(range(1, ds.n_classes + 1), members) if m.size]
    if len(members) < 2:
        raise SingleClassError("need samples from at least two classes")
    return members


def _pair_sum(A, B):
    """sum_{a in A, b in B} (a - b)(a - b)^T for column sets A, B."""
    sa, sb = A.sum(axis=1), B.sum(axis=1)
    out = B.shape[1] * (A @ A.T) + A.shape[1] * (B @ B.T) - np.outer(sa, sb) - np.outer(sb, sa)
    return out


def build_scatter(ds):
    members = _class_members(ds)
    D, n = ds.X.shape
    S_B = np.zeros((D, D))
    S_W = np.zeros((D, D))
    for k, idx in members:
        rest = np.setdiff1d(np.arange(n), idx)
        A, B = ds.X[:, idx], ds.X[:, rest]
        nk, nb = idx.size, rest.size
        if nb:
            S_B += _pair_sum(A, B) / (nk * nb)
        S_W += _pair_sum(A, A) / (nk * nk)
    # symmetrize away rounding so eigensolvers see exact symmetry
    return ScatterPair(0.5 * (S_B + S_B.T), 0.5 * (S_W + S_W.T))


def build_dispersions(ds):
    members = _class_members(ds)
    X = ds.X
    n = X.shape[1]
    F, G, Fp, Gp = [], [], [], []
    for k, idx in members:
        rest = np.setdiff1d(np.arange(n), idx)
        nk, nb = idx.size, rest.size
        ii, jj = np.meshgrid(idx, rest, indexing="ij")
        F.append((X[:, ii.ravel()] - X[:, jj.ravel()]) / (nk * nb))
        Fp.append(np.column_stack([np.full(ii.size, k), ii.ravel(), jj.ravel()]))
        ii, jj = np.meshgrid(idx, idx, indexing="ij")
        G.append((X[:, ii.ravel()] - X[:, jj.ravel()]) / (nk * nk))
        Gp.append(np.column_stack([np.full(ii.size, k), ii.ravel(), jj.ravel()]))
    return DispersionSet(np.hstack(F), np.hstack(G), np.vstack(Fp), np.vstack(Gp))


def deflate_dispersions(disp, v):
    v = np.asarray(v, dtype=np.float64)
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise ValueError(f"deflation vector must be unit norm, got {np.linalg.norm(v)!r}")
    F = disp.F - np.outer(v, v @ disp.F)
    G = disp.G - np.outer(v, v @ disp.G)
    return DispersionSet(F, G, disp.F_pairs, disp.G_pairs)


def deflate(X, v):
    """X <- X - v v^T X."""
    return X - np.outer(v, v @ X)
