"""L2 scaling-cut baseline via the trace-difference eigenproblem."""

from dataclasses import dataclass

import numpy as np

from .dispersion import build_scatter
from .tl_solver import ProjectionMatrix


@dataclass(frozen=True)
class SCConfig:
    target_dim: int = 1
    # added to the S_T diagonal when evaluating the trace ratio
    ridge: float = 0.0
    # optional PCA pre-step to this rank (None disables it)
    pca_rank: int = None


def sign_normalize(V):
    """Flip columns so each one's largest-magnitude entry is positive."""
    V = np.array(V, dtype=np.float64)
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.where(V[idx, np.arange(V.shape[1])] < 0, -1.0, 1.0)
    return V * signs


def _pca_basis(X, rank):
    Xc = X - X.mean(axis=1, keepdims=True)
    U = np.linalg.svd(Xc, full_matrices=False)[0]
    return U[:, :rank]


def fit_sc(train, cfg):
    D = train.n_features
    if cfg.target_dim > D:
        raise ValueError(f"target_dim {cfg.target_dim} exceeds feature dimension {D}")
    P = None
    ds = train
    if cfg.pca_rank is not None:
        if not cfg.target_dim <= cfg.pca_rank <= D:
            raise ValueError("pca_rank must lie between target_dim and the feature dimension")
        P = _pca_basis(train.X, cfg.pca_rank)
        ds = train.with_features(P.T @ train.X)
    sc = build_scatter(ds)
    lam, U = np.linalg.eigh(sc.S_B - sc.S_W)
    order = np.argsort(lam)[::-1][:cfg.target_dim]
    W = U[:, order]
    if P is not None:
        W = P @ W
    return ProjectionMatrix(sign_normalize(W), [float(x) for x in lam[order]])


def sc_objective(W, scatter, ridge=0.0):
    """Tr(W^T S_B W) / Tr(W^T S_T W)."""
    W = np.atleast_2d(np.asarray(W, dtype=np.float64).T).T
    num = np.trace(W.T @ scatter.S_B @ W)
    den = np.trace(W.T @ scatter.S_T @ W) + ridge * np.trace(W.T @ W)
    if den <= 0:
        raise ZeroDivisionError("total dissimilarity vanishes along W")
    return float(num / den)
