"""Trace-lasso regularized L1-norm graph cut (TL-L1GC).

Each projection direction maximizes

    J(v) = ||v^T F||_1 - ||v^T G||_1 - delta * ||X^T Diag(v)||_*,   ||v|| = 1

where F, G hold weighted cross-/same-class difference columns. The trace
norm is handled through its variational form with S = (X^T Diag(v)^2 X)^{1/2},
which turns the penalty into the weighted ridge (delta/2) v^T Diag(dhat) v
with dhat = diag(X S^-1 X^T). The absolute values are handled by sign
patterns (F) and half-quadratic reweighting (G), giving the update

    v <- (delta Diag(dhat) + M)^-1 N,  N = sum q_i f_i,  M = sum g g^T / |v^T g|.

Two step rules are available:

* ``"sphere"`` (default) maximizes the same half-quadratic minorizer on the
  unit sphere, i.e. ``(delta Diag(dhat) + M + mu I)^-1 N`` with ``mu`` chosen so
  the result has unit norm. Every step then provably does not decrease the
  objective with S held fixed.
* ``"normalized"`` applies the plain update and rescales to unit norm. It has
  no ascent guarantee and is kept for reference runs.

With ``accelerate`` (sphere rule only) each step also tries extrapolations
along the last move and exact maximizers of the piece of J the iterate sits
on; a candidate replaces the plain step only if it raises the objective with
S frozen, so ascent is kept.

Directions are extracted one at a time; after each, the data and the
dispersion columns are deflated by v v^T and later directions are searched
in the orthogonal complement of those already found.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import brentq

from . import rng as _rng
from .dispersion import build_dispersions, deflate, deflate_dispersions


# looser kink tolerances tried by the pattern step after kink_tol
PIN_LADDER = (1e-3, 1e-2, 1e-1)


class DegenerateDirectionError(ArithmeticError):
    """The sign-weighted between-class sum N(t) vanished."""


@dataclass(frozen=True)
class SolverConfig:
    delta: float = 0.4
    target_dim: int = 1
    tol: float = 1e-6
    max_inner_iters: int = 50
    eig_floor: float = 1e-10
    z_floor: float = 1e-8
    seed: int = 0
    # random restarts per direction; the best final objective wins
    n_starts: int = 5
    # "iteration": recompute S at every inner step; "direction": once from v0
    s_refresh: str = "iteration"
    update: str = "sphere"
    # safeguarded kink-snapping steps (sphere update only)
    accelerate: bool = True
    kink_tol: float = 1e-4

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.target_dim < 1:
            raise ValueError("target_dim must be positive")
        if self.tol <= 0 or self.z_floor <= 0:
            raise ValueError("tol and z_floor must be positive")
        if self.max_inner_iters < 1 or self.n_starts < 1:
            raise ValueError("max_inner_iters and n_starts must be positive")
        if self.s_refresh not in ("iteration", "direction"):
            raise ValueError(f"unknown s_refresh {self.s_refresh!r}")
        if self.update not in ("sphere", "normalized"):
            raise ValueError(f"unknown update {self.update!r}")


@dataclass
class SolverState:
    v: np.ndarray
    t: int
    objective: float
    S_inv: np.ndarray
    trace_S: float
    dhat: np.ndarray


@dataclass
class DirectionRecord:
    iterations: int
    converged: bool
    objective_start: float
    objective_end: float
    degenerate: bool = False
    start: int = 0
    # filled when solve_direction(record_path=True)
    path: list = None
    surrogate_steps: list = None


@dataclass
class ProjectionMatrix:
    V: np.ndarray
    records: list = field(default_factory=list)

    @property
    def d(self):
        return self.V.shape[1]

    def leading(self, k):
        """First ``k`` directions (greedy extraction makes these prefix-stable)."""
        return ProjectionMatrix(self.V[:, :k], self.records[:k])


# -- building blocks ----------------------------------------------------------

def trace_norm(J):
    return float(np.linalg.svd(np.asarray(J, dtype=np.float64), compute_uv=False).sum())


def objective(v, disp, X, delta):
    v = np.asarray(v, dtype=np.float64)
    value = np.abs(v @ disp.F).sum() - np.abs(v @ disp.G).sum()
    if delta:
        value -= delta * trace_norm(X.T * v)
    return float(value)


def _s_parts(X, v, eig_floor):
    Xv = X * v[:, None]
    s, U = np.linalg.eigh(Xv.T @ Xv)
    s = np.clip(s, 0.0, None)
    # eigenvalues at rounding level are zeros; their square roots (~1e-8) would bias tr(S)
    keep = s > s.max() * s.size * np.finfo(float).eps
    if eig_floor > 0:
        w = 1.0 / np.sqrt(s + eig_floor * max(s.max(), 1.0))
    else:
        w = np.where(keep, 1.0 / np.sqrt(np.where(keep, s, 1.0)), 0.0)
    S_inv = (U * w) @ U.T
    return 0.5 * (S_inv + S_inv.T), float(np.sqrt(s[keep]).sum())


def s_inverse(X, v, eig_floor=1e-10):
    """(X^T Diag(v)^2 X)^{-1/2}, ridged by ``eig_floor * max(s_max, 1)``.

    With ``eig_floor == 0`` numerically zero eigenvalues are dropped, giving
    the pseudo-inverse square root.
    """
    return _s_parts(np.asarray(X, dtype=np.float64), np.asarray(v, dtype=np.float64), eig_floor)[0]


def diag_weights(X, S_inv):
    """diag(X S^-1 X^T)."""
    return np.einsum("ij,jk,ik->i", X, S_inv, X)


def make_state(X, v, delta, eig_floor, t=0, disp=None):
    if delta:
        S_inv, trace_S = _s_parts(X, v, eig_floor)
        dhat = diag_weights(X, S_inv)
    else:
        S_inv, trace_S, dhat = None, 0.0, np.zeros(X.shape[0])
    obj = objective(v, disp, X, delta) if disp is not None else np.nan
    return SolverState(v, t, obj, S_inv, trace_S, dhat)


def surrogate_objective(v, disp, state, delta):
    """J with the trace norm replaced by its bound at the frozen S."""
    value = np.abs(v @ disp.F).sum() - np.abs(v @ disp.G).sum()
    if delta:
        value -= 0.5 * delta * (v @ (state.dhat * v) + state.trace_S)
    return float(value)


def sign_vectors(v, disp):
    q = np.where(v @ disp.F > 0, 1.0, -1.0)
    r = np.where(v @ disp.G > 0, 1.0, -1.0)
    return q, r


def sphere_step(H, c):
    """argmax_{||u|| = 1} c^T u - u^T H u / 2 for symmetric H.

    Solved through the secular equation ||(H + mu I)^-1 c|| = 1 with
    mu >= -lambda_min(H), including the degenerate ("hard") case.
    """
    lam, Q = np.linalg.eigh(0.5 * (H + H.T))
    b = Q.T @ c
    nb = np.linalg.norm(b)
    if nb == 0:
        return Q[:, 0]
    shift = lam - lam[0]

    def excess(mu):
        return np.linalg.norm(b / (shift + mu)) - 1.0

    lo = None
    for k in range(1, 80):
        trial = nb * 0.5 ** k
        if excess(trial) > 0:
            lo = trial
            break
    if lo is None:
        # hard case: the smallest-eigenvalue component of c is (numerically) absent
        gap = shift > 1e-12 * max(shift[-1], 1.0)
        u = np.zeros_like(b)
        u[gap] = b[gap] / shift[gap]
        u[np.flatnonzero(~gap)[0]] = np.sqrt(max(0.0, 1.0 - u @ u))
        return Q @ u
    hi = nb * (1.0 + 1e-12)
    if excess(hi) > 0:
        mu = hi
    else:
        mu = brentq(excess, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    u = Q @ (b / (shift + mu))
    return u / np.linalg.norm(u)


def _ridge_solve(H, N):
    lam = np.linalg.eigvalsh(H)
    if lam[0] <= 1e-12 * max(abs(lam[-1]), np.finfo(float).tiny):
        tr = np.trace(H)
        H = H + (1e-10 * tr if tr > 0 else 1e-10) * np.eye(H.shape[0])
    return np.linalg.solve(H, N)


def _half_quadratic(v, disp, dhat, cfg):
    q = np.where(v @ disp.F > 0, 1.0, -1.0)
    N = disp.F @ q
    z = np.maximum(np.abs(v @ disp.G), cfg.z_floor)
    M = (disp.G / z) @ disp.G.T
    H = M + np.diag(cfg.delta * dhat) if cfg.delta else M
    return H, N


def update_v(state, disp, X, cfg, basis=None):
    """One TL-L1GC update of ``state.v`` using ``state.S_inv``.

    ``basis`` (orthonormal columns) restricts the search to a subspace,
    used to keep later directions orthogonal to earlier ones.
    """
    dhat = diag_weights(X, state.S_inv) if cfg.delta else np.zeros(X.shape[0])
    H, N = _half_quadratic(state.v, disp, dhat, cfg)
    return _step(H, N, cfg, basis)


def _step(H, N, cfg, basis):
    if basis is not None:
        H = basis.T @ H @ basis
        N = basis.T @ N
    if not np.any(N):
        raise DegenerateDirectionError("sign-weighted between-class sum is zero")
    u = _ridge_solve(H, N) if cfg.update == "normalized" else sphere_step(H, N)
    v = u if basis is None else basis @ u
    return v / np.linalg.norm(v)


def _pattern_candidates(w, disp, dhat, cfg, basis, g_norms):
    """Steps toward the exact maximizer of the piece of J containing ``w``.

    Columns with v^T g ~ 0 (and, with the trace lasso, coordinates v_d ~ 0)
    are pinned to zero; with the remaining signs fixed the frozen-S objective
    is a concave quadratic on a great sphere, maximized by ``sphere_step``.
    "~ 0" is tried at ``kink_tol`` and at a few looser tolerances, since the
    reweighted steps approach a kink only slowly. Returns points along the
    segment from ``w`` toward each maximizer; the caller keeps the best.
    """
    D = w.size
    zw = w @ disp.G
    q = np.where(w @ disp.F > 0, 1.0, -1.0)
    r = np.where(zw > 0, 1.0, -1.0)
    out, seen = [], set()
    for tol in sorted({cfg.kink_tol, *PIN_LADDER}):
        if tol < cfg.kink_tol:
            continue
        active = (np.abs(zw) <= tol * g_norms) & (g_norms > 0)
        pinned = np.abs(w) <= tol * np.abs(w).max() if cfg.delta else np.zeros(D, bool)
        key = (active.tobytes(), pinned.tobytes())
        if key in seen or (not active.any() and not pinned.any()):
            continue
        seen.add(key)
        c = disp.F @ q - disp.G[:, ~active] @ r[~active]
        cons = np.hstack([disp.G[:, active], np.eye(D)[:, pinned]])
        B = basis @ null_space((basis.T @ cons).T) if basis is not None else null_space(cons.T)
        if B.shape[1] == 0:
            continue
        cb = B.T @ c
        if not np.any(cb):
            continue
        Hb = cfg.delta * (B.T * dhat) @ B
        p = B @ sphere_step(Hb, cb)
        for a in 0.5 ** np.arange(6):
            cand = w + a * (p - w)
            nc = np.linalg.norm(cand)
            if nc > 0:
                out.append(cand / nc)
    return out


def _extrapolations(v, w, basis=None, steps=6):
    """Points past ``w`` along the last step, w + (2^k - 1)(w - v), renormalized."""
    d = w - v
    out = []
    for k in range(1, steps + 1):
        cand = w + (2.0**k - 1.0) * d
        if basis is not None:
            # long steps amplify rounding outside the search subspace
            cand = basis @ (basis.T @ cand)
        nc = np.linalg.norm(cand)
        if nc > 0:
            out.append(cand / nc)
    return out


def solve_direction(X, disp, cfg, v0, basis=None, record_path=False):
    """Inner loop for one direction, from the unit vector ``v0``.

    Iterates until ||v(t+1) - v(t)|| <= tol or ``max_inner_iters`` updates.
    With ``s_refresh="direction"`` S is computed once from ``v0``.
    """
    v = np.asarray(v0, dtype=np.float64)
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise ValueError("v0 must be unit norm")
    accelerate = cfg.accelerate and cfg.update == "sphere"
    g_norms = np.linalg.norm(disp.G, axis=0) if accelerate else None
    state = make_state(X, v, cfg.delta, cfg.eig_floor)
    obj_start = objective(v, disp, X, cfg.delta)
    path = [v] if record_path else None
    steps = [] if record_path else None
    converged = False
    t = 0
    while t < cfg.max_inner_iters:
        if t > 0 and cfg.s_refresh == "iteration":
            state = make_state(X, v, cfg.delta, cfg.eig_floor, t)
        H, N = _half_quadratic(v, disp, state.dhat, cfg)
        w = _step(H, N, cfg, basis)
        if accelerate:
            f_now = surrogate_objective(v, disp, state, cfg.delta)
            best, f_best = w, surrogate_objective(w, disp, state, cfg.delta)
            cands = _extrapolations(v, w, basis) + _pattern_candidates(w, disp, state.dhat, cfg, basis, g_norms)
            for cand in cands:
                f = surrogate_objective(cand, disp, state, cfg.delta)
                if f > f_best:
                    best, f_best = cand, f
            if f_best < f_now:
                best = v
            w = best
        t += 1
        if record_path:
            steps.append((surrogate_objective(v, disp, state, cfg.delta),
                          surrogate_objective(w, disp, state, cfg.delta)))
            path.append(w)
        done = np.linalg.norm(w - v) <= cfg.tol
        v = w
        if done:
            converged = True
            break
    record = DirectionRecord(t, converged, obj_start, objective(v, disp, X, cfg.delta),
                             path=path, surrogate_steps=steps)
    return v, record


def _fallback_direction(disp, basis):
    U = np.linalg.svd(disp.F, full_matrices=False)[0]
    v = U[:, 0] if U.size else None
    if basis is not None and v is not None:
        v = basis @ (basis.T @ v)
    if v is None or np.linalg.norm(v) < 1e-12:
        v = basis[:, 0] if basis is not None else np.eye(disp.F.shape[0])[:, 0]
    return v / np.linalg.norm(v)


def initial_vector(cfg, direction, start, D, basis=None):
    gen = _rng.stream(cfg.seed, _rng.SOLVER, direction, start)
    v0 = gen.standard_normal(D)
    if basis is not None:
        v0 = basis @ (basis.T @ v0)
    return v0 / np.linalg.norm(v0)


def fit(train, cfg):
    D = train.n_features
    if cfg.target_dim > D:
        raise ValueError(f"target_dim {cfg.target_dim} exceeds feature dimension {D}")
    disp = build_dispersions(train)
    X = train.X.copy()
    cols, records = [], []
    for k in range(cfg.target_dim):
        basis = null_space(np.column_stack(cols).T) if cols else None
        best = None
        for s in range(cfg.n_starts):
            v0 = initial_vector(cfg, k, s, D, basis)
            try:
                v, rec = solve_direction(X, disp, cfg, v0, basis)
            except DegenerateDirectionError:
                continue
            rec.start = s
            if best is None or rec.objective_end > best[1].objective_end:
                best = (v, rec)
        if best is None:
            v = _fallback_direction(disp, basis)
            o = objective(v, disp, X, cfg.delta)
            best = (v, DirectionRecord(0, False, o, o, degenerate=True))
        v = best[0]
        cols.append(v)
        records.append(best[1])
        X = deflate(X, v)
        disp = deflate_dispersions(disp, v)
    return ProjectionMatrix(np.column_stack(cols), records)
