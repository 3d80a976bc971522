"""Single-channel vertex-domain sampling, consistent recovery and greedy sampling set selection.

A channel samples a signal by filtering it with ``G`` and keeping the rows in
the sampling set ``M``: ``y = (G x)[M]``. Given a generator ``A`` whose span
contains the signal, the best recovery is ``A (S^T A)^+ y``.

Sampling sets are chosen greedily to maximize ``det(Z_M)`` with
``Z = G A A^T G^T``; each step adds the vertex with the largest Schur
complement ``Z_yy - Z_yM Z_M^-1 Z_My``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import DimensionError

PINV_TOL = 1e-10
DS_KAPPA_MAX = 1e8


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    """One sampling channel.

    Parameters
    ----------
    analysis : ndarray or PolynomialFilter
        Graph filter ``G``; anything supporting ``analysis @ X``.
    generator : ndarray, shape (N, K)
        Generator ``A`` spanning the signal model of this channel.
    sampling_set : sequence of int
        Ordered vertex list ``M``.
    """

    analysis: object
    generator: np.ndarray
    sampling_set: tuple[int, ...]

    def __post_init__(self):
        A = np.asarray(self.generator, dtype=float)
        if A.ndim == 1:
            A = A[:, None]
        object.__setattr__(self, "generator", A)
        M = tuple(int(v) for v in self.sampling_set)
        if len(set(M)) != len(M):
            raise ValueError("sampling set has repeated vertices")
        if any(v < 0 or v >= A.shape[0] for v in M):
            raise ValueError(f"sampling set entries must lie in [0, {A.shape[0]})")
        object.__setattr__(self, "sampling_set", M)
        shape = getattr(self.analysis, "shape", None)
        if shape is not None and tuple(shape) != (A.shape[0], A.shape[0]):
            raise DimensionError(f"filter shape {tuple(shape)} does not match N={A.shape[0]}")

    @property
    def n(self) -> int:
        return self.generator.shape[0]

    @property
    def k(self) -> int:
        return self.generator.shape[1]

    @cached_property
    def rank(self) -> int:
        """Numerical column rank of the generator at tolerance ``1e-10 * sigma_max``."""
        s = np.linalg.svd(self.generator, compute_uv=False)
        return int(np.sum(s > PINV_TOL * s[0])) if s.size and s[0] > 0 else 0

    @property
    def full_rank(self) -> bool:
        return self.rank == self.k

    def with_set(self, sampling_set) -> "ChannelSpec":
        return ChannelSpec(self.analysis, self.generator, tuple(sampling_set))

    def sample_matrix(self, X: np.ndarray) -> np.ndarray:
        """``S^T X``: filter the columns of ``X`` and keep the rows in ``M``."""
        return (self.analysis @ np.asarray(X, dtype=float))[list(self.sampling_set)]


def truncated_pinv(M: np.ndarray, tol: float = PINV_TOL):
    """Pseudoinverse dropping singular values below ``tol * sigma_max``.

    Returns ``(pinv, rank, cond)``; ``cond`` is ``sigma_max / sigma_min`` over
    all ``min(m, n)`` singular values (``inf`` when singular).
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return np.zeros(M.shape[::-1]), 0, float("inf")
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    keep = s > tol * s[0] if s[0] > 0 else np.zeros_like(s, dtype=bool)
    inv = (Vt[keep].T / s[keep]) @ U[:, keep].T
    cond = float(s[0] / s[-1]) if s[-1] > 0 else float("inf")
    return inv, int(keep.sum()), cond


def apply_sampling(ch: ChannelSpec, x: np.ndarray) -> np.ndarray:
    """Samples ``y = (G x)[M]``."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] != ch.n:
        raise DimensionError(f"signal length {x.shape[0]} != {ch.n}")
    return ch.sample_matrix(x)


@dataclass(frozen=True, eq=False)
class SingleRecovery:
    signal: np.ndarray
    rank: int
    cond: float


def recover_single(ch: ChannelSpec, y: np.ndarray, tol: float = PINV_TOL) -> SingleRecovery:
    """Consistent recovery ``A (S^T A)^+ y`` with truncated pseudoinverse."""
    if not ch.sampling_set:
        raise ValueError("empty sampling set")
    y = np.asarray(y, dtype=float)
    if y.shape[0] != len(ch.sampling_set):
        raise DimensionError(f"got {y.shape[0]} samples for a set of size {len(ch.sampling_set)}")
    inv, rank, cond = truncated_pinv(ch.sample_matrix(ch.generator), tol)
    return SingleRecovery(ch.generator @ (inv @ y), rank, cond)


@dataclass(frozen=True)
class DsCheck:
    holds: bool
    cond: float
    reason: str = ""


def check_ds(ch: ChannelSpec, kappa_max: float = DS_KAPPA_MAX) -> DsCheck:
    """Direct-sum condition for a square channel: ``S^T A`` invertible with cond <= ``kappa_max``."""
    if len(ch.sampling_set) != ch.k:
        raise DimensionError(f"DS check needs |M| == K, got |M|={len(ch.sampling_set)}, K={ch.k}")
    s = np.linalg.svd(ch.sample_matrix(ch.generator), compute_uv=False)
    cond = float(s[0] / s[-1]) if s.size and s[-1] > 0 else float("inf")
    if cond <= kappa_max:
        return DsCheck(True, cond)
    return DsCheck(False, cond, f"S^T A is singular or ill-conditioned (cond={cond:.3g} > {kappa_max:.3g})")


def build_Z(G, A: np.ndarray) -> np.ndarray:
    """``Z = (G A)(G A)^T`` from ``K`` filter applications; ``G`` is never materialized."""
    GA = G @ np.asarray(A, dtype=float)
    if GA.ndim == 1:
        GA = GA[:, None]
    Z = GA @ GA.T
    return 0.5 * (Z + Z.T)


def default_ridge(Z: np.ndarray) -> float:
    return 1e-8 * float(np.trace(Z)) / Z.shape[0]


def default_beta(Z: np.ndarray) -> float:
    return 1e-9 * float(np.trace(Z)) / Z.shape[0]


@dataclass
class SelectionTrace:
    """Bookkeeping of one greedy selection run."""

    chosen: list = field(default_factory=list)
    scores: list = field(default_factory=list)
    ridge: float = 0.0
    beta: float = 0.0
    iterations: list = field(default_factory=list)
    fallbacks: int = 0
    floor_hits: int = 0


@dataclass(frozen=True, eq=False)
class NeumannResult:
    x: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    fallback: np.ndarray
    alpha0: float


def neumann_solve(
    B: np.ndarray,
    R: np.ndarray,
    beta: float,
    max_iter: int | None = None,
    fallback: bool = True,
    mask: np.ndarray | None = None,
) -> NeumannResult:
    """Solve ``B X = R`` column-wise by the step-adapted Neumann iteration.

    Starting from ``X0 = alpha0 R`` with ``alpha0 = 1 / ||B||_inf`` (which
    keeps ``||I - alpha0 B||_2 <= 1`` for PSD ``B``), each column is updated as
    ``x <- x + alpha (r - B x)`` (the truncated Neumann series of ``B^-1``) with
    the minimal-residual step ``alpha = r^T B r / ||B r||^2`` of its residual.
    A column stops once ``||r - B x|| < beta``. Columns still unconverged
    after ``max_iter`` steps (default ``10 * size``) are solved directly when
    ``fallback`` is set.

    With ``mask`` (same shape as ``R``, zeros on excluded rows) column ``j``
    solves the principal subsystem of ``B`` on the rows where ``mask[:, j]``
    is nonzero; ``R`` must already vanish on the excluded rows.
    """
    B = np.asarray(B, dtype=float)
    R = np.asarray(R, dtype=float)
    vec = R.ndim == 1
    if vec:
        R = R[:, None]
    m, c = R.shape
    if max_iter is None:
        max_iter = 10 * max(m, 1)
    norm_inf = float(np.abs(B).sum(axis=1).max(initial=0.0))
    alpha0 = 1.0 / norm_inf if norm_inf > 0 else 1.0
    X = alpha0 * R
    iters = np.zeros(c, dtype=int)
    active = np.ones(c, dtype=bool)
    for _ in range(max_iter + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        res = R[:, idx] - _masked(B @ X[:, idx], mask, idx)
        done = np.linalg.norm(res, axis=0) < beta
        active[idx[done]] = False
        idx, res = idx[~done], res[:, ~done]
        if idx.size == 0:
            break
        over = iters[idx] >= max_iter
        idx, res = idx[~over], res[:, ~over]
        if idx.size == 0:
            break
        Br = _masked(B @ res, mask, idx)
        den = np.einsum("ij,ij->j", Br, Br)
        alpha = np.where(den > 0, np.einsum("ij,ij->j", res, Br) / np.where(den > 0, den, 1.0), alpha0)
        X[:, idx] += alpha * res
        iters[idx] += 1
    converged = ~active
    fb = np.zeros(c, dtype=bool)
    if fallback and active.any():
        idx = np.flatnonzero(active)
        X[:, idx] = _direct_solve(B, R[:, idx]) if mask is None else _direct_masked(B, R, mask, idx)
        fb[idx] = True
    if vec:
        X = X[:, 0]
    return NeumannResult(X, iters, converged, fb, alpha0)


def _masked(P, mask, idx):
    return P if mask is None else P * mask[:, idx]


def _direct_masked(B, R, mask, idx):
    out = np.zeros((B.shape[0], idx.size))
    for j, col in enumerate(idx):
        rows = np.flatnonzero(mask[:, col])
        out[rows, j] = _direct_solve(B[np.ix_(rows, rows)], R[rows, col])
    return out


def _direct_solve(B: np.ndarray, R: np.ndarray) -> np.ndarray:
    try:
        return cho_solve(cho_factor(B), R)
    except LinAlgError:
        return np.linalg.lstsq(B, R, rcond=None)[0]


def schur_scores(Zr: np.ndarray, chosen: list, cand: np.ndarray) -> np.ndarray:
    """``Zr_yy - Zr_yM Zr_M^-1 Zr_My`` for every ``y`` in ``cand``, by direct solves."""
    diag = np.diag(Zr)[cand]
    if not chosen:
        return diag.copy()
    cross = Zr[np.ix_(chosen, cand)]
    X = _direct_solve(Zr[np.ix_(chosen, chosen)], cross)
    return diag - np.einsum("ij,ij->j", cross, X)


def _prepare(Z, K, ridge):
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise DimensionError(f"Z must be square, got {Z.shape}")
    n = Z.shape[0]
    if not 0 <= K <= n:
        raise ValueError(f"need 0 <= K <= N, got K={K}, N={n}")
    Z = 0.5 * (Z + Z.T)
    eps = default_ridge(Z) if ridge is None else float(ridge)
    if eps < 0:
        raise ValueError("ridge must be non-negative")
    return Z + eps * np.eye(n), eps


def sss_greedy_exact(Z: np.ndarray, K: int, ridge: float | None = None, return_trace: bool = False):
    """Greedy determinant maximization with direct Schur-complement scores.

    Scores are Schur complements of the regularized ``Z + ridge I`` (default
    ridge ``1e-8 trace(Z) / N``), so each score equals
    ``det(Zr_{M+y}) / det(Zr_M)``. The first pick is the largest diagonal
    entry; ties go to the lowest vertex index.
    """
    Zr, eps = _prepare(Z, K, ridge)
    n = Zr.shape[0]
    trace = SelectionTrace(ridge=eps)
    free = np.ones(n, dtype=bool)
    for _ in range(K):
        cand = np.flatnonzero(free)
        scores = schur_scores(Zr, trace.chosen, cand)
        j = int(np.argmax(scores))
        trace.chosen.append(int(cand[j]))
        trace.scores.append(float(scores[j]))
        free[cand[j]] = False
    return (list(trace.chosen), trace) if return_trace else list(trace.chosen)


def sss_greedy_neumann(
    Z: np.ndarray,
    K: int,
    beta: float | None = None,
    ridge: float | None = None,
    max_iter: int | None = None,
    return_trace: bool = False,
):
    """Greedy determinant maximization with Neumann-iteration inner solves.

    Same objective and tie-breaking as :func:`sss_greedy_exact`; the solve
    ``Zr_M^-1 Zr_My`` for all candidates is done by :func:`neumann_solve`
    with tolerance ``beta`` (default ``1e-9 trace(Z) / N``) and iteration cap
    ``max_iter`` (default ``10 |M|``), falling back to a direct solve for
    candidates that have not converged.
    """
    Zr, eps = _prepare(Z, K, ridge)
    n = Zr.shape[0]
    b = default_beta(Zr - eps * np.eye(n)) if beta is None else float(beta)
    if b <= 0:
        raise ValueError("beta must be positive")
    trace = SelectionTrace(ridge=eps, beta=b)
    free = np.ones(n, dtype=bool)
    diag = np.diag(Zr)
    for _ in range(K):
        cand = np.flatnonzero(free)
        M = trace.chosen
        if M:
            cross = Zr[np.ix_(M, cand)]
            cap = max_iter if max_iter is not None else 10 * len(M)
            res = neumann_solve(Zr[np.ix_(M, M)], cross, b, cap)
            scores = diag[cand] - np.einsum("ij,ij->j", cross, res.x)
            trace.iterations.append(int(res.iterations.max(initial=0)))
            trace.fallbacks += int(res.fallback.sum())
        else:
            scores = diag[cand].copy()
            trace.iterations.append(0)
        j = int(np.argmax(scores))
        trace.chosen.append(int(cand[j]))
        trace.scores.append(float(scores[j]))
        free[cand[j]] = False
    return (list(trace.chosen), trace) if return_trace else list(trace.chosen)
