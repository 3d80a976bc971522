"""Dense eigendecomposition of graph operators, the graph Fourier transform, spectral clustering."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.cluster.vq import ClusterError, kmeans2

from .errors import DimensionError, GraphMcsError, NumericalError

SYMMETRY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenpairs of a symmetric graph operator, eigenvalues ascending.

    ``evecs[:, i]`` is the eigenvector for ``evals[i]``.
    """

    evecs: np.ndarray
    evals: np.ndarray
    kind: str = "combinatorial"

    @property
    def n(self) -> int:
        return self.evals.shape[0]

    @property
    def lmax(self) -> float:
        return float(self.evals[-1])

    def operator(self) -> np.ndarray:
        U = self.evecs
        return (U * self.evals) @ U.T


def fix_signs(U: np.ndarray, rel_tol: float = 1e-9) -> np.ndarray:
    """Flip columns so the largest-magnitude entry (lowest index on near-ties) is positive."""
    U = np.array(U, dtype=float, copy=True)
    mag = np.abs(U)
    top = mag.max(axis=0)
    first = np.argmax(mag >= top * (1.0 - rel_tol), axis=0)
    signs = np.sign(U[first, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


def eigendecompose(op: np.ndarray, kind: str = "combinatorial") -> SpectralDecomposition:
    """Full eigendecomposition ``op = U diag(evals) U^T`` with a deterministic sign convention."""
    op = np.asarray(op, dtype=float)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise DimensionError(f"operator must be square, got {op.shape}")
    scale = max(1.0, float(np.abs(op).max(initial=0.0)))
    if np.abs(op - op.T).max(initial=0.0) > SYMMETRY_TOL * scale:
        raise NumericalError("operator is not symmetric")
    evals, evecs = np.linalg.eigh(0.5 * (op + op.T))
    if kind in ("combinatorial", "normalized"):
        # PSD operators: clear round-off below zero
        evals = np.where((evals < 0) & (evals > -1e-10 * scale), 0.0, evals)
    evecs = fix_signs(evecs)
    evecs.setflags(write=False)
    evals.setflags(write=False)
    return SpectralDecomposition(evecs, evals, kind)


def gft(d: SpectralDecomposition, x: np.ndarray) -> np.ndarray:
    """Graph Fourier transform ``U^T x``; ``x`` may hold signals in its columns."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] != d.n:
        raise DimensionError(f"signal length {x.shape[0]} != {d.n} vertices")
    return d.evecs.T @ x


def igft(d: SpectralDecomposition, xhat: np.ndarray) -> np.ndarray:
    """Inverse graph Fourier transform ``U xhat``."""
    xhat = np.asarray(xhat, dtype=float)
    if xhat.shape[0] != d.n:
        raise DimensionError(f"spectrum length {xhat.shape[0]} != {d.n}")
    return d.evecs @ xhat


def _canonical_labels(labels: np.ndarray) -> np.ndarray:
    # relabel clusters in order of their smallest vertex
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    remap = np.empty(order.size, dtype=int)
    remap[order] = np.arange(order.size)
    return remap[np.searchsorted(np.unique(labels), labels)]


def spectral_clusters(d: SpectralDecomposition, p: int, seed: int = 0, restarts: int = 50) -> np.ndarray:
    """Partition the vertices into ``p`` clusters by k-means on eigenvectors ``1..p``.

    Returns one label per vertex in ``0..p-1``; clusters are numbered by their
    smallest vertex index. The best of ``restarts`` k-means++ runs (lowest
    within-cluster sum of squares) is kept.
    """
    n = d.n
    if not 2 <= p <= n:
        raise ValueError(f"cluster count must satisfy 2 <= p <= N, got p={p}, N={n}")
    if p == n:
        return np.arange(n)
    feats = np.asarray(d.evecs[:, 1 : min(p, n - 1) + 1])
    rng = np.random.default_rng(seed)
    best, best_cost = None, np.inf
    for _ in range(restarts):
        try:
            centroids, labels = kmeans2(feats, p, minit="++", missing="raise", seed=rng)
        except ClusterError:
            continue
        cost = float(((feats - centroids[labels]) ** 2).sum())
        if cost < best_cost and np.unique(labels).size == p:
            best, best_cost = labels, cost
    if best is None:
        raise GraphMcsError(f"k-means produced an empty cluster in all {restarts} restarts")
    return _canonical_labels(best)


def cluster_indicators(labels: np.ndarray) -> np.ndarray:
    """N x p matrix whose columns are the 0/1 indicator vectors of the clusters."""
    labels = np.asarray(labels)
    return (labels[:, None] == np.arange(labels.max() + 1)[None, :]).astype(float)
