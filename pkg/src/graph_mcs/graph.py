"""Weighted undirected graphs, synthetic generators, Laplacians and edge-list I/O."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import ConnectivityError, DegenerateDegreeError, EdgeListError, GraphError

log = logging.getLogger(__name__)

MAX_RETRIES = 16


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Weighted undirected graph stored as a dense symmetric adjacency matrix.

    Parameters
    ----------
    weights : ndarray, shape (N, N)
        Symmetric non-negative adjacency with zero diagonal.
    coords : ndarray, shape (N, d), optional
        Vertex coordinates, only used for plotting dumps.
    symmetrized : bool
        True when the source data was asymmetric and was symmetrized by max.
    """

    weights: np.ndarray
    coords: np.ndarray | None = None
    symmetrized: bool = False

    def __post_init__(self):
        W = self.weights
        if hasattr(W, "toarray"):
            W = W.toarray()
        W = _frozen(W)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise GraphError(f"adjacency must be square, got shape {W.shape}")
        if not np.all(np.isfinite(W)):
            raise GraphError("adjacency contains non-finite entries")
        if np.any(W < 0):
            raise GraphError("negative edge weight")
        if np.any(np.diag(W) != 0):
            raise GraphError("self-loops are not supported")
        if not np.array_equal(W, W.T):
            raise GraphError("adjacency is not symmetric")
        object.__setattr__(self, "weights", W)
        if self.coords is not None:
            C = _frozen(self.coords)
            if C.ndim == 1:
                C = _frozen(C[:, None])
            if C.shape[0] != W.shape[0]:
                raise GraphError(f"coords has {C.shape[0]} rows for {W.shape[0]} vertices")
            object.__setattr__(self, "coords", C)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    @property
    def n_edges(self) -> int:
        return int(np.count_nonzero(np.triu(self.weights)))

    def is_connected(self) -> bool:
        return _is_connected(self.weights)


@dataclass(frozen=True)
class BipartitePartition:
    """Split of the vertex set into a low set and a high set.

    Every edge of the owning graph must cross between the two sets; use
    :meth:`validate` (or :func:`make_partition`) to check this.
    """

    low_set: tuple[int, ...]
    high_set: tuple[int, ...] = field(default=())

    def validate(self, g: Graph) -> "BipartitePartition":
        low = np.asarray(self.low_set, dtype=int)
        high = np.asarray(self.high_set, dtype=int)
        both = np.concatenate([low, high])
        if both.size != g.n or not np.array_equal(np.sort(both), np.arange(g.n)):
            raise GraphError("partition sets must be disjoint and cover every vertex")
        W = g.weights
        if np.any(W[np.ix_(low, low)] != 0) or np.any(W[np.ix_(high, high)] != 0):
            raise GraphError("partition is not bipartite: an edge lies inside one set")
        return self


def make_partition(g: Graph, low_set) -> BipartitePartition:
    """Build and validate a partition from the low set; the high set is the rest."""
    low = sorted(int(v) for v in low_set)
    high = sorted(set(range(g.n)) - set(low))
    return BipartitePartition(tuple(low), tuple(high)).validate(g)


def laplacian(g: Graph, kind: str = "combinatorial") -> np.ndarray:
    """Graph Laplacian ``D - W`` or ``I - D^-1/2 W D^-1/2``."""
    W = g.weights
    d = W.sum(axis=1)
    if kind == "combinatorial":
        return np.diag(d) - W
    if kind == "normalized":
        if np.any(d <= 0):
            raise DegenerateDegreeError(
                f"vertex {int(np.argmin(d))} is isolated; normalized Laplacian undefined"
            )
        s = 1.0 / np.sqrt(d)
        L = np.eye(g.n) - s[:, None] * W * s[None, :]
        return 0.5 * (L + L.T)
    raise ValueError(f"unknown Laplacian kind {kind!r}")


def _is_connected(W: np.ndarray) -> bool:
    if W.shape[0] <= 1:
        return True
    ncomp, _ = connected_components(W != 0, directed=False)
    return ncomp == 1


def knn_gaussian_weights(points: np.ndarray, k: int) -> np.ndarray:
    """k-NN adjacency with weights exp(-d^2 / (2 sigma^2)), sigma = mean k-NN distance.

    The directed k-NN relation is symmetrized by elementwise max.
    """
    n = points.shape[0]
    dist, idx = cKDTree(points).query(points, k=k + 1)
    # column 0 is the point itself
    dist, idx = dist[:, 1:], idx[:, 1:]
    sigma = dist.mean()
    W = np.zeros((n, n))
    rows = np.repeat(np.arange(n), k)
    W[rows, idx.ravel()] = np.exp(-dist.ravel() ** 2 / (2.0 * sigma**2))
    W = np.maximum(W, W.T)
    np.fill_diagonal(W, 0.0)
    return W


def _retry(build, seed: int, what: str):
    for attempt in range(MAX_RETRIES):
        W, coords = build(seed + attempt)
        if _is_connected(W):
            return W, coords
    raise ConnectivityError(f"{what}: no connected graph after {MAX_RETRIES} attempts from seed {seed}")


def random_sensor_graph(n: int, k: int = 6, seed: int = 0) -> Graph:
    """Random geometric sensor graph: uniform points in the unit square, k-NN Gaussian weights."""
    if k < 1 or n < k + 1:
        raise GraphError(f"need n >= k + 1 and k >= 1, got n={n}, k={k}")

    def build(s):
        pts = np.random.default_rng(s).random((n, 2))
        return knn_gaussian_weights(pts, k), pts

    W, pts = _retry(build, seed, "random_sensor_graph")
    return Graph(W, coords=pts)


def swiss_roll_graph(n: int, k: int = 6, seed: int = 0) -> Graph:
    """k-NN Gaussian graph on points sampled from the Swiss-roll surface in 3-D."""
    if k < 1 or n < k + 1:
        raise GraphError(f"need n >= k + 1 and k >= 1, got n={n}, k={k}")

    def build(s):
        rng = np.random.default_rng(s)
        t = rng.uniform(1.5 * math.pi, 4.5 * math.pi, n)
        y = rng.uniform(0.0, 20.0, n)
        pts = np.column_stack([t * np.cos(t), y, t * np.sin(t)])
        return knn_gaussian_weights(pts, k), pts

    W, pts = _retry(build, seed, "swiss_roll_graph")
    return Graph(W, coords=pts)


def random_bipartite_graph(nl: int, nh: int, p: float, seed: int = 0) -> tuple[Graph, BipartitePartition]:
    """Random bipartite graph with unit weights; vertices ``0..nl-1`` form the low set."""
    if not 0.0 < p <= 1.0:
        raise GraphError(f"edge probability must lie in (0, 1], got {p}")
    if nl < 1 or nh < 1:
        raise GraphError("both sides need at least one vertex")
    n = nl + nh

    def build(s):
        mask = np.random.default_rng(s).random((nl, nh)) < p
        W = np.zeros((n, n))
        W[:nl, nl:] = mask
        return W + W.T, None

    W, _ = _retry(build, seed, "random_bipartite_graph")
    g = Graph(W)
    part = BipartitePartition(tuple(range(nl)), tuple(range(nl, n))).validate(g)
    return g, part


def load_edge_list(path) -> Graph:
    """Read a graph from a text edge list.

    Format: one ``u v w`` triple per line with 0-based indices and ``w > 0``;
    an optional ``N <count>`` header; optional ``# coord u x y ...`` lines;
    any other line starting with ``#`` is a comment. A later line for the
    same ordered pair overrides an earlier one. If both ``(u, v)`` and
    ``(v, u)`` are given with different weights the larger one is kept and
    the returned graph has ``symmetrized=True``.
    """
    n_decl = None
    edges: dict[tuple[int, int], float] = {}
    coords: dict[int, list[float]] = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts and parts[0] == "coord":
                try:
                    coords[int(parts[1])] = [float(v) for v in parts[2:]]
                except (IndexError, ValueError):
                    raise EdgeListError(f"line {lineno}: malformed coord line {raw!r}") from None
            continue
        parts = line.split()
        if parts[0] == "N":
            if len(parts) != 2 or n_decl is not None:
                raise EdgeListError(f"line {lineno}: malformed header {raw!r}")
            try:
                n_decl = int(parts[1])
            except ValueError:
                raise EdgeListError(f"line {lineno}: malformed header {raw!r}") from None
            continue
        if len(parts) not in (2, 3):
            raise EdgeListError(f"line {lineno}: expected 'u v w', got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError:
            raise EdgeListError(f"line {lineno}: expected 'u v w', got {raw!r}") from None
        if w < 0 or not math.isfinite(w):
            raise EdgeListError(f"line {lineno}: negative or non-finite weight {w}")
        if w == 0:
            raise EdgeListError(f"line {lineno}: zero weight")
        if u < 0 or v < 0:
            raise EdgeListError(f"line {lineno}: negative vertex index")
        if u == v:
            raise EdgeListError(f"line {lineno}: self-loop on vertex {u}")
        edges[(u, v)] = w

    max_idx = max([max(e) for e in edges] + list(coords) + [-1])
    n = n_decl if n_decl is not None else max_idx + 1
    if max_idx >= n:
        raise EdgeListError(f"vertex index {max_idx} out of range for N={n}")

    W = np.zeros((n, n))
    asym = False
    for (u, v), w in edges.items():
        back = edges.get((v, u))
        if back is not None and back != w:
            asym = True
            w = max(w, back)
        W[u, v] = W[v, u] = w
    if asym:
        log.warning("edge list %s is asymmetric; symmetrized by max", path)

    C = None
    if coords:
        dims = {len(c) for c in coords.values()}
        if len(coords) != n or len(dims) != 1:
            raise EdgeListError("coord lines must cover every vertex with the same dimension")
        C = np.array([coords[i] for i in range(n)])
    return Graph(W, coords=C, symmetrized=asym)


def save_edge_list(g: Graph, path) -> None:
    """Write ``g`` in the format read by :func:`load_edge_list` (exact float round-trip)."""
    lines = [f"N {g.n}"]
    if g.coords is not None:
        for i, row in enumerate(g.coords):
            lines.append("# coord " + " ".join([str(i)] + [repr(float(c)) for c in row]))
    iu, ju = np.nonzero(np.triu(g.weights))
    for u, v in zip(iu, ju):
        lines.append(f"{u} {v} {float(g.weights[u, v])!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_partition(path, g: Graph) -> BipartitePartition:
    """Read a low-set file: whitespace-separated vertex indices, ``#`` comments allowed."""
    low = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0]
        try:
            low.extend(int(tok) for tok in line.split())
        except ValueError:
            raise GraphError(f"malformed partition line {raw!r}") from None
    return make_partition(g, low)
