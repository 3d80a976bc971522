"""Synthetic full-band graph signals and the generator matrices of their two components.

Piecewise smooth (PWS) signals add cluster-wise constants to a low-frequency
component; union-of-bandpass (UBP) signals add a Meyer low-pass and a Meyer
high-pass filtered random spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .filters import meyer_pair
from .spectral import SpectralDecomposition, cluster_indicators, spectral_clusters

RANK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SignalDraw:
    """One signal ``x = sum(components)`` with the coefficients that produced it."""

    x: np.ndarray
    components: tuple
    coefficients: tuple
    seed: int | None = None


@dataclass(frozen=True, eq=False)
class Generators:
    """Generator pair ``(A0, A1)`` of a two-component signal model."""

    a0: np.ndarray
    a1: np.ndarray
    model: str
    labels: np.ndarray | None = None

    def __iter__(self):
        return iter((self.a0, self.a1))

    @property
    def ranks(self) -> tuple[int, int]:
        return _rank(self.a0), _rank(self.a1)


def _rank(A: np.ndarray) -> int:
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s > RANK_TOL)) if s.size else 0


def pws_generators(d: SpectralDecomposition, p: int = 4, bw: int = 32, seed: int = 0) -> Generators:
    """Cluster indicators ``A0`` (N x p) and the ``bw`` lowest-frequency eigenvectors ``A1``."""
    if bw < 1 or bw > d.n:
        raise ValueError(f"bandwidth must lie in [1, N], got {bw}")
    labels = spectral_clusters(d, p, seed=seed)
    return Generators(cluster_indicators(labels), np.array(d.evecs[:, :bw]), "pws", labels)


def ubp_generators(d: SpectralDecomposition) -> Generators:
    """``A_l = U diag(k_l(lam))`` for the Meyer pair on ``[0, lam_max]``."""
    low, high = meyer_pair(d.lmax)
    U, lam = d.evecs, d.evals
    return Generators(U * low(lam), U * high(lam), "ubp")


def _draw(gens, seed, coefficients, sizes):
    if coefficients is None:
        rng = np.random.default_rng(seed)
        coefficients = tuple(rng.standard_normal(k) for k in sizes)
    else:
        coefficients = tuple(np.asarray(c, dtype=float) for c in coefficients)
        for c, k in zip(coefficients, sizes):
            if c.shape != (k,):
                raise ValueError(f"coefficient vector of shape {c.shape}, expected ({k},)")
    a0, a1 = gens
    comps = (a0 @ coefficients[0], a1 @ coefficients[1])
    return SignalDraw(comps[0] + comps[1], comps, coefficients, seed)


def draw_pws(gens, seed=None, coefficients=None) -> SignalDraw:
    """``x = A0 d1 + A1 d2`` with standard normal ``d1`` (length p) and ``d2`` (length bw)."""
    a0, a1 = gens
    return _draw(gens, seed, coefficients, (a0.shape[1], a1.shape[1]))


def draw_ubp(gens, seed=None, coefficients=None) -> SignalDraw:
    """``x = A0 d0 + A1 d1`` with standard normal length-N ``d0`` and ``d1``."""
    a0, a1 = gens
    return _draw(gens, seed, coefficients, (a0.shape[1], a1.shape[1]))
