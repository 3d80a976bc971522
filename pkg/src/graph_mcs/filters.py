"""Spectral kernels, exact spectral filtering and matrix-free Chebyshev filtering."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from scipy import sparse
from scipy.sparse.linalg import eigsh

from .errors import DimensionError, NumericalError
from .spectral import SpectralDecomposition

GRID_POINTS = 1000


@dataclass(frozen=True, eq=False)
class SpectralKernel:
    """A scalar function of graph frequency.

    Ideal kernels are defined on eigenvalue *indices* rather than values; for
    those ``indices`` is set and the kernel can only be evaluated against a
    full spectrum via :meth:`on_spectrum`.
    """

    func: Callable[[np.ndarray], np.ndarray] | None
    label: str
    indices: frozenset | None = None
    gain: float = 1.0

    def __call__(self, lam):
        if self.func is None:
            raise TypeError(f"kernel {self.label!r} is index-based; use on_spectrum()")
        return self.gain * self.func(np.asarray(lam, dtype=float))

    def on_spectrum(self, evals: np.ndarray) -> np.ndarray:
        evals = np.asarray(evals, dtype=float)
        if self.indices is not None:
            out = np.zeros(evals.shape[0])
            out[[i for i in self.indices if i < evals.shape[0]]] = self.gain
            return out
        return np.broadcast_to(self(evals), evals.shape).astype(float)

    def scaled(self, c: float) -> "SpectralKernel":
        """Kernel multiplied by the constant ``c``."""
        return SpectralKernel(self.func, self.label, self.indices, self.gain * c)


def constant_kernel(value: float = 1.0) -> SpectralKernel:
    return SpectralKernel(lambda lam: np.full(np.shape(lam), float(value)), f"const({value:g})")


def _meyer_aux(s):
    return s**4 * (35.0 - 84.0 * s + 70.0 * s**2 - 20.0 * s**3)


def meyer_pair(lmax: float) -> tuple[SpectralKernel, SpectralKernel]:
    """Power-complementary Meyer half-band pair on ``[0, lmax]``.

    The low-pass kernel is 1 below ``lmax/4``, decays through the Meyer
    transition to 0 at ``lmax/2``; the high-pass kernel is ``sqrt(1 - low^2)``.
    """
    if lmax <= 0:
        raise ValueError("lmax must be positive")

    def phase(lam):
        t = np.asarray(lam, dtype=float) / lmax
        return t, 0.5 * math.pi * _meyer_aux(np.clip(4.0 * t - 1.0, 0.0, 1.0))

    def low(lam):
        t, ph = phase(lam)
        return np.where(t <= 0.25, 1.0, np.where(t < 0.5, np.cos(ph), 0.0))

    # sqrt(1 - low^2) written as the sine of the same phase, which avoids
    # cancellation where low is close to 1
    def high(lam):
        t, ph = phase(lam)
        return np.where(t <= 0.25, 0.0, np.where(t < 0.5, np.sin(ph), 1.0))

    return SpectralKernel(low, "meyer_low"), SpectralKernel(high, "meyer_high")


def mexican_hat(scale: float) -> SpectralKernel:
    """Mexican-hat wavelet kernel ``(s lam) exp(1 - s lam)``, peak value 1 at ``lam = 1/s``."""

    def g(lam):
        t = scale * np.asarray(lam, dtype=float)
        return t * np.exp(1.0 - t)

    return SpectralKernel(g, f"mexhat(s={scale:.6g})")


def mexican_hat_scaling(lmax: float) -> SpectralKernel:
    """Low-pass scaling kernel of the Mexican-hat filter bank: ``exp(-(2 lam / lmax)^2)``."""
    w = 0.5 * lmax

    def h(lam):
        return np.exp(-((np.asarray(lam, dtype=float) / w) ** 2))

    return SpectralKernel(h, "mexhat_scaling")


def mexican_hat_pair(lmax: float) -> tuple[SpectralKernel, SpectralKernel]:
    """Two-channel Mexican-hat filter bank on ``[0, lmax]``.

    Channel 0 is the low-pass scaling kernel (value 1 at ``lam = 0``) and
    channel 1 the Mexican-hat wavelet with scale ``4 / (3 lmax)``, peaking at
    ``3 lmax / 4``. A wavelet in channel 0 as well would make both channels
    vanish on the constant eigenvector, so the constant component of any
    signal would be unrecoverable.
    """
    if lmax <= 0:
        raise ValueError("lmax must be positive")
    return mexican_hat_scaling(lmax), mexican_hat(4.0 / (3.0 * lmax))


def ideal_pair(n: int, low_indices, high_indices=None) -> tuple[SpectralKernel, SpectralKernel]:
    """Indicator kernels on eigenvalue index sets; ``high`` defaults to the complement."""
    low = frozenset(int(i) for i in low_indices)
    if any(not 0 <= i < n for i in low):
        raise ValueError("index out of range")
    if high_indices is None:
        high = frozenset(range(n)) - low
    else:
        high = frozenset(int(i) for i in high_indices)
        if low & high:
            raise ValueError(f"index sets overlap on {sorted(low & high)}")
    return SpectralKernel(None, "ideal_low", low), SpectralKernel(None, "ideal_high", high)


def exact_filter(d: SpectralDecomposition, k: SpectralKernel) -> np.ndarray:
    """Dense filter matrix ``U diag(k(lam)) U^T``."""
    U = d.evecs
    F = (U * k.on_spectrum(d.evals)) @ U.T
    return 0.5 * (F + F.T)


@dataclass(frozen=True, eq=False)
class ChebyshevFilter:
    """Chebyshev expansion of a kernel on ``interval``.

    ``coeffs`` use the halved-``c0`` convention:
    ``p(lam) = c0/2 + sum_k c_k T_k(y)`` with ``y`` the interval mapped to [-1, 1].
    """

    coeffs: np.ndarray
    interval: tuple[float, float]
    fit_error: float = float("nan")
    label: str = ""

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, lam):
        a, b = self.interval
        y = (2.0 * np.asarray(lam, dtype=float) - (a + b)) / (b - a)
        c = np.array(self.coeffs, dtype=float)
        c[0] *= 0.5
        return npcheb.chebval(y, c)


def chebyshev_fit(k: SpectralKernel, order: int, lmax: float) -> ChebyshevFilter:
    """Interpolate ``k`` at ``order + 1`` Chebyshev nodes mapped to ``[0, lmax]``.

    The sup-norm error on a 1000-point uniform grid is stored in ``fit_error``.
    """
    if order < 0:
        raise ValueError("order must be non-negative")
    if lmax <= 0:
        raise ValueError("lmax must be positive")
    m = order + 1
    theta = math.pi * (np.arange(m) + 0.5) / m
    half = 0.5 * lmax
    samples = k(half * np.cos(theta) + half)
    coeffs = (2.0 / m) * np.cos(np.outer(np.arange(m), theta)) @ samples
    f = ChebyshevFilter(coeffs, (0.0, float(lmax)), label=k.label)
    grid = np.linspace(0.0, lmax, GRID_POINTS)
    err = float(np.max(np.abs(f(grid) - k(grid))))
    return ChebyshevFilter(coeffs, (0.0, float(lmax)), err, k.label)


def gershgorin_bound(L) -> float:
    """Upper bound on the spectrum of a symmetric matrix from Gershgorin discs."""
    if sparse.issparse(L):
        A = abs(L).tocsr()
        diag = L.diagonal()
        radius = np.asarray(A.sum(axis=1)).ravel() - np.abs(diag)
    else:
        L = np.asarray(L)
        diag = np.diag(L)
        radius = np.abs(L).sum(axis=1) - np.abs(diag)
    return float(np.max(diag + radius))


def _check_interval(L, upper: float) -> None:
    if upper >= gershgorin_bound(L):
        return
    diag = L.diagonal() if sparse.issparse(L) else np.diag(L)
    if upper < np.max(diag) * (1.0 - 1e-12):
        raise NumericalError(f"interval upper bound {upper:g} is below the operator spectrum")
    if L.shape[0] <= 2:
        top = float(np.linalg.eigvalsh(L.toarray() if sparse.issparse(L) else L)[-1])
    else:
        v0 = np.ones(L.shape[0])
        top = float(eigsh(L, k=1, which="LA", v0=v0, return_eigenvectors=False, tol=1e-10)[0])
    if top > upper * (1.0 + 1e-8) + 1e-12:
        raise NumericalError(f"interval upper bound {upper:g} < lambda_max {top:g}")


def chebyshev_apply(L, f: ChebyshevFilter, x: np.ndarray, check: bool = True) -> np.ndarray:
    """Apply the polynomial filter ``f(L)`` to ``x`` with the three-term recurrence.

    Only products ``L @ v`` are formed. ``x`` may be a vector or hold signals
    in its columns.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[0] != L.shape[0]:
        raise DimensionError(f"signal length {x.shape[0]} != operator size {L.shape[0]}")
    a, b = f.interval
    if check:
        _check_interval(L, b)
    c = f.coeffs
    half_width = 0.5 * (b - a)
    center = 0.5 * (b + a)

    def shifted(v):
        return (L @ v - center * v) / half_width

    t_prev = x
    out = 0.5 * c[0] * t_prev
    if len(c) == 1:
        return out
    t_cur = shifted(x)
    out = out + c[1] * t_cur
    for ck in c[2:]:
        t_prev, t_cur = t_cur, 2.0 * shifted(t_cur) - t_prev
        out = out + ck * t_cur
    return out


class PolynomialFilter:
    """Matrix-free graph filter ``f(L)``; supports ``filter @ x`` like a dense matrix."""

    def __init__(self, L, cheb: ChebyshevFilter, check: bool = True):
        self.L = L
        self.cheb = cheb
        if check:
            _check_interval(L, cheb.interval[1])

    @property
    def shape(self):
        return self.L.shape

    @property
    def fit_error(self) -> float:
        return self.cheb.fit_error

    def __matmul__(self, x):
        return chebyshev_apply(self.L, self.cheb, x, check=False)

    def matrix(self) -> np.ndarray:
        return self @ np.eye(self.L.shape[0])

    def __repr__(self):
        return f"PolynomialFilter(order={self.cheb.order}, label={self.cheb.label!r})"


def polynomial_filter(L, k: SpectralKernel, order: int = 50, lmax: float | None = None) -> PolynomialFilter:
    """Fit ``k`` by Chebyshev interpolation on ``[0, lmax]`` and wrap it as a filter on ``L``.

    Without an explicit ``lmax`` the Gershgorin bound of ``L`` is used.
    """
    if lmax is None:
        lmax = gershgorin_bound(L)
    return PolynomialFilter(L, chebyshev_fit(k, order, lmax))


def as_matrix(G) -> np.ndarray:
    """Dense matrix of a filter handle (ndarray or :class:`PolynomialFilter`)."""
    return G.matrix() if isinstance(G, PolynomialFilter) else np.asarray(G, dtype=float)
