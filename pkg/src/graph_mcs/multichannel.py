"""Two-channel sampling: stacked recovery, the subband-wise rewrite and two-channel set selection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, lu_factor, lu_solve

from .errors import DimensionError, NumericalError
from .metrics import mse_db
from .sampling import (
    DS_KAPPA_MAX,
    PINV_TOL,
    ChannelSpec,
    SelectionTrace,
    _prepare,
    default_beta,
    neumann_solve,
    schur_scores,
    truncated_pinv,
)


@dataclass(frozen=True, eq=False)
class McsSystem:
    """Exactly two sampling channels acting on the same graph signal.

    ``critically_sampled`` asserts that channel 1 samples the complement of
    channel 0's set; it is checked on construction.
    """

    channels: tuple[ChannelSpec, ChannelSpec]
    critically_sampled: bool = False

    def __post_init__(self):
        chans = tuple(self.channels)
        if len(chans) != 2:
            raise ValueError(f"exactly two channels are supported, got {len(chans)}")
        if chans[0].n != chans[1].n:
            raise DimensionError("channels act on graphs of different size")
        object.__setattr__(self, "channels", chans)
        if self.critically_sampled:
            m0, m1 = set(chans[0].sampling_set), set(chans[1].sampling_set)
            if m0 & m1 or len(m0 | m1) != self.n:
                raise ValueError("critically sampled system needs M1 = complement of M0")

    @classmethod
    def critical(cls, g0, a0, g1, a1, m0) -> "McsSystem":
        """Critically sampled system: channel 1 samples the sorted complement of ``m0``."""
        a0 = np.asarray(a0, dtype=float)
        n = a0.shape[0]
        m0 = [int(v) for v in m0]
        m1 = sorted(set(range(n)) - set(m0))
        return cls((ChannelSpec(g0, a0, m0), ChannelSpec(g1, a1, m1)), critically_sampled=True)

    @property
    def n(self) -> int:
        return self.channels[0].n

    @property
    def generator(self) -> np.ndarray:
        return np.hstack([c.generator for c in self.channels])

    def samples(self, x: np.ndarray) -> np.ndarray:
        return np.concatenate([c.sample_matrix(x) for c in self.channels])


@dataclass(frozen=True, eq=False)
class CorrectionMatrix:
    """Stacked cross products ``m_sa[l][j] = S_l^T A_j`` and their pseudoinverse."""

    m_sa: np.ndarray
    pinv: np.ndarray
    blocks: tuple
    rank: int
    cond: float
    block_cond: tuple

    def block(self, l: int, j: int) -> np.ndarray:
        return self.blocks[l][j]


def _cond(M: np.ndarray) -> float:
    if M.size == 0:
        return float("inf")
    s = np.linalg.svd(M, compute_uv=False)
    return float(s[0] / s[-1]) if s[-1] > 0 else float("inf")


def assemble_correction(sys: McsSystem, tol: float = PINV_TOL) -> CorrectionMatrix:
    """Correction matrix with blocks computed by filtering each generator and restricting rows."""
    gens = [c.generator for c in sys.channels]
    widths = np.cumsum([0] + [g.shape[1] for g in gens])
    stacked = np.hstack(gens)
    blocks = []
    for ch in sys.channels:
        row = ch.sample_matrix(stacked)
        blocks.append(tuple(row[:, widths[j] : widths[j + 1]] for j in range(len(gens))))
    m_sa = np.vstack([np.hstack(b) for b in blocks])
    inv, rank, cond = truncated_pinv(m_sa, tol)
    block_cond = tuple(tuple(_cond(b) for b in row) for row in blocks)
    return CorrectionMatrix(m_sa, inv, tuple(blocks), rank, cond, block_cond)


@dataclass(frozen=True, eq=False)
class McsRecovery:
    signal: np.ndarray
    error_norm: float
    mse_db: float
    rank: int
    cond: float
    block_cond: tuple


def recover_mcs(sys: McsSystem, x: np.ndarray, corr: CorrectionMatrix | None = None) -> McsRecovery:
    """Sample ``x`` through both channels and recover ``[A0 A1] M_SA^+ [y0; y1]``."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] != sys.n:
        raise DimensionError(f"signal length {x.shape[0]} != {sys.n}")
    corr = assemble_correction(sys) if corr is None else corr
    rec = sys.generator @ (corr.pinv @ sys.samples(x))
    return McsRecovery(rec, float(np.linalg.norm(x - rec)), mse_db(x, rec), corr.rank, corr.cond, corr.block_cond)


class SubbandOperators:
    """Subband-wise sampling operators

    ``S_A^T = S_0^T - S_0^T A_1 (S_1^T A_1)^-1 S_1^T`` and
    ``S_B^T = S_1^T - S_1^T A_0 (S_0^T A_0)^-1 S_0^T``,

    applied with two channel applications and one small solve each.
    """

    def __init__(self, sys: McsSystem, kappa_max: float = DS_KAPPA_MAX):
        ch0, ch1 = sys.channels
        self.sys = sys
        b00, b01 = (ch0.sample_matrix(ch0.generator), ch0.sample_matrix(ch1.generator))
        b10, b11 = (ch1.sample_matrix(ch0.generator), ch1.sample_matrix(ch1.generator))
        for name, b in (("S_0^T A_0", b00), ("S_1^T A_1", b11)):
            if b.shape[0] != b.shape[1]:
                raise DimensionError(f"{name} must be square, got {b.shape}")
            c = _cond(b)
            if not c <= kappa_max:
                raise NumericalError(f"{name} is not invertible (cond={c:.3g})")
        self.b00, self.b01, self.b10, self.b11 = b00, b01, b10, b11
        self._lu00 = lu_factor(b00)
        self._lu11 = lu_factor(b11)
        # subband correction blocks S_A^T A_0 and S_B^T A_1
        self.sa_a0 = b00 - b01 @ lu_solve(self._lu11, b10)
        self.sb_a1 = b11 - b10 @ lu_solve(self._lu00, b01)

    @property
    def correction_shapes(self):
        return self.sa_a0.shape, self.sb_a1.shape

    def sa(self, x):
        ch0, ch1 = self.sys.channels
        return ch0.sample_matrix(x) - self.b01 @ lu_solve(self._lu11, ch1.sample_matrix(x))

    def sb(self, x):
        ch0, ch1 = self.sys.channels
        return ch1.sample_matrix(x) - self.b10 @ lu_solve(self._lu00, ch0.sample_matrix(x))

    def materialize(self):
        """Dense ``(S_A^T, S_B^T)``, for verification only."""
        eye = np.eye(self.sys.n)
        return self.sa(eye), self.sb(eye)


def subband_operators(sys: McsSystem, kappa_max: float = DS_KAPPA_MAX) -> SubbandOperators:
    return SubbandOperators(sys, kappa_max)


def recover_mcs_subband(
    sys: McsSystem,
    x: np.ndarray,
    ops: SubbandOperators | None = None,
    tol: float = PINV_TOL,
    refine: int = 1,
) -> np.ndarray:
    """Recovery with the block-diagonal correction ``diag(S_A^T A_0, S_B^T A_1)^+``.

    ``x~ = A_0 (S_A^T A_0)^+ S_A^T x + A_1 (S_B^T A_1)^+ S_B^T x``.

    When both diagonal blocks are invertible, ``refine`` steps of iterative
    refinement are applied: the stacked samples of the current estimate are
    compared with those of ``x`` and the subband solve is repeated on the
    difference. This has the same fixed point and removes the rounding error
    amplified by the Schur-complement blocks.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[0] != sys.n:
        raise DimensionError(f"signal length {x.shape[0]} != {sys.n}")
    ops = subband_operators(sys) if ops is None else ops
    a0, a1 = (c.generator for c in sys.channels)
    inv0, r0, _ = truncated_pinv(ops.sa_a0, tol)
    inv1, r1, _ = truncated_pinv(ops.sb_a1, tol)
    ch0, ch1 = sys.channels

    def solve(y0, y1):
        # subband samples from stacked samples, then the two small solves
        sa = y0 - ops.b01 @ lu_solve(ops._lu11, y1)
        sb = y1 - ops.b10 @ lu_solve(ops._lu00, y0)
        return inv0 @ sa, inv1 @ sb

    y0, y1 = ch0.sample_matrix(x), ch1.sample_matrix(x)
    d0, d1 = solve(y0, y1)
    if r0 == ops.sa_a0.shape[0] == ops.sa_a0.shape[1] and r1 == ops.sb_a1.shape[0] == ops.sb_a1.shape[1]:
        for _ in range(refine):
            e0 = y0 - ops.b00 @ d0 - ops.b01 @ d1
            e1 = y1 - ops.b10 @ d0 - ops.b11 @ d1
            c0, c1 = solve(e0, e1)
            d0, d1 = d0 + c0, d1 + c1
    return a0 @ d0 + a1 @ d1


def _complement_schur(Z1r: np.ndarray, cand: np.ndarray) -> np.ndarray:
    """``Z_yy - Z_yR Z_R^-1 Z_Ry`` with ``R = cand - {y}``, for every ``y`` in ``cand``.

    Equals ``1 / [(Z_cand)^-1]_yy``.
    """
    B = Z1r[np.ix_(cand, cand)]
    if cand.size == 1:
        return np.diag(B).copy()
    try:
        inv_diag = np.diag(cho_solve(cho_factor(B), np.eye(cand.size)))
        return 1.0 / inv_diag
    except LinAlgError:
        out = np.empty(cand.size)
        for j in range(cand.size):
            rest = np.delete(np.arange(cand.size), j)
            sol = np.linalg.lstsq(B[np.ix_(rest, rest)], B[rest, j], rcond=None)[0]
            out[j] = B[j, j] - B[j, rest] @ sol
        return out


def _complement_schur_neumann(Z1r, cand, gamma, max_iter):
    B = Z1r[np.ix_(cand, cand)]
    c = cand.size
    if c == 1:
        return np.diag(B).copy(), 0, 0
    mask = 1.0 - np.eye(c)
    rhs = B * mask
    res = neumann_solve(B, rhs, gamma, max_iter if max_iter is not None else 10 * (c - 1), mask=mask)
    den = np.diag(B) - np.einsum("ij,ij->j", rhs, res.x)
    return den, int(res.iterations.max(initial=0)), int(res.fallback.sum())


def sss_two_channel(
    Z0: np.ndarray,
    Z1: np.ndarray,
    K: int,
    beta: float | None = None,
    ridge: float | None = None,
    mode: str = "exact",
    max_iter: int | None = None,
    return_trace: bool = False,
):
    """Greedy two-channel selection maximizing ``det(Z0_M) det(Z1_{M^c})``.

    At each step the vertex ``y`` maximizing the ratio of the Schur complement
    of ``Z0`` over the current set ``M`` to the Schur complement of ``Z1`` over
    ``V - (M + {y})`` joins ``M``. Both matrices are regularized by
    ``ridge * I`` (default ``1e-8 trace / N`` of each). ``mode="neumann"``
    computes the inner solves by Neumann iterations with tolerance ``beta``;
    ``mode="exact"`` uses direct factorizations. The denominator is floored
    at ``1e-12 trace(Z1) / N``.

    Returns ``(M, M^c)``: the selection-ordered set for channel 0 and the
    sorted complement for channel 1.
    """
    if mode not in ("exact", "neumann"):
        raise ValueError(f"unknown mode {mode!r}")
    Z0r, e0 = _prepare(Z0, K, ridge)
    Z1r, e1 = _prepare(Z1, K, ridge)
    n = Z0r.shape[0]
    if Z1r.shape != Z0r.shape:
        raise DimensionError("Z0 and Z1 differ in size")
    z1_raw = Z1r - e1 * np.eye(n)
    floor = 1e-12 * float(np.trace(z1_raw)) / n
    if floor <= 0:
        floor = np.finfo(float).tiny
    gamma = None
    if mode == "neumann":
        gamma = min(default_beta(Z0r - e0 * np.eye(n)), default_beta(z1_raw)) if beta is None else float(beta)
        if gamma <= 0:
            raise ValueError("beta must be positive")
    trace = SelectionTrace(ridge=max(e0, e1), beta=gamma or 0.0)
    free = np.ones(n, dtype=bool)
    diag0 = np.diag(Z0r)
    for _ in range(K):
        cand = np.flatnonzero(free)
        chosen = trace.chosen
        if mode == "exact":
            num = schur_scores(Z0r, chosen, cand)
            den = _complement_schur(Z1r, cand)
            trace.iterations.append(0)
        else:
            if chosen:
                cross = Z0r[np.ix_(chosen, cand)]
                cap = max_iter if max_iter is not None else 10 * len(chosen)
                res = neumann_solve(Z0r[np.ix_(chosen, chosen)], cross, gamma, cap)
                num = diag0[cand] - np.einsum("ij,ij->j", cross, res.x)
                it0, fb0 = int(res.iterations.max(initial=0)), int(res.fallback.sum())
            else:
                num, it0, fb0 = diag0[cand].copy(), 0, 0
            den, it1, fb1 = _complement_schur_neumann(Z1r, cand, gamma, max_iter)
            trace.iterations.append(max(it0, it1))
            trace.fallbacks += fb0 + fb1
        low = den < floor
        trace.floor_hits += int(low.sum())
        ratio = num / np.where(low, floor, den)
        j = int(np.argmax(ratio))
        trace.chosen.append(int(cand[j]))
        trace.scores.append(float(ratio[j]))
        free[cand[j]] = False
    comp = [int(v) for v in np.flatnonzero(free)]
    out = (list(trace.chosen), comp)
    return (out, trace) if return_trace else out
