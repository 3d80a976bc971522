"""Bipartite graph filter banks and their equivalence with critically sampled two-channel sampling.

On a bipartite graph with sides ``V_L`` and ``V_H`` of equal size, the
normalized Laplacian is ``I - [[0, B], [B^T, 0]]`` with
``B = D_L^-1/2 W_LH D_H^-1/2``. From a full SVD ``B = P diag(s) Q^T`` the
eigenvectors are arranged as

    V = [[U_LL,  U_LL J],
         [U_HL, -U_HL J]],    U_LL = P / sqrt(2),  U_HL = Q / sqrt(2),

with eigenvalues ``1 - s`` (ascending) in the first half and their mirror
images ``1 + s`` in the second half; ``J`` reverses column order. Channel 0
samples ``V_L`` after filtering with ``H_0`` and channel 1 samples ``V_H``
after ``H_1``; synthesis applies ``G_l`` after upsampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConnectivityError, GraphError, NumericalError, PairingError
from .filters import SpectralKernel, ideal_pair, meyer_pair
from .graph import BipartitePartition, Graph, laplacian
from .multichannel import McsSystem, SubbandOperators
from .sampling import ChannelSpec, truncated_pinv
from .spectral import SpectralDecomposition, fix_signs

PAIRING_TOL = 1e-8
PR_TOL = 1e-8


def bipartite_spectrum(g: Graph, part: BipartitePartition) -> SpectralDecomposition:
    """Normalized-Laplacian eigenpairs in the paired block layout described above.

    Rows of the returned eigenvector matrix follow the original vertex order.
    Multiple singular values (including zeros, i.e. eigenvalue 1) are handled
    by the SVD, which always returns complete orthonormal ``P`` and ``Q``.
    """
    part.validate(g)
    low, high = list(part.low_set), list(part.high_set)
    if len(low) != len(high):
        raise GraphError(f"sides must have equal size, got {len(low)} and {len(high)}")
    if not g.is_connected():
        raise ConnectivityError("bipartite filter banks need a connected graph")
    d = g.degrees
    W_lh = g.weights[np.ix_(low, high)]
    B = W_lh / np.sqrt(d[low])[:, None] / np.sqrt(d[high])[None, :]
    P, s, Qt = np.linalg.svd(B)
    Q = Qt.T
    # flip each singular pair jointly so the sign convention acts on P
    signs = np.sign((fix_signs(P) * P).sum(axis=0))
    P, Q = P * signs, Q * signs
    h = len(low)
    J = np.eye(h)[::-1]
    V = np.zeros((g.n, g.n))
    V[low, :h] = P / math.sqrt(2.0)
    V[low, h:] = P @ J / math.sqrt(2.0)
    V[high, :h] = Q / math.sqrt(2.0)
    V[high, h:] = -Q @ J / math.sqrt(2.0)
    evals = np.concatenate([1.0 - s, (1.0 + s)[::-1]])
    _check_pairing(g, V, evals)
    V.setflags(write=False)
    evals.setflags(write=False)
    return SpectralDecomposition(V, evals, "normalized")


def _check_pairing(g: Graph, V: np.ndarray, evals: np.ndarray) -> None:
    L = laplacian(g, "normalized")
    defect = np.linalg.norm(L @ V - V * evals) / max(1.0, np.linalg.norm(L))
    if defect > PAIRING_TOL:
        raise PairingError(f"eigenvector pairing failed (residual {defect:.3g})")
    if np.abs(evals + evals[::-1] - 2.0).max() > PAIRING_TOL:
        raise PairingError("spectrum is not symmetric about 1")


def bipartite_qmf_kernels(kind: str, n: int | None = None) -> tuple[SpectralKernel, ...]:
    """Analysis and synthesis kernels ``(H0, H1, G0, G1)`` satisfying perfect reconstruction.

    ``"meyer"`` uses the Meyer pair on ``[0, 2]`` (transition between 2/3 and
    4/3), for which ``high(lam) = low(2 - lam)``. ``"ideal"`` uses indicators
    of the lower and upper half of the eigenvalue indices and needs ``n``.
    Every kernel carries a gain of ``sqrt(2)`` so that
    ``G0 H0 + G1 H1 = 2`` and the aliasing terms cancel.
    """
    if kind == "meyer":
        low, high = meyer_pair(8.0 / 3.0)
    elif kind == "ideal":
        if n is None or n % 2:
            raise ValueError("ideal kernels need an even vertex count n")
        low, high = ideal_pair(n, range(n // 2))
    else:
        raise ValueError(f"unknown kernel family {kind!r}")
    r2 = math.sqrt(2.0)
    return low.scaled(r2), high.scaled(r2), low.scaled(r2), high.scaled(r2)


def _resolve_kernels(kernels, n):
    if isinstance(kernels, str):
        return bipartite_qmf_kernels(kernels, n)
    kernels = tuple(kernels)
    if len(kernels) == 2:
        return kernels + kernels
    if len(kernels) != 4:
        raise ValueError("pass a family name, (H, G) shared pair, or (H0, H1, G0, G1)")
    return kernels


@dataclass(frozen=True, eq=False)
class BgfbSystem:
    """Assembled two-channel bipartite filter bank (dense)."""

    graph: Graph
    partition: BipartitePartition
    decomposition: SpectralDecomposition
    kernels: tuple
    analysis: tuple  # (S_ana0^T, S_ana1^T), each N/2 x N
    synthesis: tuple  # (S_syn0, S_syn1), each N x N/2
    filters: tuple  # (H0(L), H1(L), G0(L), G1(L))
    factorization_gap: float

    @property
    def n(self) -> int:
        return self.graph.n


def _assemble(g, part, dec, kernels):
    V, lam = dec.evecs, dec.evals
    low, high = list(part.low_set), list(part.high_set)
    h = len(low)
    resp = [k.on_spectrum(lam) for k in kernels]
    H0, H1, G0, G1 = ((V * r) @ V.T for r in resp)
    ana_direct = (H0[low], H1[high])
    syn_direct = (G0[:, low], G1[:, high])
    J = np.eye(h)[::-1]
    I = np.eye(h)
    u_ll = V[low, :h]
    u_hl = V[high, :h]
    fold0 = np.hstack([I, J])
    fold1 = np.hstack([I, -J])
    ana_block = (u_ll @ fold0 * resp[0]) @ V.T, (u_hl @ fold1 * resp[1]) @ V.T
    syn_block = (V * resp[2]) @ fold0.T @ u_ll.T, (V * resp[3]) @ fold1.T @ u_hl.T
    gap = 0.0
    for a, b in zip(ana_direct + syn_direct, ana_block + syn_block):
        gap = max(gap, float(np.linalg.norm(a - b) / max(np.linalg.norm(a), 1e-300)))
    return ana_direct, syn_direct, (H0, H1, G0, G1), gap


def build_bgfb(g: Graph, part: BipartitePartition, kernels="meyer") -> BgfbSystem:
    """Assemble analysis and synthesis operators of a bipartite filter bank.

    Both the direct form ``I_{M V} H_l(L)`` and the block form through
    ``U_LL`` / ``U_HL`` are computed and must agree to ``1e-8`` relative
    Frobenius norm.

    Parameters
    ----------
    kernels : str or tuple of SpectralKernel
        ``"meyer"``, ``"ideal"``, a shared ``(H, G)`` pair or ``(H0, H1, G0, G1)``.
    """
    dec = bipartite_spectrum(g, part)
    ks = _resolve_kernels(kernels, g.n)
    ana, syn, filt, gap = _assemble(g, part, dec, ks)
    if gap > PAIRING_TOL:
        raise PairingError(f"block factorization disagrees with direct form (gap {gap:.3g})")
    return BgfbSystem(g, part, dec, ks, ana, syn, filt, gap)


def with_basis(sys: BgfbSystem, evecs: np.ndarray) -> BgfbSystem:
    """Reassemble ``sys`` on another eigenvector matrix (for example with re-signed pairs)."""
    dec = SpectralDecomposition(np.asarray(evecs, dtype=float), sys.decomposition.evals, "normalized")
    ana, syn, filt, gap = _assemble(sys.graph, sys.partition, dec, sys.kernels)
    return BgfbSystem(sys.graph, sys.partition, dec, sys.kernels, ana, syn, filt, gap)


@dataclass(frozen=True)
class PrCheck:
    pr: bool
    defect: float


def check_pr(sys: BgfbSystem, tol: float = PR_TOL) -> PrCheck:
    """Perfect-reconstruction defect ``||S_syn0 S_ana0^T + S_syn1 S_ana1^T - I||_2``."""
    T = sum(s @ a for s, a in zip(sys.synthesis, sys.analysis))
    defect = float(np.linalg.norm(T - np.eye(sys.n), 2))
    return PrCheck(defect <= tol, defect)


def mcs_from_bgfb(sys: BgfbSystem) -> McsSystem:
    """Critically sampled two-channel system with ``S_l = I_{M_l} H_l`` and ``A_l = S_syn,l``."""
    H0, H1 = sys.filters[:2]
    low, high = sys.partition.low_set, sys.partition.high_set
    ch0 = ChannelSpec(H0, sys.synthesis[0], low)
    ch1 = ChannelSpec(H1, sys.synthesis[1], high)
    return McsSystem((ch0, ch1), critically_sampled=True)


def filterbank_mcs(dec: SpectralDecomposition, low_set, kernels) -> McsSystem:
    """The same two-channel construction on an arbitrary operator.

    Channel 0 samples ``low_set`` after ``H0(L)``; channel 1 samples the
    complement after ``H1(L)``; generators are ``G_l(L)`` restricted to the
    sampled columns. Used to show what breaks without bipartiteness.
    """
    n = dec.n
    H0k, H1k, G0k, G1k = _resolve_kernels(kernels, n)
    U, lam = dec.evecs, dec.evals
    H0, H1, G0, G1 = ((U * k.on_spectrum(lam)) @ U.T for k in (H0k, H1k, G0k, G1k))
    low = sorted(int(v) for v in low_set)
    high = sorted(set(range(n)) - set(low))
    return McsSystem((ChannelSpec(H0, G0[:, low], low), ChannelSpec(H1, G1[:, high], high)), critically_sampled=True)


@dataclass(frozen=True)
class Theorem1Report:
    """Residuals of the filter-bank / two-channel sampling equivalence.

    ``cross_term`` is ``||P0 P1 + P1 P0||_2`` with oblique projectors
    ``P_l = A_l (S_l^T A_l)^-1 S_l^T``; ``reconstruction`` is
    ``||A0 (S_A^T A0)^-1 S_A^T + A1 (S_B^T A1)^-1 S_B^T - I||_2``;
    ``sa_gap`` and ``sb_gap`` are ``||S_A^T - S_0^T||_2`` and ``||S_B^T - S_1^T||_2``.
    """

    cross_term: float
    reconstruction: float
    sa_gap: float
    sb_gap: float

    def holds(self, tol: float = 1e-8) -> bool:
        return max(self.cross_term, self.reconstruction, self.sa_gap, self.sb_gap) <= tol


def theorem1_residuals(mcs: McsSystem) -> Theorem1Report:
    """Evaluate the equivalence residuals on a critically sampled system (dense)."""
    ch0, ch1 = mcs.channels
    n = mcs.n
    eye = np.eye(n)
    S0, S1 = ch0.sample_matrix(eye), ch1.sample_matrix(eye)
    A0, A1 = ch0.generator, ch1.generator
    P0 = A0 @ truncated_pinv(S0 @ A0)[0] @ S0
    P1 = A1 @ truncated_pinv(S1 @ A1)[0] @ S1
    cross = float(np.linalg.norm(P0 @ P1 + P1 @ P0, 2))
    try:
        ops = SubbandOperators(mcs)
    except NumericalError:
        return Theorem1Report(cross, float("inf"), float("inf"), float("inf"))
    SA, SB = ops.materialize()
    rec = A0 @ truncated_pinv(ops.sa_a0)[0] @ SA + A1 @ truncated_pinv(ops.sb_a1)[0] @ SB
    return Theorem1Report(
        cross,
        float(np.linalg.norm(rec - eye, 2)),
        float(np.linalg.norm(SA - S0, 2)),
        float(np.linalg.norm(SB - S1, 2)),
    )


def verify_theorem1(sys: BgfbSystem, mcs: McsSystem | None = None) -> Theorem1Report:
    """Residuals for the two-channel system induced by a bipartite filter bank."""
    return theorem1_residuals(mcs_from_bgfb(sys) if mcs is None else mcs)
