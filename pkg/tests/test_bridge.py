import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from graph_mcs.bridge import (
    bipartite_qmf_kernels,
    bipartite_spectrum,
    build_bgfb,
    check_pr,
    filterbank_mcs,
    mcs_from_bgfb,
    theorem1_residuals,
    verify_theorem1,
    with_basis,
)
from graph_mcs.errors import ConnectivityError, GraphError
from graph_mcs.filters import constant_kernel
from graph_mcs.graph import (
    BipartitePartition,
    Graph,
    laplacian,
    make_partition,
    random_bipartite_graph,
    random_sensor_graph,
)
from graph_mcs.multichannel import recover_mcs, subband_operators
from graph_mcs.spectral import eigendecompose


def k22():
    return random_bipartite_graph(2, 2, 1.0)


def test_spectrum_folding_and_eigenpairs():
    g, part = random_bipartite_graph(8, 8, 0.4, seed=2)
    d = bipartite_spectrum(g, part)
    np.testing.assert_allclose(d.evals + d.evals[::-1], 2, atol=1e-12)
    L = laplacian(g, "normalized")
    np.testing.assert_allclose(L @ d.evecs, d.evecs * d.evals, atol=1e-12)
    np.testing.assert_allclose(d.evecs.T @ d.evecs, np.eye(16), atol=1e-12)
    ref = eigendecompose(L, "normalized").evals
    np.testing.assert_allclose(np.sort(d.evals), ref, atol=1e-10)


def test_block_structure():
    g, part = random_bipartite_graph(6, 6, 0.5, seed=4)
    V = bipartite_spectrum(g, part).evecs
    low, high = list(part.low_set), list(part.high_set)
    J = np.eye(6)[::-1]
    np.testing.assert_allclose(V[low, 6:], V[low, :6] @ J, atol=1e-15)
    np.testing.assert_allclose(V[high, 6:], -V[high, :6] @ J, atol=1e-15)


def test_block_structure_with_permuted_sides():
    g, part = random_bipartite_graph(4, 4, 0.8, seed=1)
    perm = np.random.default_rng(0).permutation(8)
    Wp = g.weights[np.ix_(perm, perm)]
    inv = np.argsort(perm)
    gp = Graph(Wp)
    partp = make_partition(gp, [int(inv[v]) for v in part.low_set])
    fb = build_bgfb(gp, partp, "meyer")
    assert check_pr(fb).pr
    assert verify_theorem1(fb).holds()


def test_k22_ideal_factorizations_agree():
    g, part = k22()
    fb = build_bgfb(g, part, "ideal")
    assert fb.factorization_gap < 1e-12


def test_k11_identity_kernel():
    g, part = random_bipartite_graph(1, 1, 1.0)
    one = constant_kernel()
    fb = build_bgfb(g, part, (one, one, one, one))
    np.testing.assert_allclose(fb.analysis[0], [[1.0, 0.0]], atol=1e-15)
    np.testing.assert_allclose(fb.analysis[1], [[0.0, 1.0]], atol=1e-15)


def test_meyer_random_bipartite_agreement():
    g, part = random_bipartite_graph(8, 8, 0.4, seed=3)
    fb = build_bgfb(g, part, "meyer")
    assert fb.factorization_gap <= 1e-8


def test_unequal_sides_rejected():
    g, part = random_bipartite_graph(3, 5, 0.8, seed=0)
    with pytest.raises(GraphError):
        build_bgfb(g, part)


def test_disconnected_rejected():
    W = np.zeros((4, 4))
    W[0, 2] = W[2, 0] = W[1, 3] = W[3, 1] = 1.0
    g = Graph(W)
    with pytest.raises(ConnectivityError):
        build_bgfb(g, make_partition(g, [0, 1]))


def test_non_bipartite_partition_rejected():
    g = Graph(np.ones((4, 4)) - np.eye(4))
    with pytest.raises(GraphError):
        build_bgfb(g, BipartitePartition((0, 1), (2, 3)))


def test_pr_meyer_n16():
    g, part = random_bipartite_graph(8, 8, 0.4, seed=5)
    r = check_pr(build_bgfb(g, part, "meyer"))
    assert r.pr and r.defect <= 1e-8


def test_pr_ideal_n16():
    g, part = random_bipartite_graph(8, 8, 0.4, seed=6)
    assert check_pr(build_bgfb(g, part, "ideal")).defect <= 1e-8


def test_degenerate_channel_defect():
    g, part = random_bipartite_graph(8, 8, 0.4, seed=5)
    h0, h1, g0, g1 = bipartite_qmf_kernels("meyer")
    zero = constant_kernel(0.0)
    fb = build_bgfb(g, part, (zero, h1, g0, g1))
    r = check_pr(fb)
    expected = np.linalg.norm(fb.synthesis[1] @ fb.analysis[1] - np.eye(16), 2)
    assert r.defect == pytest.approx(expected)
    assert not r.pr and r.defect > 0.1


def test_identity_kernels_half_synthesis_k22():
    g, part = k22()
    one, half = constant_kernel(1.0), constant_kernel(0.5)
    r = check_pr(build_bgfb(g, part, (one, one, half, half)))
    # synthesis . analysis = 0.5 (D_L + D_H) = 0.5 I, so the defect is 0.5
    assert r.defect == pytest.approx(0.5, abs=1e-12)


def test_pr_invariant_to_pair_resigning():
    g, part = random_bipartite_graph(8, 8, 0.4, seed=8)
    fb = build_bgfb(g, part, "meyer")
    V = fb.decomposition.evecs
    s = np.random.default_rng(1).choice([-1.0, 1.0], size=8)
    flipped = V * np.concatenate([s, s[::-1]])
    fb2 = with_basis(fb, flipped)
    assert fb2.factorization_gap < 1e-12
    assert check_pr(fb2).defect == pytest.approx(check_pr(fb).defect, abs=1e-13)


def test_theorem1_meyer_n16():
    g, part = random_bipartite_graph(8, 8, 0.4, seed=9)
    r = verify_theorem1(build_bgfb(g, part, "meyer"))
    assert r.holds(1e-8), r


def test_theorem1_k11_exact():
    g, part = random_bipartite_graph(1, 1, 1.0)
    r = verify_theorem1(build_bgfb(g, part, "meyer"))
    assert max(r.cross_term, r.reconstruction, r.sa_gap, r.sb_gap) < 1e-15


def test_subband_operators_reduce_to_channel_operators():
    g, part = random_bipartite_graph(8, 8, 0.5, seed=10)
    sys = mcs_from_bgfb(build_bgfb(g, part, "meyer"))
    SA, SB = subband_operators(sys).materialize()
    eye = np.eye(16)
    np.testing.assert_allclose(SA, sys.channels[0].sample_matrix(eye), atol=1e-9)
    np.testing.assert_allclose(SB, sys.channels[1].sample_matrix(eye), atol=1e-9)


def test_mcs_from_bgfb_recovers_any_signal(rng):
    g, part = random_bipartite_graph(8, 8, 0.5, seed=11)
    sys = mcs_from_bgfb(build_bgfb(g, part, "ideal"))
    x = rng.standard_normal(16)
    assert recover_mcs(sys, x).error_norm < 1e-9 * np.linalg.norm(x)


def test_negative_control_non_bipartite():
    g = random_sensor_graph(32, 6, seed=1)
    d = eigendecompose(laplacian(g, "normalized"), "normalized")
    r = theorem1_residuals(filterbank_mcs(d, range(16), "meyer"))
    assert r.cross_term >= 1e-3
    assert not r.holds()


def test_filterbank_mcs_on_bipartite_matches_bgfb():
    g, part = random_bipartite_graph(6, 6, 0.6, seed=12)
    d = bipartite_spectrum(g, part)
    r = theorem1_residuals(filterbank_mcs(d, part.low_set, "meyer"))
    assert r.holds(1e-8)


def test_kernel_family_errors():
    with pytest.raises(ValueError):
        bipartite_qmf_kernels("haar")
    with pytest.raises(ValueError):
        bipartite_qmf_kernels("ideal", 5)
    g, part = k22()
    with pytest.raises(ValueError):
        build_bgfb(g, part, (constant_kernel(),) * 3)


def test_meyer_qmf_mirror_property():
    h0, h1, _, _ = bipartite_qmf_kernels("meyer")
    lam = np.linspace(0, 2, 401)
    np.testing.assert_allclose(h1(lam), h0(2 - lam), atol=1e-12)
    np.testing.assert_allclose(h0(lam) ** 2 + h1(lam) ** 2, 2, atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 16), st.floats(0.2, 1.0), st.integers(0, 10_000), st.sampled_from(["meyer", "ideal"]))
def test_theorem1_property(h, p, seed, kind):
    try:
        g, part = random_bipartite_graph(h, h, p, seed=seed)
    except ConnectivityError:
        assume(False)
    fb = build_bgfb(g, part, kind)
    assert check_pr(fb).pr
    assert verify_theorem1(fb).holds(1e-8)
