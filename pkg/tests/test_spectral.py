import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graph_mcs.errors import DimensionError, NumericalError
from graph_mcs.graph import Graph, laplacian, random_sensor_graph
from graph_mcs.spectral import (
    cluster_indicators,
    eigendecompose,
    fix_signs,
    gft,
    igft,
    spectral_clusters,
)

from conftest import two_cliques


def cycle(n):
    W = np.zeros((n, n))
    for i in range(n):
        W[i, (i + 1) % n] = W[(i + 1) % n, i] = 1.0
    return Graph(W)


def test_two_path_spectrum():
    d = eigendecompose(np.array([[1.0, -1.0], [-1.0, 1.0]]))
    np.testing.assert_allclose(d.evals, [0, 2], atol=1e-14)
    np.testing.assert_allclose(d.evecs[:, 0], [1 / np.sqrt(2)] * 2, atol=1e-14)


def test_cycle4_spectrum_matches_characteristic_polynomial():
    L = laplacian(cycle(4))
    # det(L - t I) expanded symbolically: t (t - 2)^2 (t - 4)
    roots = np.sort(np.roots(np.poly(L)).real)
    d = eigendecompose(L)
    np.testing.assert_allclose(d.evals, roots, atol=1e-9)
    np.testing.assert_allclose(d.evals, [0, 2, 2, 4], atol=1e-12)


def test_reconstruction_and_orthonormality():
    L = laplacian(random_sensor_graph(64, 6, seed=1))
    d = eigendecompose(L)
    U = d.evecs
    np.testing.assert_allclose(U.T @ U, np.eye(64), atol=1e-9)
    assert np.linalg.norm(d.operator() - L) / np.linalg.norm(L) < 1e-8
    assert np.all(np.diff(d.evals) >= 0)
    assert d.evals[0] <= 1e-8


def test_sign_convention():
    L = laplacian(random_sensor_graph(32, 5, seed=4))
    U = eigendecompose(L).evecs
    idx = np.argmax(np.abs(U), axis=0)
    assert np.all(U[idx, np.arange(32)] > 0)


def test_fix_signs_tie_goes_to_lowest_index():
    U = np.array([[-1.0, 1.0], [1.0, 1.0]]) / np.sqrt(2)
    out = fix_signs(U)
    assert out[0, 0] > 0 and out[0, 1] > 0


def test_sign_convention_invariant_to_input_signs(rng):
    L = laplacian(random_sensor_graph(32, 5, seed=4))
    U = eigendecompose(L).evecs
    flipped = U * rng.choice([-1.0, 1.0], size=32)
    np.testing.assert_array_equal(fix_signs(flipped), U)


def test_rejects_nonsymmetric():
    with pytest.raises(NumericalError):
        eigendecompose(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_rejects_nonsquare():
    with pytest.raises(DimensionError):
        eigendecompose(np.zeros((2, 3)))


def test_gft_of_eigenvector_is_delta():
    d = eigendecompose(laplacian(random_sensor_graph(32, 5, seed=0)))
    e = np.zeros(32)
    e[0] = 1
    np.testing.assert_allclose(gft(d, d.evecs[:, 0]), e, atol=1e-12)


def test_gft_of_constant():
    d = eigendecompose(laplacian(random_sensor_graph(32, 5, seed=0)))
    xh = gft(d, np.ones(32))
    np.testing.assert_allclose(xh[1:], 0, atol=1e-10)
    assert abs(abs(xh[0]) - np.sqrt(32)) < 1e-10


def test_gft_length_mismatch():
    d = eigendecompose(laplacian(cycle(4)))
    with pytest.raises(DimensionError):
        gft(d, np.ones(5))
    with pytest.raises(DimensionError):
        igft(d, np.ones(3))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**20))
def test_parseval_and_round_trip(seed):
    d = eigendecompose(laplacian(random_sensor_graph(32, 4, seed=1)))
    x = np.random.default_rng(seed).standard_normal(32)
    xh = gft(d, x)
    assert abs(np.linalg.norm(xh) - np.linalg.norm(x)) <= 1e-10 * np.linalg.norm(x)
    assert np.linalg.norm(igft(d, xh) - x) <= 1e-10 * np.linalg.norm(x)


def _cut(W, mask):
    return W[np.ix_(mask, ~mask)].sum()


def test_two_cliques_match_brute_force_min_cut():
    W = two_cliques()
    best = None
    # balanced-or-not, every nontrivial bipartition of 8 vertices
    for bits in itertools.product([False, True], repeat=8):
        mask = np.array(bits)
        if mask.all() or not mask.any() or mask[0]:
            continue
        # ratio cut, so singletons are not favoured
        score = _cut(W, mask) * (1 / mask.sum() + 1 / (~mask).sum())
        if best is None or score < best[0]:
            best = (score, mask)
    oracle = best[1].astype(int)
    d = eigendecompose(laplacian(Graph(W)))
    labels = spectral_clusters(d, 2, seed=0)
    np.testing.assert_array_equal(labels, oracle)
    np.testing.assert_array_equal(labels, [0, 0, 0, 0, 1, 1, 1, 1])


def test_singleton_clusters():
    d = eigendecompose(laplacian(cycle(5)))
    np.testing.assert_array_equal(spectral_clusters(d, 5), np.arange(5))


def test_clusters_deterministic_and_nonempty():
    d = eigendecompose(laplacian(random_sensor_graph(128, 6, seed=3)))
    a = spectral_clusters(d, 4, seed=11)
    b = spectral_clusters(d, 4, seed=11)
    assert a.tobytes() == b.tobytes()
    assert set(a) == {0, 1, 2, 3}
    # canonical numbering: first appearance order
    _, first = np.unique(a, return_index=True)
    assert np.all(np.diff(first) > 0)


@pytest.mark.parametrize("p", [1, 6])
def test_cluster_count_bounds(p):
    d = eigendecompose(laplacian(cycle(5)))
    with pytest.raises(ValueError):
        spectral_clusters(d, p)


def test_cluster_indicators_partition():
    A = cluster_indicators(np.array([0, 1, 1, 2, 0]))
    assert A.shape == (5, 3)
    np.testing.assert_array_equal(A.sum(axis=1), 1)
