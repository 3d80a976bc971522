import numpy as np
import pytest

from graph_mcs.filters import meyer_pair
from graph_mcs.graph import Graph, laplacian, random_sensor_graph
from graph_mcs.signals import draw_pws, draw_ubp, pws_generators, ubp_generators
from graph_mcs.spectral import eigendecompose, gft

from conftest import two_cliques


@pytest.fixture(scope="module")
def dec():
    return eigendecompose(laplacian(random_sensor_graph(64, 6, seed=1)))


def test_pws_two_cliques_block_indicators():
    d = eigendecompose(laplacian(Graph(two_cliques())))
    gens = pws_generators(d, 2, 1)
    expected = np.zeros((8, 2))
    expected[:4, 0] = 1
    expected[4:, 1] = 1
    np.testing.assert_array_equal(gens.a0, expected)


def test_pws_bandwidth_one_is_constant(dec):
    gens = pws_generators(dec, 4, 1)
    col = gens.a1[:, 0]
    np.testing.assert_allclose(col, col[0], atol=1e-12)


def test_pws_indicators_sum_to_one(dec):
    gens = pws_generators(dec, 4, 8)
    np.testing.assert_array_equal(gens.a0.sum(axis=1), 1)
    assert gens.a0.shape == (64, 4) and gens.a1.shape == (64, 8)
    assert gens.ranks == (4, 8)


@pytest.mark.parametrize("bw", [0, 65])
def test_pws_bandwidth_bounds(dec, bw):
    with pytest.raises(ValueError):
        pws_generators(dec, 4, bw)


def test_draw_pws_zero_coefficients(dec):
    gens = pws_generators(dec, 4, 8)
    draw = draw_pws(gens, coefficients=(np.zeros(4), np.zeros(8)))
    np.testing.assert_array_equal(draw.x, 0)


def test_draw_pws_single_cluster(dec):
    gens = pws_generators(dec, 4, 8)
    draw = draw_pws(gens, coefficients=(np.eye(4)[1], np.zeros(8)))
    np.testing.assert_array_equal(draw.x, gens.a0[:, 1])


def test_draw_pws_deterministic_and_consistent(dec):
    gens = pws_generators(dec, 4, 8)
    a, b = draw_pws(gens, seed=3), draw_pws(gens, seed=3)
    assert a.x.tobytes() == b.x.tobytes()
    np.testing.assert_allclose(a.x, a.components[0] + a.components[1], atol=1e-12)
    assert a.coefficients[0].shape == (4,) and a.coefficients[1].shape == (8,)
    assert not np.array_equal(a.x, draw_pws(gens, seed=4).x)


def test_draw_bad_coefficients(dec):
    gens = pws_generators(dec, 4, 8)
    with pytest.raises(ValueError):
        draw_pws(gens, coefficients=(np.zeros(3), np.zeros(8)))


def test_ubp_power_complementary(dec):
    gens = ubp_generators(dec)
    U = dec.evecs
    gram = U.T @ (gens.a0 @ gens.a0.T + gens.a1 @ gens.a1.T) @ U
    np.testing.assert_allclose(gram, np.eye(64), atol=1e-10)


def test_ubp_first_column(dec):
    gens = ubp_generators(dec)
    np.testing.assert_allclose(gens.a0[:, 0], dec.evecs[:, 0], atol=1e-15)


def test_ubp_rank_counts_passband(dec):
    gens = ubp_generators(dec)
    _, high = meyer_pair(dec.lmax)
    assert np.linalg.matrix_rank(gens.a1, tol=1e-12) == int(np.sum(high(dec.evals) > 1e-12))
    assert gens.ranks[1] == int(np.sum(high(dec.evals) > 1e-12))


def test_draw_ubp_properties(dec):
    gens = ubp_generators(dec)
    np.testing.assert_array_equal(draw_ubp(gens, coefficients=(np.zeros(64), np.zeros(64))).x, 0)
    d0 = np.random.default_rng(0).standard_normal(64)
    x = draw_ubp(gens, coefficients=(d0, np.zeros(64))).x
    coef = np.linalg.lstsq(gens.a0, x, rcond=None)[0]
    np.testing.assert_allclose(gens.a0 @ coef, x, atol=1e-10)
    a = draw_ubp(gens, seed=9)
    assert a.x.tobytes() == draw_ubp(gens, seed=9).x.tobytes()


def test_ubp_spectrum_profile(dec):
    gens = ubp_generators(dec)
    low, high = meyer_pair(dec.lmax)
    draw = draw_ubp(gens, seed=2)
    d0, d1 = draw.coefficients
    xh = np.abs(gft(dec, draw.x))
    bound = np.abs(low(dec.evals) * d0) + np.abs(high(dec.evals) * d1)
    assert np.all(xh <= bound + 1e-10)
