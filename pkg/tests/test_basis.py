import numpy as np
import pytest

from fempoint import make_basis, node_count


def test_node_counts():
    assert node_count(1) == 4
    assert node_count(2) == 10
    assert node_count(6) == 84


def test_degree_validation():
    with pytest.raises(ValueError):
        make_basis(0)
    with pytest.raises(ValueError):
        make_basis(7)


def test_degree1_nodes_are_vertices():
    b = make_basis(1)
    assert b.node_count == 4
    # canonical lattice order (a outermost, c innermost): v0, v3, v2, v1
    assert np.array_equal(b.nodes, [[0, 0, 0], [0, 0, 1], [0, 1, 0], [1, 0, 0]])
    # degree-1 functions are the barycentric coordinates of their nodes
    xi = np.array([0.2, 0.3, 0.1])
    assert np.allclose(b.eval(xi), [0.4, 0.1, 0.3, 0.2], atol=1e-14)


@pytest.mark.parametrize("degree", range(1, 7))
def test_nodal_delta_and_partition_of_unity(degree, rng):
    b = make_basis(degree)
    vals = np.array([b.eval(xi) for xi in b.nodes])
    assert np.abs(vals - np.eye(b.node_count)).max() <= 1e-10
    pts = [rng.dirichlet((1, 1, 1, 1))[1:] for _ in range(100)]
    for xi in list(b.nodes) + pts:
        assert abs(b.eval(xi).sum() - 1.0) <= 1e-10


def test_degree2_edge_midpoint_indicator():
    b = make_basis(2)
    k = next(
        i for i, n in enumerate(b.nodes) if np.allclose(n, [0.5, 0.5, 0.0])
    )
    vals = b.eval(b.nodes[k])
    expect = np.zeros(b.node_count)
    expect[k] = 1.0
    assert np.allclose(vals, expect, atol=1e-12)


def test_degree1_gradients_constant(rng):
    b = make_basis(1)
    expect = np.array([[-1, -1, -1], [0, 0, 1], [0, 1, 0], [1, 0, 0]], float)
    for _ in range(5):
        assert np.allclose(b.eval_grad(rng.random(3)), expect, atol=1e-14)


def test_gradients_sum_to_zero():
    b = make_basis(3)
    g = b.eval_grad(np.array([0.2, 0.2, 0.2]))
    assert np.allclose(g.sum(axis=0), 0.0, atol=1e-12)


@pytest.mark.parametrize("degree", range(1, 7))
def test_grad_matches_finite_difference(degree, rng):
    b = make_basis(degree)
    h = 1e-6
    for _ in range(5):
        xi = rng.dirichlet((1, 1, 1, 1))[1:]
        g = b.eval_grad(xi)
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            fd = (b.eval(xi + e) - b.eval(xi - e)) / (2 * h)
            np.testing.assert_allclose(fd, g[:, k], rtol=1e-6, atol=1e-6)


def test_hessian_degree1_zero(rng):
    b = make_basis(1)
    assert np.allclose(b.eval_hess(rng.random(3)), 0.0, atol=1e-14)


def test_hessians_sum_to_zero():
    b = make_basis(4)
    h = b.eval_hess(np.array([0.1, 0.3, 0.2]))
    assert np.allclose(h.sum(axis=0), 0.0, atol=1e-10)


@pytest.mark.parametrize("degree", [2, 4, 6])
def test_hess_matches_finite_difference_of_grad(degree, rng):
    b = make_basis(degree)
    h = 1e-6
    for _ in range(3):
        xi = rng.dirichlet((1, 1, 1, 1))[1:]
        hess = b.eval_hess(xi)
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            fd = (b.eval_grad(xi + e) - b.eval_grad(xi - e)) / (2 * h)
            np.testing.assert_allclose(fd, hess[:, :, k], rtol=1e-6, atol=1e-6)


def test_hessian_symmetry(rng):
    b = make_basis(5)
    h = b.eval_hess(rng.random(3) / 3)
    assert np.array_equal(h, np.swapaxes(h, 1, 2))


def test_basis_cache_shared():
    assert make_basis(3) is make_basis(3)
