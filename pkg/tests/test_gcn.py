from pytest import raises, approx, mark
from hypothesis import given, settings
from hypothesis.strategies import integers
from unittest.mock import patch
from .strategies import seed, random_layout


import numpy as np
from offloadsim.core.errors import ShapeMismatch
from offloadsim.core.gcn import normalized_adjacency, gcn_forward


def looped_forward(A, X, W0, W1):
    """The same propagation written one vertex at a time."""

    n = len(A)
    degree = [1 + sum(A[i]) for i in range(n)]

    def propagate(H):
        out = np.zeros_like(H)
        for i in range(n):
            for j in range(n):
                if i == j or A[i][j]:
                    out[i] += H[j] / np.sqrt(degree[i] * degree[j])
        return out

    hidden = propagate(X) @ W0
    hidden = np.where(hidden > 0, hidden, 0.)

    return propagate(hidden) @ W1


class TestNormalizedAdjacency(object):

    def test_empty_graph(self):
        assert np.array_equal(normalized_adjacency(np.zeros((3, 3))), np.eye(3))

    def test_pair(self):

        A_hat = normalized_adjacency([[0, 1], [1, 0]])
        assert np.allclose(A_hat, 0.5)

    def test_not_square(self):

        with raises(ShapeMismatch):
            normalized_adjacency(np.zeros((2, 3)))

    def test_not_symmetric(self):

        with raises(ShapeMismatch):
            normalized_adjacency([[0, 1], [0, 0]])

    @mark.parametrize("A", [[[0, -1], [-1, 0]], [[0, 2], [2, 0]], [[0, .5], [.5, 0]]])
    def test_not_binary(self, A):

        with raises(ShapeMismatch):
            normalized_adjacency(A)

    @patch('offloadsim.core.gcn.raiseError')
    def test_not_binary_code(self, Err):

        normalized_adjacency([[0, 3], [3, 0]])
        Err.assert_called_once_with("CM04.1", detail="adjacency entries must be 0 or 1")


class TestGcnForward(object):

    @settings(max_examples=50, deadline=None)
    @given(n=integers(min_value=1, max_value=15), s=seed)
    def test_looped(self, n, s):

        rng = np.random.default_rng(s)
        A = random_layout(rng, n, rng.random()).adjacency_matrix()
        X = rng.normal(size=(n, 4))
        W0 = rng.normal(size=(4, 6))
        W1 = rng.normal(size=(6, 3))

        assert np.allclose(gcn_forward(A, X, W0, W1), looped_forward(A, X, W0, W1))

    def test_no_edges(self):

        rng = np.random.default_rng(0)
        X, W0, W1 = rng.normal(size=(5, 2)), rng.normal(size=(2, 4)), rng.normal(size=(4, 2))

        expected = np.maximum(X @ W0, 0.) @ W1
        assert np.allclose(gcn_forward(np.zeros((5, 5)), X, W0, W1), expected)

    def test_single_vertex(self):

        out = gcn_forward([[0]], [[2.]], [[1., -1.]], [[1.], [1.]])

        assert out.shape == (1, 1)
        assert out[0, 0] == approx(2.)

    def test_feature_rows(self):

        with raises(ShapeMismatch):
            gcn_forward(np.zeros((3, 3)), np.ones((2, 2)), np.ones((2, 2)), np.ones((2, 1)))

    def test_weight_shapes(self):

        with raises(ShapeMismatch):
            gcn_forward(np.zeros((2, 2)), np.ones((2, 2)), np.ones((3, 2)), np.ones((2, 1)))

        with raises(ShapeMismatch):
            gcn_forward(np.zeros((2, 2)), np.ones((2, 2)), np.ones((2, 2)), np.ones((3, 1)))
