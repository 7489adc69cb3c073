import numpy as np

from .errors import raiseError


def normalized_adjacency(A):
    """
    The symmetric propagation matrix
    :math:`\\hat{A} = \\tilde{D}^{-1/2}(A + I)\\tilde{D}^{-1/2}`.

    Parameters
    ----------
    A: numpy.ndarray
        Square, symmetric 0/1 adjacency matrix without self-loops

    Returns
    -------
    A_hat: numpy.ndarray
    """

    A = np.asarray(A, dtype=float)

    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raiseError("CM04.1", detail="adjacency of shape {} is not square".format(A.shape))

    if not np.array_equal(A, A.T):
        raiseError("CM04.1", detail="adjacency is not symmetric")

    if not np.isin(A, (0., 1.)).all():
        raiseError("CM04.1", detail="adjacency entries must be 0 or 1")

    A_tilde = A + np.eye(A.shape[0])
    d = 1. / np.sqrt(A_tilde.sum(axis=1))

    return A_tilde * d[:, None] * d[None, :]


def gcn_forward(A, X, W0, W1):
    """
    Two layer graph convolution :math:`\\hat{A}\\,\\mathrm{ReLU}(\\hat{A} X W_0) W_1`
    with an identity output activation.

    Parameters
    ----------
    A: numpy.ndarray
        Adjacency matrix of shape :code:`(n, n)`
    X: numpy.ndarray
        Features of shape :code:`(n, f)`
    W0: numpy.ndarray
        Weights of shape :code:`(f, h)`
    W1: numpy.ndarray
        Weights of shape :code:`(h, c)`

    Returns
    -------
    out: numpy.ndarray
        Array of shape :code:`(n, c)`
    """

    A_hat = normalized_adjacency(A)
    X, W0, W1 = (np.atleast_2d(np.asarray(M, dtype=float)) for M in (X, W0, W1))

    n = A_hat.shape[0]
    if X.shape[0] != n:
        raiseError("CM04.1", detail="{} feature rows for {} vertices".format(X.shape[0], n))

    if X.shape[1] != W0.shape[0]:
        raiseError("CM04.1", detail="features of width {} against W0 of shape {}".format(X.shape[1], W0.shape))

    if W0.shape[1] != W1.shape[0]:
        raiseError("CM04.1", detail="W0 of shape {} against W1 of shape {}".format(W0.shape, W1.shape))

    hidden = np.maximum(A_hat @ X @ W0, 0.)
    return A_hat @ hidden @ W1
