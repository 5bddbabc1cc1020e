"""Pure-numpy versions of the pairwise kernels in ``_ckernels.pyx``.

Accumulation order matches the compiled loops so both backends return
bitwise-identical distances (and therefore identical neighbor graphs).
"""
import numpy as np


def sq_dists(A, B):
    """Squared Euclidean distances between the columns of ``A`` and ``B``."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    B = np.ascontiguousarray(B, dtype=np.float64)
    out = np.zeros((A.shape[1], B.shape[1]))
    for i in range(A.shape[0]):
        diff = A[i][:, None] - B[i][None, :]
        out += diff * diff
    return out


def gaussian_gram(A, B, sigma):
    two_s2 = 2.0 * sigma * sigma
    return np.exp(-(sq_dists(A, B) / two_s2))


def knn_adjacency(X, k):
    D = sq_dists(X, X)
    n = D.shape[0]
    W = np.zeros((n, n), dtype=np.uint8)
    for q in range(n):
        row = D[q].copy()
        row[q] = np.inf
        # stable sort: equal distances keep ascending index order
        nbrs = np.argsort(row, kind="stable")[:k]
        W[q, nbrs] = 1
    return W | W.T
