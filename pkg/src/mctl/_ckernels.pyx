# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pairwise kernels: squared distances, Gaussian Gram, kNN adjacency.

Inputs follow the package convention of one sample per column.
"""
import numpy as np

from libc.math cimport exp


cdef void _sq_dists(const double[:, ::1] At, const double[:, ::1] Bt,
                    double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t n1 = At.shape[0], n2 = Bt.shape[0], m = At.shape[1]
    cdef Py_ssize_t p, q, i
    cdef double acc, diff
    for p in range(n1):
        for q in range(n2):
            acc = 0.0
            for i in range(m):
                diff = At[p, i] - Bt[q, i]
                acc = acc + diff * diff
            out[p, q] = acc


def sq_dists(A, B):
    At = np.ascontiguousarray(np.asarray(A, dtype=np.float64).T)
    Bt = np.ascontiguousarray(np.asarray(B, dtype=np.float64).T)
    out = np.empty((At.shape[0], Bt.shape[0]))
    _sq_dists(At, Bt, out)
    return out


def gaussian_gram(A, B, double sigma):
    cdef double[:, ::1] D = sq_dists(A, B)
    cdef double two_s2 = 2.0 * sigma * sigma
    cdef Py_ssize_t p, q
    with nogil:
        for p in range(D.shape[0]):
            for q in range(D.shape[1]):
                D[p, q] = exp(-(D[p, q] / two_s2))
    return np.asarray(D)


def knn_adjacency(X, Py_ssize_t k):
    cdef double[:, ::1] D = sq_dists(X, X)
    cdef Py_ssize_t n = D.shape[0]
    W_arr = np.zeros((n, n), dtype=np.uint8)
    cdef unsigned char[:, ::1] W = W_arr
    best_d_arr = np.empty(k)
    best_i_arr = np.empty(k, dtype=np.intp)
    cdef double[::1] best_d = best_d_arr
    cdef Py_ssize_t[::1] best_i = best_i_arr
    cdef Py_ssize_t q, p, cnt, j
    cdef double d
    with nogil:
        for q in range(n):
            cnt = 0
            for p in range(n):
                if p == q:
                    continue
                d = D[q, p]
                # p arrives in ascending order, so an equal distance never displaces
                if cnt == k and d >= best_d[k - 1]:
                    continue
                j = cnt if cnt < k else k - 1
                while j > 0 and best_d[j - 1] > d:
                    best_d[j] = best_d[j - 1]
                    best_i[j] = best_i[j - 1]
                    j -= 1
                best_d[j] = d
                best_i[j] = p
                if cnt < k:
                    cnt += 1
            for j in range(cnt):
                W[q, best_i[j]] = 1
        for q in range(n):
            for p in range(q + 1, n):
                if W[q, p] or W[p, q]:
                    W[q, p] = 1
                    W[p, q] = 1
    return W_arr
