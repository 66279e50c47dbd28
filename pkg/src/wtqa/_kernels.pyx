# cython: language_level=3
"""Compiled versions of the kernels in ``_fallback``; same contracts."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY
from libc.stdlib cimport malloc, free

cnp.import_array()

DEF FINITE = 0
DEF SENTINEL = 1
DEF EMPTY = 2
DEF FULL = 3
DEF LEVEL_TOL = 1e-12


cdef void _merge_argsort(const double[:] keys, Py_ssize_t* idx, Py_ssize_t* buf,
                         Py_ssize_t n) noexcept nogil:
    # bottom-up stable merge sort of idx by keys
    cdef Py_ssize_t width = 1, lo, mid, hi, i, j, k
    cdef Py_ssize_t* src = idx
    cdef Py_ssize_t* dst = buf
    cdef Py_ssize_t* tmp
    while width < n:
        lo = 0
        while lo < n:
            mid = lo + width
            if mid > n:
                mid = n
            hi = lo + 2 * width
            if hi > n:
                hi = n
            i = lo
            j = mid
            k = lo
            while i < mid and j < hi:
                if keys[src[j]] < keys[src[i]]:
                    dst[k] = src[j]
                    j += 1
                else:
                    dst[k] = src[i]
                    i += 1
                k += 1
            while i < mid:
                dst[k] = src[i]
                i += 1
                k += 1
            while j < hi:
                dst[k] = src[j]
                j += 1
                k += 1
            lo += 2 * width
        tmp = src
        src = dst
        dst = tmp
        width *= 2
    if src != idx:
        for i in range(n):
            idx[i] = src[i]


def weighted_quantile(const double[:] scores, const double[:] weights, double level):
    cdef Py_ssize_t n = scores.shape[0], i
    cdef double cum = 0.0, target = level - LEVEL_TOL
    cdef Py_ssize_t* idx
    cdef Py_ssize_t* buf
    if level <= 0.0:
        return -INFINITY, EMPTY
    if level > 1.0:
        return INFINITY, FULL
    idx = <Py_ssize_t*> malloc(2 * n * sizeof(Py_ssize_t) + 1)
    if idx == NULL:
        raise MemoryError()
    buf = idx + n
    try:
        for i in range(n):
            idx[i] = i
        _merge_argsort(scores, idx, buf, n)
        for i in range(n):
            cum += weights[idx[i]]
            if cum >= target:
                return scores[idx[i]], FINITE
        return INFINITY, SENTINEL
    finally:
        free(idx)


def weighted_quantile_batch(const double[:] scores, const double[:, :] weights,
                            const double[:] levels):
    cdef Py_ssize_t n = scores.shape[0], m = weights.shape[0], i, r
    cdef double cum, target
    cdef cnp.ndarray[cnp.float64_t, ndim=1] values = np.empty(m)
    cdef cnp.ndarray[cnp.int8_t, ndim=1] codes = np.empty(m, dtype=np.int8)
    cdef double[:] vv = values
    cdef cnp.int8_t[:] cv = codes
    cdef Py_ssize_t* idx = <Py_ssize_t*> malloc(2 * n * sizeof(Py_ssize_t) + 1)
    if idx == NULL:
        raise MemoryError()
    cdef Py_ssize_t* buf = idx + n
    try:
        with nogil:
            for i in range(n):
                idx[i] = i
            _merge_argsort(scores, idx, buf, n)
            for r in range(m):
                if levels[r] <= 0.0:
                    vv[r] = -INFINITY
                    cv[r] = EMPTY
                    continue
                if levels[r] > 1.0:
                    vv[r] = INFINITY
                    cv[r] = FULL
                    continue
                target = levels[r] - LEVEL_TOL
                cum = 0.0
                vv[r] = INFINITY
                cv[r] = SENTINEL
                for i in range(n):
                    cum += weights[r, idx[i]]
                    if cum >= target:
                        vv[r] = scores[idx[i]]
                        cv[r] = FINITE
                        break
    finally:
        free(idx)
    return values, codes


cdef double _objective(const double[:, :] X, const double[:] y, const double[:] w,
                       double[:] u, double tau, double l2) noexcept nogil:
    cdef Py_ssize_t n = X.shape[0], p = X.shape[1], i, j
    cdef double s, loss = 0.0, pen = 0.0
    for i in range(n):
        s = y[i]
        for j in range(p):
            s -= X[i, j] * w[j]
        u[i] = s
        if s > 0:
            loss += tau * s
        else:
            loss += (tau - 1.0) * s
    for j in range(1, p):
        pen += w[j] * w[j]
    return loss / n + 0.5 * l2 * pen


def pinball_descent(const double[:, :] X, const double[:] y, double tau, int iters,
                    double step, double l2, w0):
    cdef Py_ssize_t n = X.shape[0], p = X.shape[1], i, j
    cdef int it
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w_arr = np.array(w0, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] best_arr = w_arr.copy()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] u_arr = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g_arr = np.empty(p)
    cdef double[:] w = w_arr
    cdef double[:] best = best_arr
    cdef double[:] u = u_arr
    cdef double[:] grad = g_arr
    cdef double loss, init_loss, best_loss, gi
    with nogil:
        loss = _objective(X, y, w, u, tau, l2)
        init_loss = loss
        best_loss = loss
        for it in range(iters):
            for j in range(p):
                grad[j] = 0.0
            for i in range(n):
                gi = tau if u[i] > 0 else tau - 1.0
                for j in range(p):
                    grad[j] -= gi * X[i, j]
            for j in range(p):
                grad[j] /= n
                if j > 0:
                    grad[j] += l2 * w[j]
                w[j] -= step * grad[j]
            loss = _objective(X, y, w, u, tau, l2)
            if loss < best_loss:
                best_loss = loss
                for j in range(p):
                    best[j] = w[j]
    return best_arr, init_loss, best_loss
