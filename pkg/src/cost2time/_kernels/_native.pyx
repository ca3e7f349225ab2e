# cython: boundscheck=False, wraparound=False, cdivision=True
"""Native implementations of the hot kernels.

Mirrors cost2time._kernels.pure operation-for-operation; see that module for
the algorithm notes. Compiled with FP contraction off so results match the
fallback bit-for-bit.
"""

from libc.math cimport HUGE_VAL, fabs
from libc.stdlib cimport free, malloc

BACKEND_NAME = "native"


def knn_select(double[:, ::1] pool, double[::1] x, Py_ssize_t k):
    """Indices of the k pool rows nearest to x (squared Euclidean).

    Ordered by ascending (distance, insertion index); ties resolve to the
    lower index.
    """
    cdef Py_ssize_t n = pool.shape[0]
    cdef Py_ssize_t d = pool.shape[1]
    cdef double *dist = <double *> malloc(n * sizeof(double))
    if dist == NULL:
        raise MemoryError()
    cdef Py_ssize_t i, j, pick, best
    cdef double diff, best_dist
    try:
        for i in range(n):
            dist[i] = 0.0
        for j in range(d):
            for i in range(n):
                diff = pool[i, j] - x[j]
                dist[i] += diff * diff
        out = []
        for pick in range(k):
            best = -1
            best_dist = HUGE_VAL
            for i in range(n):
                if dist[i] < best_dist:
                    best_dist = dist[i]
                    best = i
            out.append(best)
            dist[best] = HUGE_VAL
    finally:
        free(dist)
    return out


cdef inline double _phi(double t, double eta, double slope, double eps,
                        double bi, double bj) nogil:
    return 0.5 * eta * t * t + slope * t + eps * fabs(bi + t) + eps * fabs(bj - t)


cdef inline double _clip(double t, double lo, double hi) nogil:
    if t < lo:
        return lo
    if t > hi:
        return hi
    return t


def smo_solve(double[:, ::1] K, double[::1] y, double C, double eps,
              double tol, long long max_updates):
    """Solve the epsilon-insensitive SVR dual by pairwise coordinate descent.

    Returns (duals, bias, updates_used, converged).
    """
    import numpy as np

    cdef Py_ssize_t n = y.shape[0]
    beta_arr = np.zeros(n)
    g_arr = -np.asarray(y, dtype=np.float64)
    cdef double[::1] beta = beta_arr
    cdef double[::1] g = g_arr

    cdef long long updates = 0
    cdef bint converged = False
    cdef Py_ssize_t i, j, l, c
    cdef double max_l, min_u, F, bound
    cdef double bi, bj, eta, slope, t_lo, t_hi, t0, shift, t
    cdef double base, best_t, best_phi, value, new_i, new_j
    cdef double cand[7]
    cdef int n_cand

    max_l = -HUGE_VAL
    min_u = HUGE_VAL
    while True:
        max_l = -HUGE_VAL
        min_u = HUGE_VAL
        i = -1
        j = -1
        for l in range(n):
            F = -g[l]
            if beta[l] < C:
                bound = F - eps if beta[l] >= 0.0 else F + eps
                if bound > max_l:
                    max_l = bound
                    i = l
            if beta[l] > -C:
                bound = F - eps if beta[l] > 0.0 else F + eps
                if bound < min_u:
                    min_u = bound
                    j = l
        if max_l - min_u < tol:
            converged = True
            break
        if updates >= max_updates:
            break

        bi = beta[i]
        bj = beta[j]
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        slope = g[i] - g[j]
        t_lo = -C - bi
        if bj - C > t_lo:
            t_lo = bj - C
        t_hi = C - bi
        if bj + C < t_hi:
            t_hi = bj + C

        cand[0] = t_lo
        cand[1] = t_hi
        cand[2] = _clip(-bi, t_lo, t_hi)
        cand[3] = _clip(bj, t_lo, t_hi)
        n_cand = 4
        if eta > 0.0:
            t0 = -slope / eta
            shift = 2.0 * eps / eta
            cand[4] = _clip(t0, t_lo, t_hi)
            cand[5] = _clip(t0 - shift, t_lo, t_hi)
            cand[6] = _clip(t0 + shift, t_lo, t_hi)
            n_cand = 7

        base = _phi(0.0, eta, slope, eps, bi, bj)
        best_t = 0.0
        best_phi = base
        for c in range(n_cand):
            t = cand[c]
            value = _phi(t, eta, slope, eps, bi, bj)
            if value < best_phi:
                best_phi = value
                best_t = t
        if best_t == 0.0:
            break  # numerically stalled despite a KKT violation

        new_i = bi + best_t
        if new_i > C:
            new_i = C
        elif new_i < -C:
            new_i = -C
        new_j = bj - best_t
        if new_j > C:
            new_j = C
        elif new_j < -C:
            new_j = -C
        beta[i] = new_i
        beta[j] = new_j
        for l in range(n):
            g[l] += best_t * (K[i, l] - K[j, l])
        updates += 1

    cdef double bias = (max_l + min_u) / 2.0
    if bias == -HUGE_VAL or bias == HUGE_VAL or bias != bias:
        bias = 0.0
    return beta_arr, bias, int(updates), bool(converged)
