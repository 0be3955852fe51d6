# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for the rate-fidelity solver and its grid oracle.

Same signatures and results as ``geninfo._fallback``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, log2, INFINITY

cnp.import_array()


def blahut(const double[:, ::1] kernel, const double[::1] source, const double[::1] init,
           double tol, double gap_tol, long max_iter, double floor):
    """Alternating minimization on a fixed exponential kernel.

    kernel[i, j] = 2**(s * payoff[i, j]) (row-shifted). Stops when the L1
    change of the output is below ``tol`` and the duality gap
    log2(max_j c_j) is below ``gap_tol``. Returns
    (output, row_sums, iterations, converged, gap).
    """
    cdef Py_ssize_t n = kernel.shape[0], m = kernel.shape[1]
    cdef Py_ssize_t i, j
    cdef long it = 0
    cdef bint converged = False
    cdef double acc, total, delta, v, cmax
    cdef double gap = INFINITY

    q_arr = np.array(init, dtype=np.float64, copy=True)
    z_arr = np.empty(n, dtype=np.float64)
    c_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] q = q_arr
    cdef double[::1] z = z_arr
    cdef double[::1] c = c_arr

    while it < max_iter:
        it += 1
        for i in range(n):
            acc = 0.0
            for j in range(m):
                acc += q[j] * kernel[i, j]
            z[i] = acc
        for j in range(m):
            c[j] = 0.0
        for i in range(n):
            if source[i] == 0.0:
                continue
            v = source[i] / z[i]
            for j in range(m):
                c[j] += v * kernel[i, j]
        total = 0.0
        cmax = c[0]
        for j in range(m):
            if c[j] > cmax:
                cmax = c[j]
            v = q[j] * c[j]
            if v < floor:
                v = floor
            c[j] = v
            total += v
        delta = 0.0
        for j in range(m):
            v = c[j] / total
            delta += fabs(v - q[j])
            q[j] = v
        gap = log2(cmax)
        if delta < tol and gap < gap_tol:
            converged = True
            break

    for i in range(n):
        acc = 0.0
        for j in range(m):
            acc += q[j] * kernel[i, j]
        z[i] = acc
    return q_arr, z_arr, it, converged, gap


def grid_min_rate(const double[:, ::1] grid, const double[::1] source, const double[:, ::1] payoff,
                  double g_target):
    """Minimum Shannon rate over channels whose rows are all drawn from ``grid``.

    Only channels with generalized information >= g_target count. Returns
    (min_rate, best_gain, max_gain); min_rate is inf when nothing qualifies.
    """
    cdef Py_ssize_t K = grid.shape[0], m = grid.shape[1], n = source.shape[0]
    cdef Py_ssize_t i, j, k, depth
    cdef double v, h, rate, gain

    # per-row, per-grid-point gain and negative conditional entropy
    g_arr = np.zeros((n, K))
    h_arr = np.zeros((n, K))
    cdef double[:, ::1] g = g_arr
    cdef double[:, ::1] hn = h_arr
    for i in range(n):
        for k in range(K):
            gain = 0.0
            h = 0.0
            for j in range(m):
                v = grid[k, j]
                if v > 0.0:
                    gain += v * payoff[i, j]
                    h += v * log2(v)
            g[i, k] = source[i] * gain
            hn[i, k] = source[i] * h

    # best achievable gain from rows depth..n-1
    rest_arr = np.zeros(n + 1)
    cdef double[::1] rest = rest_arr
    for i in range(n - 1, -1, -1):
        v = g[i, 0]
        for k in range(1, K):
            if g[i, k] > v:
                v = g[i, k]
        rest[i] = rest[i + 1] + v
    cdef double max_gain = rest[0]

    idx_arr = np.zeros(n, dtype=np.intp)
    pg_arr = np.zeros(n + 1)
    ph_arr = np.zeros(n + 1)
    pq_arr = np.zeros((n + 1, m))
    cdef Py_ssize_t[::1] idx = idx_arr
    cdef double[::1] pg = pg_arr
    cdef double[::1] ph = ph_arr
    cdef double[:, ::1] pq = pq_arr

    cdef double best = INFINITY
    cdef double best_gain = -INFINITY
    cdef double slack = 1e-12

    depth = 0
    idx[0] = 0
    while depth >= 0:
        if idx[depth] >= K:
            depth -= 1
            if depth >= 0:
                idx[depth] += 1
            continue
        k = idx[depth]
        pg[depth + 1] = pg[depth] + g[depth, k]
        # prune subtrees that cannot reach the target
        if pg[depth + 1] + rest[depth + 1] < g_target - slack:
            idx[depth] += 1
            continue
        ph[depth + 1] = ph[depth] + hn[depth, k]
        for j in range(m):
            pq[depth + 1, j] = pq[depth, j] + source[depth] * grid[k, j]
        if depth == n - 1:
            rate = ph[n]
            for j in range(m):
                v = pq[n, j]
                if v > 0.0:
                    rate -= v * log2(v)
            if rate < best:
                best = rate
                best_gain = pg[n]
            idx[depth] += 1
        else:
            depth += 1
            idx[depth] = 0
    return best, best_gain, max_gain
