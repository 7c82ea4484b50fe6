# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Mirrors ``_kernels_py`` operation for operation."""
import numpy as np
cimport numpy as cnp

from libc.math cimport INFINITY

cnp.import_array()

cdef enum:
    OPTIMAL = 0
    ITERATION_LIMIT = 1


cdef void _adjacency(unsigned char[:, ::1] basic, Py_ssize_t[::1] rdeg,
                     Py_ssize_t[:, ::1] radj, Py_ssize_t[::1] cdeg,
                     Py_ssize_t[:, ::1] cadj) noexcept nogil:
    cdef Py_ssize_t m = basic.shape[0], n = basic.shape[1], i, j
    for i in range(m):
        rdeg[i] = 0
    for j in range(n):
        cdeg[j] = 0
    for i in range(m):
        for j in range(n):
            if basic[i, j]:
                radj[i, rdeg[i]] = j
                rdeg[i] += 1
                cadj[j, cdeg[j]] = i
                cdeg[j] += 1


cdef void _potentials(double[:, ::1] cost, Py_ssize_t[::1] rdeg, Py_ssize_t[:, ::1] radj,
                      Py_ssize_t[::1] cdeg, Py_ssize_t[:, ::1] cadj,
                      double[::1] u, double[::1] v, unsigned char[::1] seen,
                      Py_ssize_t[::1] queue) noexcept nogil:
    cdef Py_ssize_t m = cost.shape[0], n = cost.shape[1]
    cdef Py_ssize_t head = 0, tail = 0, node, i, j, k
    for k in range(m + n):
        seen[k] = 0
    for i in range(m):
        u[i] = 0.0
    for j in range(n):
        v[j] = 0.0
    seen[0] = 1
    queue[tail] = 0
    tail += 1
    while head < tail:
        node = queue[head]
        head += 1
        if node < m:
            for k in range(rdeg[node]):
                j = radj[node, k]
                if not seen[m + j]:
                    seen[m + j] = 1
                    v[j] = cost[node, j] - u[node]
                    queue[tail] = m + j
                    tail += 1
        else:
            j = node - m
            for k in range(cdeg[j]):
                i = cadj[j, k]
                if not seen[i]:
                    seen[i] = 1
                    u[i] = cost[i, j] - v[j]
                    queue[tail] = i
                    tail += 1


cdef Py_ssize_t _tree_path(Py_ssize_t[::1] rdeg, Py_ssize_t[:, ::1] radj,
                           Py_ssize_t[::1] cdeg, Py_ssize_t[:, ::1] cadj,
                           Py_ssize_t start_row, Py_ssize_t end_col, Py_ssize_t m,
                           Py_ssize_t n, Py_ssize_t[::1] parent, unsigned char[::1] seen,
                           Py_ssize_t[::1] queue, Py_ssize_t[:, ::1] cells) noexcept nogil:
    cdef Py_ssize_t head = 0, tail = 0, node, prev, k, i, j, count = 0, target = m + end_col
    cdef Py_ssize_t a, b, t0, t1
    for k in range(m + n):
        seen[k] = 0
        parent[k] = -1
    seen[start_row] = 1
    queue[tail] = start_row
    tail += 1
    while head < tail:
        node = queue[head]
        head += 1
        if node == target:
            break
        if node < m:
            for k in range(rdeg[node]):
                j = radj[node, k]
                if not seen[m + j]:
                    seen[m + j] = 1
                    parent[m + j] = node
                    queue[tail] = m + j
                    tail += 1
        else:
            for k in range(cdeg[node - m]):
                i = cadj[node - m, k]
                if not seen[i]:
                    seen[i] = 1
                    parent[i] = node
                    queue[tail] = i
                    tail += 1
    node = target
    while node != start_row:
        prev = parent[node]
        if node >= m:
            cells[count, 0] = prev
            cells[count, 1] = node - m
        else:
            cells[count, 0] = node
            cells[count, 1] = prev - m
        count += 1
        node = prev
    a = 0
    b = count - 1
    while a < b:
        t0 = cells[a, 0]
        t1 = cells[a, 1]
        cells[a, 0] = cells[b, 0]
        cells[a, 1] = cells[b, 1]
        cells[b, 0] = t0
        cells[b, 1] = t1
        a += 1
        b -= 1
    return count


def transport_simplex(cost, supply, demand, long max_iter=100000, double tol=1e-11):
    """Balanced transportation simplex with Bland's pivoting rule."""
    cdef double[:, ::1] c = np.ascontiguousarray(cost, dtype=np.float64)
    cdef double[::1] sup = np.array(supply, dtype=np.float64)
    cdef double[::1] dem = np.array(demand, dtype=np.float64)
    cdef Py_ssize_t m = c.shape[0], n = c.shape[1]
    flow_arr = np.zeros((m, n))
    basic_arr = np.zeros((m, n), dtype=np.uint8)
    u_arr = np.zeros(m)
    v_arr = np.zeros(n)
    cdef double[:, ::1] flow = flow_arr
    cdef unsigned char[:, ::1] basic = basic_arr
    cdef double[::1] u = u_arr
    cdef double[::1] v = v_arr
    cdef Py_ssize_t[::1] rdeg = np.zeros(m, dtype=np.intp)
    cdef Py_ssize_t[:, ::1] radj = np.zeros((m, n), dtype=np.intp)
    cdef Py_ssize_t[::1] cdeg = np.zeros(n, dtype=np.intp)
    cdef Py_ssize_t[:, ::1] cadj = np.zeros((n, m), dtype=np.intp)
    cdef unsigned char[::1] seen = np.zeros(m + n, dtype=np.uint8)
    cdef Py_ssize_t[::1] queue = np.zeros(m + n, dtype=np.intp)
    cdef Py_ssize_t[::1] parent = np.zeros(m + n, dtype=np.intp)
    cdef Py_ssize_t[:, ::1] cells = np.zeros((m + n, 2), dtype=np.intp)
    cdef Py_ssize_t i = 0, j = 0, k, ei, ej, li, lj, idx, leave, count
    cdef long it = 0
    cdef int status = ITERATION_LIMIT
    cdef double x, theta, scale = 1.0, threshold, cmax = 0.0

    # northwest corner
    while True:
        x = sup[i] if sup[i] < dem[j] else dem[j]
        if x < 0.0:
            x = 0.0
        flow[i, j] = x
        basic[i, j] = 1
        sup[i] -= x
        dem[j] -= x
        if i == m - 1 and j == n - 1:
            break
        if i == m - 1:
            j += 1
        elif j == n - 1:
            i += 1
        elif sup[i] <= dem[j]:
            i += 1
        else:
            j += 1

    for i in range(m):
        for j in range(n):
            if abs(c[i, j]) > cmax:
                cmax = abs(c[i, j])
    scale = 1.0 + cmax
    threshold = -tol * scale

    with nogil:
        while it < max_iter:
            _adjacency(basic, rdeg, radj, cdeg, cadj)
            _potentials(c, rdeg, radj, cdeg, cadj, u, v, seen, queue)
            ei = -1
            ej = -1
            for i in range(m):
                for j in range(n):
                    if not basic[i, j] and c[i, j] - u[i] - v[j] < threshold:
                        ei = i
                        ej = j
                        break
                if ei >= 0:
                    break
            if ei < 0:
                status = OPTIMAL
                break
            count = _tree_path(rdeg, radj, cdeg, cadj, ei, ej, m, n, parent, seen, queue, cells)
            theta = INFINITY
            for k in range(0, count, 2):
                if flow[cells[k, 0], cells[k, 1]] < theta:
                    theta = flow[cells[k, 0], cells[k, 1]]
            leave = -1
            for k in range(0, count, 2):
                if flow[cells[k, 0], cells[k, 1]] == theta:
                    idx = cells[k, 0] * n + cells[k, 1]
                    if leave < 0 or idx < leave:
                        leave = idx
            for k in range(count):
                if k % 2 == 0:
                    flow[cells[k, 0], cells[k, 1]] -= theta
                else:
                    flow[cells[k, 0], cells[k, 1]] += theta
            flow[ei, ej] = theta
            li = leave // n
            lj = leave % n
            flow[li, lj] = 0.0
            basic[li, lj] = 0
            basic[ei, ej] = 1
            it += 1
        _adjacency(basic, rdeg, radj, cdeg, cadj)
        _potentials(c, rdeg, radj, cdeg, cadj, u, v, seen, queue)
    return flow_arr, u_arr, v_arr, it, status


def lattice_min_cost(weights, row_caps, col_caps):
    """Exhaustive minimum of ``sum(w * t)`` over integer plans, see ``_kernels_py``."""
    cdef double[:, ::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef long long[::1] rc = np.ascontiguousarray(row_caps, dtype=np.int64)
    cdef long long[::1] cc = np.ascontiguousarray(col_caps, dtype=np.int64)
    cdef Py_ssize_t ncols = cc.shape[0], nrows = rc.shape[0]
    cdef Py_ssize_t total = 1, jj
    strides_arr = np.zeros(ncols, dtype=np.intp)
    cdef Py_ssize_t[::1] strides = strides_arr
    for jj in range(ncols - 1, -1, -1):
        strides[jj] = total
        total *= cc[jj] + 1
    value_arr = np.full(total, np.inf)
    cdef double[::1] value = value_arr
    value[0] = 0.0
    cdef Py_ssize_t i, j, s, r, R, st, ext
    cdef double wij, cand, best
    cdef double[:, ::1] z
    for i in range(nrows):
        R = rc[i]
        z_arr = np.full((total, R + 1), np.inf)
        z = z_arr
        with nogil:
            for s in range(total):
                z[s, 0] = value[s]
            for j in range(ncols):
                wij = w[i, j]
                st = strides[j]
                ext = cc[j] + 1
                for s in range(total):
                    if (s // st) % ext == 0:
                        continue
                    for r in range(1, R + 1):
                        cand = z[s - st, r - 1] + wij
                        if cand < z[s, r]:
                            z[s, r] = cand
            for s in range(total):
                best = z[s, 0]
                for r in range(1, R + 1):
                    if z[s, r] < best:
                        best = z[s, r]
                value[s] = best
    return value_arr
