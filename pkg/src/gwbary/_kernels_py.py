"""Pure-Python reference kernels.

Same algorithms, same floating point operation order as ``_ckernels.pyx``, so
both backends return bit-identical results.
"""
import numpy as np

OPTIMAL = 0
ITERATION_LIMIT = 1


def _northwest_corner(supply, demand):
    m, n = len(supply), len(demand)
    flow = np.zeros((m, n))
    basic = np.zeros((m, n), dtype=bool)
    s = supply.copy()
    d = demand.copy()
    i = j = 0
    while True:
        x = min(s[i], d[j])
        if x < 0.0:
            x = 0.0
        flow[i, j] = x
        basic[i, j] = True
        s[i] -= x
        d[j] -= x
        if i == m - 1 and j == n - 1:
            break
        if i == m - 1:
            j += 1
        elif j == n - 1:
            i += 1
        elif s[i] <= d[j]:
            i += 1
        else:
            j += 1
    return flow, basic


def _adjacency(basic):
    m, n = basic.shape
    rows = [[] for _ in range(m)]
    cols = [[] for _ in range(n)]
    for i in range(m):
        for j in range(n):
            if basic[i, j]:
                rows[i].append(j)
                cols[j].append(i)
    return rows, cols


def _potentials(cost, rows, cols):
    m, n = cost.shape
    u = np.zeros(m)
    v = np.zeros(n)
    seen_r = [False] * m
    seen_c = [False] * n
    seen_r[0] = True
    # queue entries: node id, rows are 0..m-1, columns m..m+n-1
    queue = [0]
    head = 0
    while head < len(queue):
        node = queue[head]
        head += 1
        if node < m:
            for j in rows[node]:
                if not seen_c[j]:
                    seen_c[j] = True
                    v[j] = cost[node, j] - u[node]
                    queue.append(m + j)
        else:
            j = node - m
            for i in cols[j]:
                if not seen_r[i]:
                    seen_r[i] = True
                    u[i] = cost[i, j] - v[j]
                    queue.append(i)
    return u, v


def _tree_path(rows, cols, start_row, end_col, m):
    """Cells on the tree path from row ``start_row`` to column ``end_col``."""
    n = len(cols)
    parent = [-1] * (m + n)
    seen = [False] * (m + n)
    seen[start_row] = True
    queue = [start_row]
    head = 0
    target = m + end_col
    while head < len(queue):
        node = queue[head]
        head += 1
        if node == target:
            break
        if node < m:
            for j in rows[node]:
                if not seen[m + j]:
                    seen[m + j] = True
                    parent[m + j] = node
                    queue.append(m + j)
        else:
            for i in cols[node - m]:
                if not seen[i]:
                    seen[i] = True
                    parent[i] = node
                    queue.append(i)
    cells = []
    node = target
    while node != start_row:
        prev = parent[node]
        if node >= m:
            cells.append((prev, node - m))
        else:
            cells.append((node, prev - m))
        node = prev
    cells.reverse()
    return cells


def transport_simplex(cost, supply, demand, max_iter=100000, tol=1e-11):
    """Balanced transportation simplex with Bland's pivoting rule.

    Returns ``(flow, u, v, iterations, status)`` where ``u``/``v`` are the row
    and column potentials with ``u[0] = 0``.
    """
    cost = np.ascontiguousarray(cost, dtype=float)
    supply = np.ascontiguousarray(supply, dtype=float)
    demand = np.ascontiguousarray(demand, dtype=float)
    m, n = cost.shape
    flow, basic = _northwest_corner(supply, demand)
    scale = 1.0 + (np.abs(cost).max() if cost.size else 0.0)
    threshold = -tol * scale
    it = 0
    status = ITERATION_LIMIT
    while it < max_iter:
        rows, cols = _adjacency(basic)
        u, v = _potentials(cost, rows, cols)
        ei = ej = -1
        for i in range(m):
            for j in range(n):
                if not basic[i, j] and cost[i, j] - u[i] - v[j] < threshold:
                    ei, ej = i, j
                    break
            if ei >= 0:
                break
        if ei < 0:
            status = OPTIMAL
            break
        path = _tree_path(rows, cols, ei, ej, m)
        theta = np.inf
        for k in range(0, len(path), 2):
            pi, pj = path[k]
            if flow[pi, pj] < theta:
                theta = flow[pi, pj]
        leave = -1
        for k in range(0, len(path), 2):
            pi, pj = path[k]
            if flow[pi, pj] == theta:
                idx = pi * n + pj
                if leave < 0 or idx < leave:
                    leave = idx
        for k in range(len(path)):
            pi, pj = path[k]
            if k % 2 == 0:
                flow[pi, pj] -= theta
            else:
                flow[pi, pj] += theta
        flow[ei, ej] = theta
        li, lj = divmod(leave, n)
        flow[li, lj] = 0.0
        basic[li, lj] = False
        basic[ei, ej] = True
        it += 1
    rows, cols = _adjacency(basic)
    u, v = _potentials(cost, rows, cols)
    return flow, u, v, it, status


def lattice_min_cost(weights, row_caps, col_caps):
    """Exhaustive minimum of ``sum(w * t)`` over integer plans ``t >= 0``.

    Row sums of ``t`` are bounded by ``row_caps``. The result is a flat array
    (C order over ``col_caps + 1``) whose entry ``s`` is the minimum over
    plans whose column sums equal ``s`` exactly, ``inf`` if none exists.
    """
    w = np.asarray(weights, dtype=float)
    row_caps = np.asarray(row_caps, dtype=np.int64)
    col_caps = np.asarray(col_caps, dtype=np.int64)
    shape = tuple(int(c) + 1 for c in col_caps)
    value = np.full(shape, np.inf)
    value[(0,) * len(shape)] = 0.0
    ncols = len(shape)
    for i in range(len(row_caps)):
        r_cap = int(row_caps[i])
        z = np.full(shape + (r_cap + 1,), np.inf)
        z[..., 0] = value
        for j in range(ncols):
            wij = w[i, j]
            for k in range(1, shape[j]):
                cur = [slice(None)] * ncols + [slice(1, None)]
                prev = [slice(None)] * ncols + [slice(None, -1)]
                cur[j] = k
                prev[j] = k - 1
                cur, prev = tuple(cur), tuple(prev)
                z[cur] = np.minimum(z[cur], z[prev] + wij)
        value = z.min(axis=-1)
    return value.reshape(-1)
