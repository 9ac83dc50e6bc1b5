"""Compiled inner loops for the transport solver and limit samplers.

Everything here operates on plain float64 arrays so the hot paths (millions
of small transport solves during Monte Carlo sampling) stay off the Python
interpreter. The Python-facing wrappers in transport.py and limits.py do all
validation and error mapping.
"""
from __future__ import annotations

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_BUDGET = 1
STATUS_INTERNAL = 2


@njit(cache=True, nogil=True)
def transport_kernel(C, a, b, tol, dantzig_budget, max_iter):
    """Transportation simplex on a dense bipartite instance.

    Minimizes sum(C * X) over plans X >= 0 with row sums a and column sums
    b (assumed balanced by the caller). Starts from the northwest-corner
    basis; pivots on the most negative reduced cost, switching to Bland's
    smallest-index rule once dantzig_budget pivots are spent so degenerate
    instances cannot cycle.

    Returns (X, u, v, basis_mask, status) where u, v are dual potentials
    with u[x] + v[y] == C[x, y] on basic cells and status is one of the
    STATUS_* codes.
    """
    ns, nd = C.shape
    X = np.zeros((ns, nd), dtype=np.float64)
    basis = np.zeros((ns, nd), dtype=np.uint8)
    u = np.zeros(ns, dtype=np.float64)
    v = np.zeros(nd, dtype=np.float64)

    # northwest-corner start: advances one index per step, leaving exactly
    # ns + nd - 1 basic cells including degenerate zeros
    ra = a.copy()
    rb = b.copy()
    i = 0
    j = 0
    while True:
        t = ra[i] if ra[i] < rb[j] else rb[j]
        if t < 0.0:
            t = 0.0
        X[i, j] = t
        basis[i, j] = 1
        ra[i] -= t
        rb[j] -= t
        if i == ns - 1 and j == nd - 1:
            break
        if i == ns - 1:
            j += 1
        elif j == nd - 1:
            i += 1
        elif ra[i] <= rb[j]:
            i += 1
        else:
            j += 1

    n_nodes = ns + nd
    row_deg = np.zeros(ns, dtype=np.int64)
    col_deg = np.zeros(nd, dtype=np.int64)
    row_adj = np.zeros((ns, nd), dtype=np.int64)
    col_adj = np.zeros((nd, ns), dtype=np.int64)
    seen_u = np.zeros(ns, dtype=np.uint8)
    seen_v = np.zeros(nd, dtype=np.uint8)
    stack = np.zeros(n_nodes, dtype=np.int64)
    parent = np.zeros(n_nodes, dtype=np.int64)
    path = np.zeros(n_nodes + 1, dtype=np.int64)

    status = STATUS_BUDGET
    it = 0
    while it < max_iter:
        it += 1

        # adjacency of the current basis tree
        for x in range(ns):
            row_deg[x] = 0
        for y in range(nd):
            col_deg[y] = 0
        for x in range(ns):
            for y in range(nd):
                if basis[x, y]:
                    row_adj[x, row_deg[x]] = y
                    row_deg[x] += 1
                    col_adj[y, col_deg[y]] = x
                    col_deg[y] += 1

        # dual potentials by traversal from row 0 (u[0] pinned to 0)
        for x in range(ns):
            seen_u[x] = 0
        for y in range(nd):
            seen_v[y] = 0
        u[0] = 0.0
        seen_u[0] = 1
        top = 0
        stack[top] = 0
        top = 1
        visited = 1
        while top > 0:
            top -= 1
            node = stack[top]
            if node < ns:
                x = node
                for t_ in range(row_deg[x]):
                    y = row_adj[x, t_]
                    if not seen_v[y]:
                        v[y] = C[x, y] - u[x]
                        seen_v[y] = 1
                        visited += 1
                        stack[top] = ns + y
                        top += 1
            else:
                y = node - ns
                for t_ in range(col_deg[y]):
                    x = col_adj[y, t_]
                    if not seen_u[x]:
                        u[x] = C[x, y] - v[y]
                        seen_u[x] = 1
                        visited += 1
                        stack[top] = x
                        top += 1
        if visited != n_nodes:
            return X, u, v, basis, STATUS_INTERNAL

        # entering arc
        ei = -1
        ej = -1
        if it <= dantzig_budget:
            best = -tol
            for x in range(ns):
                for y in range(nd):
                    if not basis[x, y]:
                        rc = C[x, y] - u[x] - v[y]
                        if rc < best:
                            best = rc
                            ei = x
                            ej = y
        else:
            found = False
            for x in range(ns):
                if found:
                    break
                for y in range(nd):
                    if not basis[x, y]:
                        rc = C[x, y] - u[x] - v[y]
                        if rc < -tol:
                            ei = x
                            ej = y
                            found = True
                            break
        if ei < 0:
            status = STATUS_OK
            break

        # unique tree path from row ei to column ej
        for k in range(n_nodes):
            parent[k] = -2
        parent[ei] = -1
        top = 0
        stack[top] = ei
        top = 1
        target = ns + ej
        while top > 0:
            top -= 1
            node = stack[top]
            if node == target:
                break
            if node < ns:
                x = node
                for t_ in range(row_deg[x]):
                    y = row_adj[x, t_]
                    if parent[ns + y] == -2:
                        parent[ns + y] = node
                        stack[top] = ns + y
                        top += 1
            else:
                y = node - ns
                for t_ in range(col_deg[y]):
                    x = col_adj[y, t_]
                    if parent[x] == -2:
                        parent[x] = node
                        stack[top] = x
                        top += 1
        if parent[target] == -2:
            return X, u, v, basis, STATUS_INTERNAL

        # path nodes from the entering column back to the entering row
        plen = 0
        node = target
        while node != -1:
            path[plen] = node
            plen += 1
            node = parent[node]

        # cells along the path alternate -, +, -, ... after the entering arc
        theta = np.inf
        leave_flat = -1
        for t_ in range(plen - 1):
            n1 = path[t_]
            n2 = path[t_ + 1]
            if n1 < ns:
                cx = n1
                cy = n2 - ns
            else:
                cx = n2
                cy = n1 - ns
            if t_ % 2 == 0:
                f = X[cx, cy]
                flat = cx * nd + cy
                if f < theta:
                    theta = f
                    leave_flat = flat
                elif f == theta and flat < leave_flat:
                    leave_flat = flat
        if leave_flat < 0:
            return X, u, v, basis, STATUS_INTERNAL

        for t_ in range(plen - 1):
            n1 = path[t_]
            n2 = path[t_ + 1]
            if n1 < ns:
                cx = n1
                cy = n2 - ns
            else:
                cx = n2
                cy = n1 - ns
            if t_ % 2 == 0:
                X[cx, cy] -= theta
            else:
                X[cx, cy] += theta
        lx = leave_flat // nd
        ly = leave_flat % nd
        X[lx, ly] = 0.0
        basis[lx, ly] = 0
        X[ei, ej] = theta
        basis[ei, ej] = 1

    return X, u, v, basis, status


@njit(cache=True, nogil=True)
def transport_value(C, a, b, tol, dantzig_budget, max_iter):
    """Optimal transport cost only; see transport_kernel."""
    X, u, v, basis, status = transport_kernel(C, a, b, tol, dantzig_budget, max_iter)
    ns, nd = C.shape
    val = 0.0
    for x in range(ns):
        for y in range(nd):
            if X[x, y] != 0.0:
                val += C[x, y] * X[x, y]
    return val, status


@njit(cache=True, nogil=True)
def balanced_dual_max(g, C_closed, tol, dantzig_budget, max_iter):
    """max <g, u> over potentials with u[x] - u[y] <= C_closed[x, y].

    Requires sum(g) == 0 and a shortest-path-closed cost matrix; under
    closure the maximum equals the optimal transport cost between the
    positive and negative parts of g.
    """
    n = g.shape[0]
    ns = 0
    nd = 0
    for x in range(n):
        if g[x] > 0.0:
            ns += 1
        elif g[x] < 0.0:
            nd += 1
    if ns == 0 or nd == 0:
        return 0.0, STATUS_OK
    src = np.empty(ns, dtype=np.int64)
    dst = np.empty(nd, dtype=np.int64)
    a = np.empty(ns, dtype=np.float64)
    b = np.empty(nd, dtype=np.float64)
    i = 0
    j = 0
    for x in range(n):
        if g[x] > 0.0:
            src[i] = x
            a[i] = g[x]
            i += 1
        elif g[x] < 0.0:
            dst[j] = x
            b[j] = -g[x]
            j += 1
    # absorb rounding imbalance on the largest sink
    sa = 0.0
    sb = 0.0
    for i in range(ns):
        sa += a[i]
    jmax = 0
    for j in range(nd):
        sb += b[j]
        if b[j] > b[jmax]:
            jmax = j
    b[jmax] += sa - sb
    if b[jmax] < 0.0:
        b[jmax] = 0.0
    Csub = np.empty((ns, nd), dtype=np.float64)
    for i in range(ns):
        for j in range(nd):
            Csub[i, j] = C_closed[src[i], dst[j]]
    return transport_value(Csub, a, b, tol, dantzig_budget, max_iter)


@njit(cache=True, nogil=True)
def _scaled_probe(C, r, s, ga, gb, wpp, z, tol, dantzig_budget, max_iter):
    """z * (cost between the z-perturbed measures - wpp)."""
    n = r.shape[0]
    a = np.empty(n, dtype=np.float64)
    b = np.empty(n, dtype=np.float64)
    sa = 0.0
    sb = 0.0
    for x in range(n):
        ax = r[x] + ga[x] / z
        if ax < 0.0:
            ax = 0.0
        a[x] = ax
        sa += ax
        bx = s[x] + gb[x] / z
        if bx < 0.0:
            bx = 0.0
        b[x] = bx
        sb += bx
    jmax = 0
    for x in range(n):
        if b[x] > b[jmax]:
            jmax = x
    b[jmax] += sa - sb
    if b[jmax] < 0.0:
        b[jmax] = 0.0
    val, status = transport_value(C, a, b, tol, dantzig_budget, max_iter)
    return z * (val - wpp), status


@njit(cache=True, nogil=True)
def alt_scaling_min(C, r, s, ga, gb, wpp, tol, dantzig_budget, max_iter, z_tol):
    """min over z >= z_min of z * (cost(r + ga/z, s + gb/z) - wpp).

    z_min is the smallest scale keeping both perturbed vectors nonnegative.
    The objective is convex in z and flattens out at its minimum, so the
    bracket is grown by doubling until the objective stops decreasing and
    then shrunk by golden-section search; the best probed value is returned.
    """
    n = r.shape[0]
    z_min = 0.0
    for x in range(n):
        if ga[x] < 0.0:
            zx = -ga[x] / r[x]
            if zx > z_min:
                z_min = zx
        if gb[x] < 0.0:
            zx = -gb[x] / s[x]
            if zx > z_min:
                z_min = zx
    if z_min == 0.0:
        # both perturbations are nonnegative with zero total: identically 0
        return 0.0, STATUS_OK

    lo = z_min + 1e-8
    f_lo, status = _scaled_probe(C, r, s, ga, gb, wpp, lo, tol, dantzig_budget, max_iter)
    if status != STATUS_OK:
        return f_lo, status
    best = f_lo

    span = 1.0 if z_min < 1.0 else z_min
    f_hi, status = _scaled_probe(
        C, r, s, ga, gb, wpp, z_min + span, tol, dantzig_budget, max_iter
    )
    if status != STATUS_OK:
        return best, status
    if f_hi < best:
        best = f_hi
    for _ in range(64):
        f_next, status = _scaled_probe(
            C, r, s, ga, gb, wpp, z_min + 2.0 * span, tol, dantzig_budget, max_iter
        )
        if status != STATUS_OK:
            return best, status
        if f_next < best:
            best = f_next
        span = 2.0 * span
        if f_next >= f_hi - 1e-13 * (1.0 + abs(f_hi)):
            break
        f_hi = f_next
    hi = z_min + span

    invphi = 0.6180339887498949
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, status = _scaled_probe(C, r, s, ga, gb, wpp, c, tol, dantzig_budget, max_iter)
    if status != STATUS_OK:
        return best, status
    fd, status = _scaled_probe(C, r, s, ga, gb, wpp, d, tol, dantzig_budget, max_iter)
    if status != STATUS_OK:
        return best, status
    if fc < best:
        best = fc
    if fd < best:
        best = fd
    guard = 0
    while hi - lo > z_tol and guard < 400:
        guard += 1
        if fc <= fd:
            hi = d
            d = c
            fd = fc
            c = hi - invphi * (hi - lo)
            fc, status = _scaled_probe(
                C, r, s, ga, gb, wpp, c, tol, dantzig_budget, max_iter
            )
            if status != STATUS_OK:
                return best, status
            if fc < best:
                best = fc
        else:
            lo = c
            c = d
            fc = fd
            d = lo + invphi * (hi - lo)
            fd, status = _scaled_probe(
                C, r, s, ga, gb, wpp, d, tol, dantzig_budget, max_iter
            )
            if status != STATUS_OK:
                return best, status
            if fd < best:
                best = fd
    return best, STATUS_OK


def warm_up():
    """Trigger jit compilation of all kernels on trivial inputs."""
    C = np.array([[0.0, 1.0], [1.0, 0.0]])
    a = np.array([0.5, 0.5])
    b = np.array([0.5, 0.5])
    transport_kernel(C, a, b, 1e-11, 100, 1000)
    transport_value(C, a, b, 1e-11, 100, 1000)
    balanced_dual_max(np.array([0.5, -0.5]), C, 1e-11, 100, 1000)
    alt_scaling_min(
        C,
        a,
        b,
        np.array([0.1, -0.1]),
        np.array([-0.1, 0.1]),
        0.0,
        1e-11,
        100,
        1000,
        1e-9,
    )
