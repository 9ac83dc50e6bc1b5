"""Small dense linear programs over dual potentials.

A plain two-phase primal simplex with Bland's rule, used for the
polytope-restricted maximizations that certify the transport solver and
feed the derivative computations. Instances here are tiny (tens of
variables), so clarity wins over sparsity tricks.
"""
from __future__ import annotations

import numpy as np

from .errors import SolverError

OPTIMAL = 0
INFEASIBLE = 1
UNBOUNDED = 2
STALLED = 3


def _pivot_loop(T, basis, n_cols, tol, max_iter):
    """Bland-rule pivoting on tableau T restricted to the first n_cols columns."""
    m = len(basis)
    for _ in range(max_iter):
        enter = -1
        for j in range(n_cols):
            if T[m, j] < -tol:
                enter = j
                break
        if enter < 0:
            return OPTIMAL
        # ratio test, ties broken on the smallest basis index
        leave = -1
        best = np.inf
        for i in range(m):
            aij = T[i, enter]
            if aij > tol:
                ratio = T[i, -1] / aij
                if ratio < best - 1e-12 or (
                    ratio <= best + 1e-12 and (leave < 0 or basis[i] < basis[leave])
                ):
                    if ratio < best:
                        best = ratio
                    leave = i
        if leave < 0:
            return UNBOUNDED
        _pivot(T, basis, leave, enter)
    return STALLED


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    piv = T[row].copy()
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, piv)
    T[:, col] = 0.0
    T[row] = piv
    T[row, col] = 1.0
    basis[row] = col


def simplex_min(c, A, b, tol=1e-10, max_iter=None):
    """min c @ x subject to A @ x == b, x >= 0.

    Returns (status, x, value). status OPTIMAL means x is a basic optimal
    solution; INFEASIBLE and UNBOUNDED report the usual LP outcomes.
    """
    A = np.array(A, dtype=np.float64)
    b = np.array(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    m, n = A.shape
    if max_iter is None:
        max_iter = 4000 + 60 * (m + n)
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # phase 1: artificial basis, minimize total artificial mass
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = list(range(n, n + m))
    status = _pivot_loop(T, basis, n + m, tol, max_iter)
    if status != OPTIMAL:
        return status, None, np.nan
    if -T[m, -1] > 1e-7 * (1.0 + float(np.abs(b).max(initial=0.0))):
        return INFEASIBLE, None, np.nan
    # drive leftover artificials out of the basis where possible; rows that
    # cannot pivot are redundant and stay pinned at zero
    for i in range(m):
        if basis[i] >= n:
            for j in range(n):
                if abs(T[i, j]) > tol:
                    _pivot(T, basis, i, j)
                    break

    # phase 2: original costs over the phase-1 basis
    T[m, :] = 0.0
    for j in range(n):
        T[m, j] = c[j]
    for i in range(m):
        if basis[i] < n:
            T[m] -= c[basis[i]] * T[i]
    # artificial columns are never scanned again, so they cannot re-enter
    status = _pivot_loop(T, basis, n, tol, max_iter)
    if status != OPTIMAL:
        return status, None, np.nan
    x = np.zeros(n)
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T[i, -1]
    return OPTIMAL, x, float(c @ x)


def max_over_dual_polytope(g: np.ndarray, C: np.ndarray) -> float:
    """max <g, u> over potentials with u[x] - u[y] <= C[x, y] for all pairs.

    g must sum to zero (otherwise the shift direction is unbounded); the
    first potential is pinned to zero to remove that shift.
    """
    g = np.asarray(g, dtype=np.float64)
    n = g.shape[0]
    if n == 1:
        return 0.0
    nf = n - 1  # u[0] pinned at 0
    rows = []
    rhs = []
    for x in range(n):
        for y in range(n):
            if x == y:
                continue
            row = np.zeros(nf)
            if x > 0:
                row[x - 1] += 1.0
            if y > 0:
                row[y - 1] -= 1.0
            rows.append(row)
            rhs.append(C[x, y])
    A_ub = np.array(rows)
    b_ub = np.array(rhs)
    m = A_ub.shape[0]
    # split the free potentials and append slacks
    A = np.hstack([A_ub, -A_ub, np.eye(m)])
    obj = np.concatenate([-g[1:], g[1:], np.zeros(m)])
    status, x, value = simplex_min(obj, A, b_ub)
    if status != OPTIMAL:
        raise SolverError(f"dual polytope LP failed with status {status}")
    return -value


def max_over_dual_face(
    a_vec: np.ndarray,
    b_vec: np.ndarray,
    r: np.ndarray,
    s: np.ndarray,
    C: np.ndarray,
    wpp: float,
) -> float:
    """max <a_vec, u> + <b_vec, v> over the optimal dual face.

    The face consists of potential pairs with u[x] + v[y] <= C[x, y] whose
    dual objective <u, r> + <v, s> attains the optimal cost wpp. Raises
    SolverError when the face is empty (inconsistent wpp) or the maximum is
    unbounded, which happens for directions that take mass away from points
    carrying none.
    """
    n = C.shape[0]
    a_vec = np.asarray(a_vec, dtype=np.float64)
    b_vec = np.asarray(b_vec, dtype=np.float64)
    nf = 2 * n - 1  # u[1:], v with u[0] pinned at 0
    m_ub = n * n
    A_ub = np.zeros((m_ub, nf))
    b_ub = np.zeros(m_ub)
    k = 0
    for x in range(n):
        for y in range(n):
            if x > 0:
                A_ub[k, x - 1] = 1.0
            A_ub[k, n - 1 + y] = 1.0
            b_ub[k] = C[x, y]
            k += 1
    eq = np.concatenate([r[1:], s])
    obj_free = np.concatenate([a_vec[1:], b_vec])

    A = np.zeros((m_ub + 1, 2 * nf + m_ub))
    A[:m_ub, :nf] = A_ub
    A[:m_ub, nf : 2 * nf] = -A_ub
    A[:m_ub, 2 * nf :] = np.eye(m_ub)
    A[m_ub, :nf] = eq
    A[m_ub, nf : 2 * nf] = -eq
    b = np.concatenate([b_ub, [wpp]])
    obj = np.concatenate([-obj_free, obj_free, np.zeros(m_ub)])
    status, x, value = simplex_min(obj, A, b)
    if status == UNBOUNDED:
        raise SolverError(
            "dual face maximization is unbounded; the direction leaves the simplex"
        )
    if status != OPTIMAL:
        raise SolverError(f"dual face LP failed with status {status}")
    return -value
