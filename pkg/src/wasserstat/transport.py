"""Exact optimal transport on finite spaces with dual certificates."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dense_lp, kernels
from .errors import SolverError
from .ground import CostMatrix, Measure, check_same_support

BALANCE_TOL = 1e-9


@dataclass(frozen=True)
class TransportSolution:
    """Optimal plan and dual potentials for one transport instance.

    value_pp is the optimal total cost sum(C * plan). The duals satisfy
    u[x] + v[y] <= C[x, y] everywhere with equality on the support of the
    plan, so <u, r> + <v, s> reproduces value_pp up to rounding.
    """

    value_pp: float
    plan: np.ndarray
    dual_u: np.ndarray
    dual_v: np.ndarray

    @property
    def n_source(self) -> int:
        return self.plan.shape[0]

    @property
    def n_sink(self) -> int:
        return self.plan.shape[1]


def _budgets(ns: int, nd: int) -> tuple[int, int]:
    dantzig = 60 * (ns + nd) + 200
    max_iter = dantzig + 600 * (ns + nd) + 4000
    return dantzig, max_iter


def _pivot_tol(C: np.ndarray) -> float:
    scale = float(C.max()) if C.size else 1.0
    return 1e-11 * (1.0 + scale)


def _balanced(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.array(b, dtype=np.float64)
    gap = a.sum() - b.sum()
    if abs(gap) > BALANCE_TOL:
        raise ValueError(f"marginals differ in total mass by {gap!r}")
    b[int(np.argmax(b))] += gap
    return a, b


def _recompute_tree_flows(
    basis: np.ndarray, a: np.ndarray, b: np.ndarray
) -> np.ndarray | None:
    """Solve the marginal equations restricted to the basis cells."""
    ns, nd = basis.shape
    cells = np.argwhere(basis > 0)
    A = np.zeros((ns + nd, len(cells)))
    for k, (x, y) in enumerate(cells):
        A[x, k] = 1.0
        A[ns + y, k] = 1.0
    rhs = np.concatenate([a, b])
    flows, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    if np.any(flows < -1e-7):
        return None
    X = np.zeros((ns, nd))
    for k, (x, y) in enumerate(cells):
        X[x, y] = max(flows[k], 0.0)
    return X


def solve_transport(C: np.ndarray, a: np.ndarray, b: np.ndarray) -> TransportSolution:
    """Solve min sum(C * X) subject to the marginals (a, b), X >= 0.

    Raw-array entry point; zero-mass rows and columns are kept in the
    problem so the plan shape always matches C.
    """
    C = np.ascontiguousarray(C, dtype=np.float64)
    a, b = _balanced(a, b)
    tol = _pivot_tol(C)
    dantzig, max_iter = _budgets(*C.shape)
    X, u, v, basis, status = kernels.transport_kernel(C, a, b, tol, dantzig, max_iter)
    if status == kernels.STATUS_BUDGET:
        # degeneracy stall: restart from perturbed marginals, then rebuild
        # the flows of the final basis for the original data
        eps = 1e-10
        ap = a + eps * (1.0 + np.arange(len(a)))
        bp = b * (ap.sum() / b.sum()) if b.sum() > 0 else b
        ap, bp = _balanced(ap, bp)
        X, u, v, basis, status = kernels.transport_kernel(
            C, ap, bp, tol, dantzig, max_iter
        )
        if status == kernels.STATUS_OK:
            rebuilt = _recompute_tree_flows(basis, a, b)
            if rebuilt is None:
                raise SolverError("perturbation restart produced an infeasible basis")
            X = rebuilt
    if status != kernels.STATUS_OK:
        raise SolverError(f"transportation simplex failed with status {status}")
    value = float(np.sum(C * X))
    return TransportSolution(value_pp=value, plan=X, dual_u=u, dual_v=v)


def solve_ot(r: Measure, s: Measure, cost: CostMatrix) -> TransportSolution:
    """Optimal transport between two measures under the given cost."""
    check_same_support(r.n, s.n, cost.n)
    return solve_transport(cost.entries, r.mass, s.mass)


def transport_value(r: np.ndarray, s: np.ndarray, entries: np.ndarray) -> float:
    """Optimal cost for raw arrays; fast path without building the plan."""
    a, b = _balanced(r, s)
    C = np.ascontiguousarray(entries, dtype=np.float64)
    tol = _pivot_tol(C)
    dantzig, max_iter = _budgets(*C.shape)
    val, status = kernels.transport_value(C, a, b, tol, dantzig, max_iter)
    if status != kernels.STATUS_OK:
        return solve_transport(C, a, b).value_pp
    return float(val)


def wasserstein(r: Measure, s: Measure, cost: CostMatrix, p: float | None = None) -> float:
    """Order-p transport distance: the p-th root of the optimal cost.

    p defaults to the exponent the cost matrix was built with.
    """
    if p is None:
        p = cost.exponent
    if p < 1.0:
        raise ValueError("order must be >= 1")
    value = solve_ot(r, s, cost).value_pp
    if value <= 0.0:
        return 0.0
    return float(value ** (1.0 / p))


def duality_gap(
    sol: TransportSolution, r: Measure, s: Measure, cost: CostMatrix
) -> float:
    """|primal cost - dual objective| for a solved instance."""
    dual = float(sol.dual_u @ r.mass + sol.dual_v @ s.mass)
    return abs(sol.value_pp - dual)


def directional_derivative(
    r: Measure,
    s: Measure,
    cost: CostMatrix,
    h1: np.ndarray,
    h2: np.ndarray,
) -> float:
    """One-sided derivative of the optimal cost along (h1, h2).

    Equals lim t->0+ of (cost(r + t*h1, s + t*h2) - cost(r, s)) / t. Both
    directions must sum to zero so the perturbed vectors stay on the
    simplex hyperplane; the value is the maximum of <u, h1> + <v, h2> over
    the dual solutions of the unperturbed instance. Directions that remove
    mass from an empty point have no feasible perturbation and raise
    SolverError (the maximum is unbounded).
    """
    check_same_support(r.n, s.n, cost.n)
    h1 = np.ascontiguousarray(h1, dtype=np.float64)
    h2 = np.ascontiguousarray(h2, dtype=np.float64)
    if h1.shape != (r.n,) or h2.shape != (s.n,):
        raise ValueError("directions must match the measure dimension")
    if abs(h1.sum()) > BALANCE_TOL or abs(h2.sum()) > BALANCE_TOL:
        raise ValueError("directions must sum to zero")
    wpp = solve_ot(r, s, cost).value_pp
    return dense_lp.max_over_dual_face(
        h1, h2, r.mass, s.mass, cost.entries, wpp
    )
