"""Limiting distributions of empirical transport distances on finite spaces.

The empirical transport distance, properly rescaled, converges to the
maximum of a Gaussian vector over a polytope of dual potentials. The
samplers here draw from those limits in four regimes: one or two samples,
with the truth either on the null (equal measures) or at a fixed
alternative.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dense_lp, kernels, parallel
from .errors import SolverError
from .ground import CostMatrix, Measure, check_same_support
from .transport import _budgets, _pivot_tol, transport_value

REGIMES = (
    "one-sample-null",
    "one-sample-alt",
    "two-sample-null",
    "two-sample-alt",
)

BALANCE_TOL = 1e-9


@dataclass(frozen=True)
class GaussianSpec:
    """Centered Gaussian with the covariance of a rescaled count vector.

    For a measure r the covariance is diag(r) - r r^T: the limit of the
    standardized fluctuations of multinomial frequencies around r. Every
    sample sums to zero exactly.
    """

    base: Measure

    def covariance(self) -> np.ndarray:
        r = self.base.mass
        return np.diag(r) - np.outer(r, r)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return _gaussian_vector(rng, self.base.mass, np.sqrt(self.base.mass))


def multinomial_covariance(r: Measure) -> np.ndarray:
    """Covariance matrix diag(r) - r r^T of the multinomial limit."""
    return GaussianSpec(r).covariance()


def _gaussian_vector(rng: np.random.Generator, r: np.ndarray, sqrt_r: np.ndarray) -> np.ndarray:
    z = rng.standard_normal(r.shape[0])
    # exact zero total by construction; variance diag(r) - r r^T
    return sqrt_r * z - r * (z @ sqrt_r)


def sample_multinomial_gaussian(spec: GaussianSpec, rng: np.random.Generator) -> np.ndarray:
    """One draw from the multinomial limit Gaussian of spec.base."""
    return spec.sample(rng)


def _check_balanced(g: np.ndarray, n: int, name: str) -> np.ndarray:
    g = np.ascontiguousarray(g, dtype=np.float64)
    if g.shape != (n,):
        raise ValueError(f"{name} must have length {n}")
    if abs(g.sum()) > BALANCE_TOL:
        raise ValueError(f"{name} must sum to zero")
    return g


def max_dual_null(g: np.ndarray, cost: CostMatrix) -> float:
    """max <g, u> over potentials u with u[x] - u[y] <= cost[x, y].

    Computed as an optimal transport problem between the positive and
    negative parts of g under the shortest-path closure of the cost, which
    has the same potential polytope as the raw cost.
    """
    g = _check_balanced(g, cost.n, "g")
    tol = _pivot_tol(cost.entries)
    dantzig, max_iter = _budgets(cost.n, cost.n)
    val, status = kernels.balanced_dual_max(
        g, cost.closed_entries(), tol, dantzig, max_iter
    )
    if status != kernels.STATUS_OK:
        raise SolverError(f"dual maximization failed with status {status}")
    return float(val)


def max_dual_null_direct(g: np.ndarray, cost: CostMatrix) -> float:
    """Same maximum as max_dual_null via an explicit dense LP.

    Slower route kept as an independent cross-check of the transport
    reduction.
    """
    g = _check_balanced(g, cost.n, "g")
    return dense_lp.max_over_dual_polytope(g, cost.entries)


def max_dual_alt(
    g: np.ndarray,
    h: np.ndarray,
    r: Measure,
    s: Measure,
    cost: CostMatrix,
    lam: float,
) -> float:
    """max of sqrt(lam) <g, u> + sqrt(1 - lam) <h, v> over optimal duals.

    The feasible set is the optimal face of the dual program for (r, s):
    potential pairs attaining the transport cost.
    """
    check_same_support(r.n, s.n, cost.n)
    g = _check_balanced(g, cost.n, "g")
    h = _check_balanced(h, cost.n, "h")
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lam must lie in [0, 1]")
    wpp = transport_value(r.mass, s.mass, cost.entries)
    a_vec = np.sqrt(lam) * g
    b_vec = np.sqrt(1.0 - lam) * h
    return dense_lp.max_over_dual_face(a_vec, b_vec, r.mass, s.mass, cost.entries, wpp)


def alt_limit_value(
    g: np.ndarray,
    h: np.ndarray,
    r: Measure,
    s: Measure,
    cost: CostMatrix,
    lam: float,
    p: float,
) -> float:
    """Alternative-regime limit functional evaluated at (g, h).

    Returns (1/p) * W^(1-p) * max over the optimal dual face of
    sqrt(lam) <g, u> + sqrt(1 - lam) <h, v>, where W is the order-p
    distance between r and s. The face maximum is computed through its
    one-dimensional reformulation: a convex scalar minimization whose
    probes are transport solves between perturbed measures.
    """
    check_same_support(r.n, s.n, cost.n)
    if p < 1.0:
        raise ValueError("order must be >= 1")
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lam must lie in [0, 1]")
    g = _check_balanced(g, cost.n, "g")
    h = _check_balanced(h, cost.n, "h")
    ga = np.sqrt(lam) * g
    gb = np.sqrt(1.0 - lam) * h
    if np.any((r.mass == 0.0) & (ga != 0.0)):
        raise ValueError("g must vanish where r carries no mass")
    if np.any((s.mass == 0.0) & (gb != 0.0)):
        raise ValueError("h must vanish where s carries no mass")
    wpp = transport_value(r.mass, s.mass, cost.entries)
    prefactor = _alt_prefactor(wpp, p)
    tol = _pivot_tol(cost.entries)
    dantzig, max_iter = _budgets(cost.n, cost.n)
    val, status = kernels.alt_scaling_min(
        cost.entries, r.mass, s.mass, ga, gb, wpp, tol, dantzig, max_iter, 1e-9
    )
    if status != kernels.STATUS_OK:
        raise SolverError(f"scaling minimization failed with status {status}")
    return prefactor * float(val)


def _alt_prefactor(wpp: float, p: float) -> float:
    if wpp <= 0.0:
        if p == 1.0:
            return 1.0
        raise ValueError(
            "alternative regime needs distinct measures: the limit prefactor "
            "W**(1-p) is undefined at W = 0 for p > 1"
        )
    return (1.0 / p) * wpp ** ((1.0 - p) / p)


@dataclass(frozen=True)
class ScalingRate:
    """Rate that standardizes an empirical distance for its limit."""

    regime: str
    factor: float


def scaling(regime: str, n: int, m: int | None, p: float) -> ScalingRate:
    """Standardizing factor for sample sizes (n, m) in the given regime.

    Null regimes scale like the 1/(2p)-th power of the effective sample
    size because the distance itself is a p-th root; alternative regimes
    are root-n regular.
    """
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    if p < 1.0:
        raise ValueError("order must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    if regime.startswith("two-"):
        if m is None or m < 1:
            raise ValueError("two-sample regimes need m >= 1")
        eff = n * m / (n + m)
    else:
        eff = float(n)
    if regime.endswith("null"):
        factor = eff ** (1.0 / (2.0 * p))
    else:
        factor = eff**0.5
    return ScalingRate(regime=regime, factor=float(factor))


@dataclass(frozen=True)
class LimitDraws:
    """Monte Carlo sample from one limiting distribution."""

    regime: str
    p: float
    lam: float | None
    seed: int
    draws: np.ndarray

    @property
    def M(self) -> int:
        return self.draws.shape[0]


def limit_sample(
    regime: str,
    r: Measure,
    s: Measure | None,
    cost: CostMatrix,
    p: float,
    M: int,
    seed: int = 0,
    lam: float | None = None,
    workers: int = 1,
) -> LimitDraws:
    """Draw M realizations of the limiting distribution in one regime.

    Null regimes take a single measure r (the truth, or a plug-in such as
    the pooled empirical measure) and return nonnegative draws on the
    distance scale. Alternative regimes take the pair (r, s) and return
    draws of the centered distance limit, which can be negative.
    two-sample-alt additionally needs the sample-balance weight lam; the
    two-sample null limit does not depend on it.
    """
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    if p < 1.0:
        raise ValueError("order must be >= 1")
    if M < 1:
        raise ValueError("M must be positive")
    check_same_support(r.n, cost.n)

    if regime.endswith("null"):
        if s is not None:
            raise ValueError("null regimes take a single measure; s must be None")
        if lam is not None:
            raise ValueError("the null limit does not use lam")
        draws = _sample_null(r, cost, p, M, seed, workers)
        return LimitDraws(regime=regime, p=p, lam=None, seed=seed, draws=draws)

    if s is None:
        raise ValueError("alternative regimes need both measures")
    check_same_support(r.n, s.n)
    if regime == "one-sample-alt":
        if lam is not None:
            raise ValueError("one-sample-alt does not use lam")
        lam_eff = 1.0
        two_gaussians = False
    else:
        if lam is None:
            raise ValueError("two-sample-alt needs lam in [0, 1]")
        if not 0.0 <= lam <= 1.0:
            raise ValueError("lam must lie in [0, 1]")
        lam_eff = float(lam)
        two_gaussians = True
    draws = _sample_alt(r, s, cost, p, lam_eff, two_gaussians, M, seed, workers)
    return LimitDraws(
        regime=regime,
        p=p,
        lam=lam_eff if two_gaussians else None,
        seed=seed,
        draws=draws,
    )


def _sample_null(
    r: Measure, cost: CostMatrix, p: float, M: int, seed: int, workers: int
) -> np.ndarray:
    mass = r.mass
    sqrt_r = np.sqrt(mass)
    closed = cost.closed_entries()
    tol = _pivot_tol(cost.entries)
    dantzig, max_iter = _budgets(cost.n, cost.n)
    inv_p = 1.0 / p

    def draw(rng: np.random.Generator, i: int) -> float:
        g = _gaussian_vector(rng, mass, sqrt_r)
        val, status = kernels.balanced_dual_max(g, closed, tol, dantzig, max_iter)
        if status != kernels.STATUS_OK:
            raise SolverError(f"dual maximization failed on draw {i}")
        return val**inv_p

    return parallel.map_draws(draw, M, seed, workers)


def _sample_alt(
    r: Measure,
    s: Measure,
    cost: CostMatrix,
    p: float,
    lam: float,
    two_gaussians: bool,
    M: int,
    seed: int,
    workers: int,
) -> np.ndarray:
    wpp = transport_value(r.mass, s.mass, cost.entries)
    prefactor = _alt_prefactor(wpp, p)
    sqrt_lam = np.sqrt(lam)
    sqrt_co = np.sqrt(1.0 - lam)
    r_mass = r.mass
    s_mass = s.mass
    sqrt_r = np.sqrt(r_mass)
    sqrt_s = np.sqrt(s_mass)
    entries = cost.entries
    tol = _pivot_tol(entries)
    dantzig, max_iter = _budgets(cost.n, cost.n)
    zeros = np.zeros(cost.n)

    def draw(rng: np.random.Generator, i: int) -> float:
        ga = sqrt_lam * _gaussian_vector(rng, r_mass, sqrt_r)
        if two_gaussians:
            gb = sqrt_co * _gaussian_vector(rng, s_mass, sqrt_s)
        else:
            gb = zeros
        val, status = kernels.alt_scaling_min(
            entries, r_mass, s_mass, ga, gb, wpp, tol, dantzig, max_iter, 1e-9
        )
        if status != kernels.STATUS_OK:
            raise SolverError(f"scaling minimization failed on draw {i}")
        return prefactor * val

    return parallel.map_draws(draw, M, seed, workers)
