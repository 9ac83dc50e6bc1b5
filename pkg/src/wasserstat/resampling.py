"""Bootstrap schemes for two-sample transport distances.

Three resampling laws for the centered statistic on the p-th-power scale.
The naive full-size bootstrap is known to track the wrong law here (the
statistic is only directionally differentiable) and is shipped purely as a
demonstrator; the reduced-size and derivative plug-in schemes are the
consistent alternatives.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import parallel
from .errors import SolverError
from .ground import Counts, CostMatrix, check_same_support, normalize
from .kernels import STATUS_OK, balanced_dual_max
from .limits import max_dual_null
from .transport import _budgets, _pivot_tol, transport_value

SCHEMES = ("naive", "m-of-n", "derivative")


@dataclass(frozen=True)
class BootstrapDraws:
    """Replicated bootstrap values on the p-th-power distance scale."""

    scheme: str
    values: np.ndarray
    B: int
    k: int | None
    seed: int
    n: int
    m: int
    p: float

    @property
    def inconsistent(self) -> bool:
        """True for the scheme whose limit law is known to be wrong."""
        return self.scheme == "naive"

    def wp_scale(self) -> np.ndarray:
        """Draws mapped to the distance scale via x -> max(x, 0)^(1/p).

        Meaningful under the null, where the limit lives on [0, inf); the
        clamp discards the centering term's negative excursions.
        """
        return np.clip(self.values, 0.0, None) ** (1.0 / self.p)


def _prepare(x_counts: Counts, y_counts: Counts, cost: CostMatrix, p: float, B: int):
    check_same_support(x_counts.size, y_counts.size, cost.n)
    if p < 1.0:
        raise ValueError("order must be >= 1")
    if B < 0:
        raise ValueError("B must be nonnegative")
    r_hat = normalize(x_counts).mass
    s_hat = normalize(y_counts).mass
    wpp_hat = transport_value(r_hat, s_hat, cost.entries)
    return r_hat, s_hat, wpp_hat


def two_sample_rate(n: int, m: int) -> float:
    """sqrt(nm / (n + m)), the two-sample standardization on the p-power scale."""
    if n < 1 or m < 1:
        raise ValueError("sample sizes must be >= 1")
    return math.sqrt(n * m / (n + m))


def naive_bootstrap(
    x_counts: Counts,
    y_counts: Counts,
    cost: CostMatrix,
    p: float,
    B: int,
    seed: int = 0,
    workers: int = 1,
) -> BootstrapDraws:
    """Full-size multinomial bootstrap of the centered two-sample statistic.

    Each replication resamples n observations from the first empirical
    measure and m from the second and evaluates
    rate * (W_p^p(resampled) - W_p^p(empirical)). Ships for demonstration:
    the draws do not converge to the statistic's limit law, and exported
    metadata flags them as inconsistent.
    """
    r_hat, s_hat, wpp_hat = _prepare(x_counts, y_counts, cost, p, B)
    n, m = x_counts.n, y_counts.n
    rate = two_sample_rate(n, m)
    entries = cost.entries

    def draw(rng: np.random.Generator, i: int) -> float:
        rs = rng.multinomial(n, r_hat) / n
        ss = rng.multinomial(m, s_hat) / m
        return rate * (transport_value(rs, ss, entries) - wpp_hat)

    values = parallel.map_draws(draw, B, seed, workers)
    return BootstrapDraws(
        scheme="naive", values=values, B=B, k=None, seed=seed, n=n, m=m, p=p
    )


def default_subsample_size(n: int, m: int) -> int:
    """ceil(min(n, m)^(2/3)): a reduced size growing strictly slower than n."""
    return int(math.ceil(min(n, m) ** (2.0 / 3.0)))


def mofn_bootstrap(
    x_counts: Counts,
    y_counts: Counts,
    cost: CostMatrix,
    p: float,
    B: int,
    k: int | None = None,
    seed: int = 0,
    workers: int = 1,
) -> BootstrapDraws:
    """Reduced-size bootstrap: k observations resampled from each sample.

    Each replication draws two multinomial resamples of size k and returns
    sqrt(k/2) * (W_p^p(resampled) - W_p^p(empirical)); sqrt(k/2) is the
    two-sample rate for equal resample sizes k. Consistent when k grows
    with n but k/n -> 0, hence the hard error at k >= min(n, m) and the
    warning once k exceeds min(n, m)^0.9.
    """
    r_hat, s_hat, wpp_hat = _prepare(x_counts, y_counts, cost, p, B)
    n, m = x_counts.n, y_counts.n
    if k is None:
        k = default_subsample_size(n, m)
    k = int(k)
    if k < 1:
        raise ValueError("k must be >= 1")
    if k >= min(n, m):
        raise ValueError(f"k = {k} must be smaller than min(n, m) = {min(n, m)}")
    if k > min(n, m) ** 0.9:
        warnings.warn(
            f"subsample size k = {k} is large relative to min(n, m) = {min(n, m)}; "
            "the resampling law may track the sample, not the limit",
            stacklevel=2,
        )
    rate = two_sample_rate(k, k)
    entries = cost.entries

    def draw(rng: np.random.Generator, i: int) -> float:
        rs = rng.multinomial(k, r_hat) / k
        ss = rng.multinomial(k, s_hat) / k
        return rate * (transport_value(rs, ss, entries) - wpp_hat)

    values = parallel.map_draws(draw, B, seed, workers)
    return BootstrapDraws(
        scheme="m-of-n", values=values, B=B, k=k, seed=seed, n=n, m=m, p=p
    )


def derivative_map(h1: np.ndarray, h2: np.ndarray, cost: CostMatrix) -> float:
    """max over potentials u of <u, h2 - h1>: the statistic's derivative.

    h1 and h2 must each sum to zero. Positively homogeneous of degree 1.
    """
    h1 = np.asarray(h1, dtype=np.float64)
    h2 = np.asarray(h2, dtype=np.float64)
    if abs(h1.sum()) > 1e-9 or abs(h2.sum()) > 1e-9:
        raise ValueError("direction vectors must sum to zero")
    return max_dual_null(h2 - h1, cost)


def derivative_bootstrap(
    x_counts: Counts,
    y_counts: Counts,
    cost: CostMatrix,
    p: float,
    B: int,
    seed: int = 0,
    workers: int = 1,
) -> BootstrapDraws:
    """Plug the rescaled bootstrapped empirical process into the derivative.

    Each replication resamples both empirical measures at full size, forms
    h_j = rate * (resample_j - empirical_j), and evaluates the derivative
    map max_u <u, h2 - h1>. Consistent under the null r = s, which is the
    intended use; under a fixed alternative the map evaluated at the
    empirical pair is the wrong derivative.
    """
    r_hat, s_hat, _ = _prepare(x_counts, y_counts, cost, p, B)
    n, m = x_counts.n, y_counts.n
    rate = two_sample_rate(n, m)
    closed = cost.closed_entries()
    tol = _pivot_tol(cost.entries)
    dantzig, max_iter = _budgets(cost.n, cost.n)

    def draw(rng: np.random.Generator, i: int) -> float:
        rs = rng.multinomial(n, r_hat) / n
        ss = rng.multinomial(m, s_hat) / m
        g = rate * ((ss - s_hat) - (rs - r_hat))
        val, status = balanced_dual_max(g, closed, tol, dantzig, max_iter)
        if status != STATUS_OK:
            raise SolverError(f"dual maximization failed on replication {i}")
        return val

    values = parallel.map_draws(draw, B, seed, workers)
    return BootstrapDraws(
        scheme="derivative", values=values, B=B, k=None, seed=seed, n=n, m=m, p=p
    )
