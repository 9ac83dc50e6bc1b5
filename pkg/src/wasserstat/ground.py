"""Ground spaces, cost matrices, and probability vectors on finite supports."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataMismatchError

MASS_TOL = 1e-12
RENORM_TOL = 1e-6


def _as_float_vector(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("expected a nonempty 1-d array")
    if not np.all(np.isfinite(arr)):
        raise ValueError("entries must be finite")
    return arr


@dataclass(frozen=True)
class GroundSpace:
    """Finite collection of labeled points, optionally with coordinates.

    labels are unique identifiers; coords, when present, is an (N, d)
    array used to build geometric cost matrices.
    """

    labels: tuple[str, ...]
    coords: np.ndarray | None = None

    def __post_init__(self):
        if len(self.labels) == 0:
            raise ValueError("ground space needs at least one point")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("ground space labels must be unique")
        if self.coords is not None:
            coords = np.asarray(self.coords, dtype=np.float64)
            if coords.ndim != 2 or coords.shape[0] != len(self.labels):
                raise ValueError("coords must be an (N, d) array matching labels")
            if not np.all(np.isfinite(coords)):
                raise ValueError("coords must be finite")
            coords.setflags(write=False)
            object.__setattr__(self, "coords", coords)

    @property
    def n(self) -> int:
        return len(self.labels)


@dataclass
class CostMatrix:
    """Pairwise transport costs c(x, x') on a ground space.

    entries must be square, nonnegative, symmetric, with a zero diagonal.
    exponent records the power p when entries are p-th powers of a metric;
    metric_flag asserts that entries**(1/exponent) satisfies the triangle
    inequality and is verified at construction.
    """

    entries: np.ndarray
    exponent: float = 1.0
    metric_flag: bool = False
    _closed: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError("cost matrix must be square")
        if not np.all(np.isfinite(entries)):
            raise ValueError("cost entries must be finite")
        if np.any(entries < 0):
            raise ValueError("cost entries must be nonnegative")
        if np.any(np.abs(np.diag(entries)) > 0):
            raise ValueError("cost diagonal must be zero")
        if not np.allclose(entries, entries.T, atol=1e-12, rtol=0):
            raise ValueError("cost matrix must be symmetric")
        if self.exponent < 1.0:
            raise ValueError("cost exponent must be >= 1")
        entries = np.ascontiguousarray(entries)
        entries.setflags(write=False)
        self.entries = entries
        if self.metric_flag:
            self._check_triangle()

    def _check_triangle(self, atol: float = 1e-9):
        d = self.entries ** (1.0 / self.exponent)
        # d[i,k] <= d[i,j] + d[j,k] for all triples
        via = d[:, :, None] + d[None, :, :]
        if np.any(d > via.min(axis=1) + atol):
            raise ValueError("metric_flag set but triangle inequality fails")

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def closed_entries(self) -> np.ndarray:
        """Shortest-path closure of the cost graph.

        Returns the matrix of cheapest path costs between all pairs, where a
        path may pass through intermediate points. Equal to entries whenever
        the entries themselves satisfy the triangle inequality.
        """
        if self._closed is None:
            c = np.array(self.entries, dtype=np.float64)
            n = c.shape[0]
            for k in range(n):
                np.minimum(c, c[:, k, None] + c[None, k, :], out=c)
            c.setflags(write=False)
            self._closed = c
        return self._closed


@dataclass(frozen=True)
class Measure:
    """Probability vector on a finite ground space."""

    mass: np.ndarray

    def __post_init__(self):
        mass = _as_float_vector(self.mass)
        if np.any(mass < 0):
            raise ValueError("measure entries must be nonnegative")
        total = mass.sum()
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"measure mass sums to {total!r}, expected 1")
        mass = np.ascontiguousarray(mass)
        mass.setflags(write=False)
        object.__setattr__(self, "mass", mass)

    @classmethod
    def from_array(cls, values, renormalize: bool = False) -> "Measure":
        """Build a measure, optionally absorbing small mass drift.

        With renormalize=True a total within RENORM_TOL of 1 is rescaled
        exactly to 1; larger drift is still rejected.
        """
        mass = _as_float_vector(values)
        if np.any(mass < 0):
            raise ValueError("measure entries must be nonnegative")
        total = mass.sum()
        if renormalize:
            if abs(total - 1.0) > RENORM_TOL:
                raise ValueError(
                    f"measure mass sums to {total!r}, outside the {RENORM_TOL} tolerance"
                )
            mass = mass / total
        return cls(mass)

    @property
    def n(self) -> int:
        return self.mass.shape[0]


@dataclass(frozen=True)
class Counts:
    """Raw observation counts over a finite ground space."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 1 or counts.size == 0:
            raise ValueError("counts must be a nonempty 1-d array")
        if not np.issubdtype(counts.dtype, np.integer):
            as_int = np.asarray(counts, dtype=np.int64)
            if not np.array_equal(as_int, counts):
                raise ValueError("counts must be integers")
            counts = as_int
        else:
            counts = counts.astype(np.int64)
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")
        if counts.sum() < 1:
            raise ValueError("counts must contain at least one observation")
        counts = np.ascontiguousarray(counts)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        """Total number of observations."""
        return int(self.counts.sum())

    @property
    def size(self) -> int:
        return self.counts.shape[0]


def normalize(counts: Counts) -> Measure:
    """Empirical measure of a count vector."""
    return Measure(counts.counts / counts.n)


def build_cost(space: GroundSpace, p: float) -> CostMatrix:
    """Cost matrix of p-th powers of Euclidean distances between coordinates."""
    if space.coords is None:
        raise ValueError("ground space has no coordinates to build a cost from")
    if p < 1.0:
        raise ValueError("cost exponent must be >= 1")
    diff = space.coords[:, None, :] - space.coords[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    np.fill_diagonal(dist, 0.0)
    entries = dist**p
    return CostMatrix(entries, exponent=float(p), metric_flag=True)


def build_grid(L: int, p: float) -> tuple[GroundSpace, CostMatrix]:
    """Regular L x L integer grid with Euclidean cost to the power p.

    Points are laid out row-major with labels "i_j", 1 <= i, j <= L.
    """
    if L < 1:
        raise ValueError("grid side must be >= 1")
    coords = np.array(
        [(i, j) for i in range(1, L + 1) for j in range(1, L + 1)], dtype=np.float64
    )
    labels = tuple(f"{i}_{j}" for i in range(1, L + 1) for j in range(1, L + 1))
    space = GroundSpace(labels=labels, coords=coords)
    return space, build_cost(space, p)


def sample_dirichlet(N: int, alpha: float, rng: np.random.Generator) -> Measure:
    """Draw a measure from the flat Dirichlet(alpha, ..., alpha) on N points."""
    if N < 1:
        raise ValueError("need at least one point")
    if alpha <= 0:
        raise ValueError("dirichlet concentration must be positive")
    mass = rng.dirichlet(np.full(N, float(alpha)))
    mass = mass / mass.sum()  # exact unit total
    return Measure(mass)


def check_same_support(*sizes: int):
    """Raise DataMismatchError unless all given dimensions agree."""
    if len(set(sizes)) > 1:
        raise DataMismatchError(f"inconsistent dimensions: {sizes}")
