"""Closed-form limit sampling on weighted trees and the real line.

When the ground metric comes from a rooted weighted tree, the dual
maximization collapses: the limit draw is a weighted sum of absolute
subtree sums of the Gaussian vector, with no linear program involved.
Sorted points on the real line are the chain-tree special case; there the
subtree sums are a Brownian bridge evaluated at cumulative masses.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ground import CostMatrix, Measure
from .limits import LimitDraws, _gaussian_vector
from .parallel import substream

_CHUNK_SCALARS = 1 << 22  # cap on chunk_rows * n during vectorized sampling


class Tree:
    """Rooted tree with positive edge weights.

    parent[i] is the index of node i's parent; the root is its own parent
    and carries weight 0. weight[i] is the length of the edge from i to
    parent[i]. Construction validates that exactly one root exists and
    that every node reaches it.
    """

    def __init__(self, labels, parent, weight):
        labels = tuple(str(x) for x in labels)
        if len(labels) == 0:
            raise ValueError("tree needs at least one node")
        if len(set(labels)) != len(labels):
            raise ValueError("tree labels must be unique")
        parent = np.asarray(parent, dtype=np.int64)
        weight = np.asarray(weight, dtype=np.float64)
        n = len(labels)
        if parent.shape != (n,) or weight.shape != (n,):
            raise ValueError("parent and weight must have one entry per node")
        if np.any(parent < 0) or np.any(parent >= n):
            raise ValueError("parent indices out of range")
        roots = np.flatnonzero(parent == np.arange(n))
        if roots.size != 1:
            raise ValueError(f"expected exactly one self-parented root, found {roots.size}")
        root = int(roots[0])
        if not np.all(np.isfinite(weight)):
            raise ValueError("edge weights must be finite")
        nonroot = np.arange(n) != root
        if np.any(weight[nonroot] <= 0):
            raise ValueError("edge weights must be positive")
        weight = weight.copy()
        weight[root] = 0.0

        # breadth-first order from the root doubles as a cycle check
        children: list[list[int]] = [[] for _ in range(n)]
        for i in range(n):
            if i != root:
                children[parent[i]].append(i)
        order = np.empty(n, dtype=np.int64)
        depth = np.zeros(n, dtype=np.int64)
        order[0] = root
        head, tail = 0, 1
        while head < tail:
            node = order[head]
            head += 1
            for ch in children[node]:
                depth[ch] = depth[node] + 1
                order[tail] = ch
                tail += 1
        if tail != n:
            raise ValueError("parent map contains a cycle or unreachable nodes")

        parent.setflags(write=False)
        weight.setflags(write=False)
        order.setflags(write=False)
        depth.setflags(write=False)
        self.labels = labels
        self.parent = parent
        self.weight = weight
        self.root = root
        self.n = n
        self._index = {lab: i for i, lab in enumerate(labels)}
        self._children = tuple(tuple(c) for c in children)
        self._order = order
        self._depth = depth

    def index_of(self, label) -> int:
        try:
            return self._index[str(label)]
        except KeyError:
            raise ValueError(f"unknown tree node {label!r}") from None

    def children(self, i: int) -> tuple[int, ...]:
        return self._children[i]


@dataclass(frozen=True)
class TreeOperators:
    """Materialized subtree index lists, one per node (self included)."""

    closures: tuple[np.ndarray, ...]

    @classmethod
    def from_tree(cls, t: Tree) -> "TreeOperators":
        lists: list[list[int]] = [[] for _ in range(t.n)]
        for node in t._order[::-1]:
            acc = [int(node)]
            for ch in t.children(int(node)):
                acc.extend(lists[ch])
            lists[int(node)] = acc
        closures = []
        for acc in lists:
            arr = np.array(sorted(acc), dtype=np.int64)
            arr.setflags(write=False)
            closures.append(arr)
        return cls(closures=tuple(closures))


def tree_distance(t: Tree, x, y) -> float:
    """Length of the unique path between nodes x and y (labels)."""
    i, j = t.index_of(x), t.index_of(y)
    dist = 0.0
    while t._depth[i] > t._depth[j]:
        dist += t.weight[i]
        i = t.parent[i]
    while t._depth[j] > t._depth[i]:
        dist += t.weight[j]
        j = t.parent[j]
    while i != j:
        dist += t.weight[i] + t.weight[j]
        i, j = t.parent[i], t.parent[j]
    return float(dist)


def distance_matrix(t: Tree) -> np.ndarray:
    d = np.zeros((t.n, t.n))
    for a in range(t.n):
        for b in range(a + 1, t.n):
            d[a, b] = d[b, a] = tree_distance(t, t.labels[a], t.labels[b])
    return d


def tree_cost(t: Tree, p: float) -> CostMatrix:
    """Cost matrix of p-th powers of the tree metric."""
    return CostMatrix(entries=distance_matrix(t) ** p, exponent=p, metric_flag=True)


def apply_S(t: Tree, u: np.ndarray) -> np.ndarray:
    """Subtree sums: output at x is the sum of u over x and its descendants.

    One bottom-up accumulation over the breadth-first order; O(N).
    """
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (t.n,):
        raise ValueError(f"vector must have length {t.n}")
    s = u.copy()
    for node in t._order[:0:-1]:
        s[t.parent[node]] += s[node]
    return s


def apply_D(t: Tree, v: np.ndarray) -> np.ndarray:
    """Parent differences: v[x] - v[parent(x)], and v itself at the root.

    Adjoint to apply_S: <u, v> equals <apply_S(u), apply_D(v)>.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (t.n,):
        raise ValueError(f"vector must have length {t.n}")
    d = v - v[t.parent]
    d[t.root] = v[t.root]
    return d


def _apply_S_rows(t: Tree, rows: np.ndarray) -> np.ndarray:
    for node in t._order[:0:-1]:
        rows[:, t.parent[node]] += rows[:, node]
    return rows


def _gaussian_rows(seed: int, lo: int, hi: int, mass: np.ndarray, sqrt_mass: np.ndarray) -> np.ndarray:
    rows = np.empty((hi - lo, mass.shape[0]))
    for i in range(lo, hi):
        rows[i - lo] = _gaussian_vector(substream(seed, i), mass, sqrt_mass)
    return rows


def tree_limit_sample(t: Tree, r: Measure, p: float, M: int, seed: int = 0) -> LimitDraws:
    """M draws of the limiting distribution on the tree metric, order p.

    Each draw is { sum over non-root x of |subtree sum of G at x| * w_x^p }
    raised to 1/p, with G the zero-sum Gaussian of r. Entirely closed-form.
    Draw i consumes the (seed, i) substream, so results do not depend on
    chunking.
    """
    if r.n != t.n:
        raise ValueError(f"measure has {r.n} entries for a {t.n}-node tree")
    if p < 1.0:
        raise ValueError("order must be >= 1")
    if M < 0:
        raise ValueError("M must be nonnegative")
    wp = t.weight**p
    wp[t.root] = 0.0
    mass = r.mass
    sqrt_mass = np.sqrt(mass)
    out = np.empty(M)
    chunk = max(1, _CHUNK_SCALARS // max(t.n, 1))
    for lo in range(0, M, chunk):
        hi = min(lo + chunk, M)
        rows = _gaussian_rows(seed, lo, hi, mass, sqrt_mass)
        s = _apply_S_rows(t, rows)
        out[lo:hi] = (np.abs(s) @ wp) ** (1.0 / p)
    return LimitDraws(regime="tree-null", p=float(p), lam=None, seed=seed, draws=out)


def line_limit_sample(points, r: Measure, M: int, seed: int = 0) -> LimitDraws:
    """M draws of the order-2 limit for sorted points on the real line.

    The subtree sums of the chain tree reduce to a Brownian bridge at the
    cumulative masses t_j, sampled exactly through its finite-dimensional
    covariance t_i (1 - t_j): each draw is
    { sum_j |B(t_j)| * (x_{j+1} - x_j)^2 }^{1/2}.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 1 or points.size == 0:
        raise ValueError("points must be a nonempty 1-d array")
    if not np.all(np.isfinite(points)):
        raise ValueError("points must be finite")
    if np.any(np.diff(points) <= 0):
        raise ValueError("points must be strictly increasing")
    n = points.shape[0]
    if r.n != n:
        raise ValueError(f"measure has {r.n} entries for {n} points")
    if M < 0:
        raise ValueError("M must be nonnegative")
    out = np.empty(M)
    if n == 1:
        out.fill(0.0)
        return LimitDraws(regime="line-null", p=2.0, lam=None, seed=seed, draws=out)
    cum = np.cumsum(r.mass)[:-1]
    dx2 = np.diff(points) ** 2
    # independent-increment construction: B(t_j) = W(t_j) - t_j W(1)
    grid = np.append(cum, 1.0)
    sqrt_inc = np.sqrt(np.clip(np.diff(grid, prepend=0.0), 0.0, None))
    chunk = max(1, _CHUNK_SCALARS // n)
    for lo in range(0, M, chunk):
        hi = min(lo + chunk, M)
        z = np.empty((hi - lo, n))
        for i in range(lo, hi):
            z[i - lo] = substream(seed, i).standard_normal(n)
        w = np.cumsum(z * sqrt_inc, axis=1)
        bridge = w[:, :-1] - np.outer(w[:, -1], cum)
        out[lo:hi] = np.sqrt(np.abs(bridge) @ dx2)
    return LimitDraws(regime="line-null", p=2.0, lam=None, seed=seed, draws=out)
