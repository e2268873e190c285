"""Direct simulation of percolated random trees.

Each edge is percolated when it is created.  A new vertex is in the root
cluster iff its edge is intact and its parent is.  So one pass with a flag
per vertex gives the root cluster; union-find is only used when the largest
cluster is requested.

Draw order per insertion: attachment uniform, then retention uniform.  Both
are independent of ``p``, so runs sharing a seed at different ``p`` see the
same trees and the same uniforms (common random numbers).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .errors import InvariantViolation, ParameterError
from .models import BAry, ScaleFree, TreeModel, UniformRecursive, p_of
from . import seeding

__all__ = [
    "PercolationResult", "TreeBatch", "p_of", "percolate", "percolate_bary",
    "percolate_scalefree", "percolate_urt", "percolate_replicas",
]


@dataclass(frozen=True)
class PercolationResult:
    n: int
    root_cluster: int
    largest_cluster: Optional[int]
    p_used: float


# ---------------------------------------------------------------------------
# union-find over vertex indices


@njit(nogil=True, cache=True)
def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]  # path halving
        i = parent[i]
    return i


@njit(nogil=True, cache=True)
def _union(parent, size, i, j):
    ri = _find(parent, i)
    rj = _find(parent, j)
    if ri == rj:
        return size[ri]
    if size[ri] < size[rj]:
        ri, rj = rj, ri
    parent[rj] = ri
    size[ri] += size[rj]
    return size[ri]


@njit(nogil=True, cache=True)
def _uf_init(count, want_largest):
    m = count if want_largest else 1
    parent = np.arange(m)
    size = np.ones(m, dtype=np.int64)
    return parent, size


# ---------------------------------------------------------------------------
# kernels; each returns (root_cluster, largest_cluster or -1, bookkeeping)


@njit(nogil=True, cache=True)
def _bary_kernel(b, n, p, want_largest, rng):
    nslots_max = (b - 1) * n + 1
    flag = np.empty(nslots_max, dtype=np.uint8)
    owner = np.empty(nslots_max if want_largest else 1, dtype=np.int64)
    parent, size = _uf_init(n, want_largest)
    for s in range(b):
        flag[s] = 1
        if want_largest:
            owner[s] = 0
    nslots = b
    root = 1
    largest = 1
    for v in range(1, n):
        j = int(rng.random() * nslots)
        if j >= nslots:
            j = nslots - 1
        keep = rng.random() < p
        f = flag[j] if keep else 0
        root += f
        if want_largest and keep:
            largest = max(largest, _union(parent, size, owner[j], v))
        # slot j becomes the new vertex's first child slot; b - 1 more appended
        flag[j] = f
        if want_largest:
            owner[j] = v
        for s in range(nslots, nslots + b - 1):
            flag[s] = f
            if want_largest:
                owner[s] = v
        nslots += b - 1
    if want_largest:
        if _uf_size(parent, size, 0) != root:
            return root, -2, nslots
        return root, largest, nslots
    return root, -1, nslots


@njit(nogil=True, cache=True)
def _uf_size(parent, size, i):
    return size[_find(parent, i)]


@njit(nogil=True, cache=True)
def _fenwick_add(tree, i, v):
    i += 1
    m = tree.shape[0]
    while i < m:
        tree[i] += v
        i += i & (-i)


@njit(nogil=True, cache=True)
def _fenwick_total(tree, count):
    i = count
    s = 0.0
    while i > 0:
        s += tree[i]
        i -= i & (-i)
    return s


@njit(nogil=True, cache=True)
def _fenwick_search(tree, top_bit, target):
    # smallest 0-based index whose prefix sum exceeds target
    pos = 0
    step = top_bit
    m = tree.shape[0]
    while step > 0:
        nxt = pos + step
        if nxt < m and tree[nxt] <= target:
            pos = nxt
            target -= tree[nxt]
        step >>= 1
    return pos


@njit(nogil=True, cache=True)
def _scalefree_kernel(a, n, p, want_largest, parents_out, rng):
    m = n + 1
    tree = np.zeros(m + 1)
    top_bit = 1
    while top_bit * 2 <= m:
        top_bit *= 2
    flag = np.zeros(m, dtype=np.uint8)
    parent, size = _uf_init(m, want_largest)
    record = parents_out.shape[0] == m
    flag[0] = 1
    if record:
        parents_out[0] = -1
        parents_out[1] = 0
    # seed edge {0, 1}
    keep = rng.random() < p
    flag[1] = 1 if keep else 0
    root = 1 + flag[1]
    largest = root
    if want_largest and keep:
        _union(parent, size, 0, 1)
    _fenwick_add(tree, 0, 1.0 + a)
    _fenwick_add(tree, 1, 1.0 + a)
    for k in range(1, n):
        total = 2.0 * k + a * (k + 1)
        i = _fenwick_search(tree, top_bit, rng.random() * total)
        if i > k:
            i = k
        keep = rng.random() < p
        v = k + 1
        f = flag[i] if keep else 0
        flag[v] = f
        root += f
        if record:
            parents_out[v] = i
        if want_largest and keep:
            largest = max(largest, _union(parent, size, i, v))
        _fenwick_add(tree, i, 1.0)
        _fenwick_add(tree, v, 1.0 + a)
    weight = _fenwick_total(tree, m)
    if want_largest:
        if _uf_size(parent, size, 0) != root:
            return root, -2, weight
        return root, largest, weight
    return root, -1, weight


@njit(nogil=True, cache=True)
def _urt_kernel(n, p, want_largest, rng):
    m = n + 1
    flag = np.zeros(m, dtype=np.uint8)
    parent, size = _uf_init(m, want_largest)
    flag[0] = 1
    root = 1
    largest = 1
    for k in range(n):
        i = int(rng.random() * (k + 1))
        if i > k:
            i = k
        keep = rng.random() < p
        f = flag[i] if keep else 0
        flag[k + 1] = f
        root += f
        if want_largest and keep:
            largest = max(largest, _union(parent, size, i, k + 1))
    if want_largest:
        if _uf_size(parent, size, 0) != root:
            return root, -2, m
        return root, largest, m
    return root, -1, m


# ---------------------------------------------------------------------------
# public entry points


def _check_common(n: int, p: float) -> int:
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be an integer >= 1, got {n!r}")
    if not (0.0 <= p <= 1.0):
        raise ParameterError(f"p must lie in [0, 1], got {p!r}")
    return int(n)


def _result(n, p, root, largest, want_largest) -> PercolationResult:
    if largest == -2:
        raise InvariantViolation("root flag count differs from the root's union-find component")
    return PercolationResult(n, int(root), int(largest) if want_largest else None, float(p))


def percolate_bary(b: int, n: int, p: float, rng: np.random.Generator,
                   want_largest: bool = False) -> PercolationResult:
    """Percolated b-ary recursive tree with ``n`` internal vertices."""
    b = BAry(b).b
    n = _check_common(n, p)
    root, largest, nslots = _bary_kernel(b, n, float(p), want_largest, rng)
    if nslots != (b - 1) * n + 1:
        raise InvariantViolation(f"{nslots} external slots after {n} insertions")
    return _result(n, p, root, largest, want_largest)


def percolate_scalefree(a: float, n: int, p: float, rng: np.random.Generator,
                        want_largest: bool = False,
                        parents: Optional[np.ndarray] = None) -> PercolationResult:
    """Percolated preferential-attachment tree on ``{0, ..., n}``.

    Vertex ``k + 1`` attaches to ``i`` with probability proportional to
    ``deg(i) + a``.  Pass an int64 array of length ``n + 1`` as ``parents``
    to record the tree (``-1`` at the root).
    """
    a = ScaleFree(a).a
    n = _check_common(n, p)
    out = np.empty(0, dtype=np.int64) if parents is None else parents
    if parents is not None and (parents.shape != (n + 1,) or parents.dtype != np.int64):
        raise ParameterError("parents must be an int64 array of length n + 1")
    root, largest, weight = _scalefree_kernel(a, n, float(p), want_largest, out, rng)
    expected = 2.0 * n + a * (n + 1)
    if abs(weight - expected) > 1e-9 * max(1.0, expected):
        raise InvariantViolation(f"total attachment weight {weight} != {expected}")
    return _result(n, p, root, largest, want_largest)


def percolate_urt(n: int, p: float, rng: np.random.Generator,
                  want_largest: bool = False) -> PercolationResult:
    """Percolated uniform random recursive tree on ``{0, ..., n}``."""
    n = _check_common(n, p)
    root, largest, _ = _urt_kernel(n, float(p), want_largest, rng)
    return _result(n, p, root, largest, want_largest)


def percolate(model: TreeModel, n: int, p: float, rng: np.random.Generator,
              want_largest: bool = False) -> PercolationResult:
    if isinstance(model, BAry):
        return percolate_bary(model.b, n, p, rng, want_largest)
    if isinstance(model, ScaleFree):
        return percolate_scalefree(model.a, n, p, rng, want_largest)
    if isinstance(model, UniformRecursive):
        return percolate_urt(n, p, rng, want_largest)
    raise ParameterError(f"unsupported tree model {model!r}")


@dataclass
class TreeBatch:
    model: TreeModel
    n: int
    p: float
    root_cluster: np.ndarray
    largest_cluster: Optional[np.ndarray]

    def __len__(self) -> int:
        return len(self.root_cluster)


def percolate_replicas(model: TreeModel, n: int, p: float, reps: int, seed: int,
                       threads: int = 1, want_largest: bool = False) -> TreeBatch:
    """``reps`` independent trees, replica ``r`` on stream TREE."""
    rows = seeding.map_replicas(lambda rng: percolate(model, n, p, rng, want_largest),
                                reps, seed, seeding.TREE, threads)
    root = np.array([r.root_cluster for r in rows], dtype=np.int64)
    largest = (np.array([r.largest_cluster for r in rows], dtype=np.int64)
               if want_largest else None)
    return TreeBatch(model, int(n), float(p), root, largest)
