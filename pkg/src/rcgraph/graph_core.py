"""Edge-probability models, graph sampling and structural statistics.

Vertices are labelled ``1..n``. Candidate edges ``(i, j)`` with ``i < j`` are
linearized row-major: row ``i`` (0-based) starts at ``i*(2n-i-1)/2``. All
edge probabilities are stored as lambda-values; the probability is
``lambda / n``.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import InvalidModelError

# pairs per chunk when an inhomogeneous model is evaluated edge by edge
CHUNK_PAIRS = 1 << 20


# --------------------------------------------------------------------------
# RNG streams


def child_seed(master: int, *key: int) -> int:
    """Derive a 64-bit child seed from ``master`` and an integer key path.

    The stream for a replication depends only on ``(master, *key)``, never on
    the order in which replications are executed.
    """
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator for ``seed``."""
    return np.random.Generator(np.random.PCG64(int(seed)))


# --------------------------------------------------------------------------
# edge indexing


def n_pairs(n: int) -> int:
    return n * (n - 1) // 2


def pair_index(n: int, i, j):
    """Linear index of 1-based pairs ``i < j`` (vectorized)."""
    i0 = np.asarray(i, dtype=np.int64) - 1
    j0 = np.asarray(j, dtype=np.int64) - 1
    return i0 * (2 * n - i0 - 1) // 2 + (j0 - i0 - 1)


def index_to_pair(n: int, k) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`pair_index`; returns 1-based ``(i, j)`` arrays."""
    k = np.asarray(k, dtype=np.int64)
    b = 2 * n - 1
    i0 = np.floor((b - np.sqrt(np.maximum(b * b - 8.0 * k, 0.0))) / 2).astype(np.int64)
    i0 = np.clip(i0, 0, max(n - 2, 0))
    # float rounding can put i0 off by one in either direction
    for _ in range(2):
        start = i0 * (2 * n - i0 - 1) // 2
        i0 = np.where(start > k, i0 - 1, i0)
        nxt = (i0 + 1) * (2 * n - i0 - 2) // 2
        i0 = np.where(nxt <= k, i0 + 1, i0)
    start = i0 * (2 * n - i0 - 1) // 2
    j0 = k - start + i0 + 1
    return i0 + 1, j0 + 1


def iter_pair_chunks(n: int, max_pairs: int = CHUNK_PAIRS) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield all pairs ``i < j`` in linear order as chunks of whole rows."""
    row = 1
    while row < n:
        rows = []
        total = 0
        while row < n and (not rows or total + (n - row) <= max_pairs):
            rows.append(row)
            total += n - row
            row += 1
        r = np.asarray(rows, dtype=np.int64)
        counts = n - r
        ii = np.repeat(r, counts)
        starts = np.cumsum(counts) - counts
        jj = np.arange(total, dtype=np.int64) - np.repeat(starts, counts) + np.repeat(r + 1, counts)
        yield ii, jj


# --------------------------------------------------------------------------
# models


@dataclass(frozen=True)
class Homogeneous:
    lam: float


@dataclass(frozen=True)
class HomogeneousSchedule:
    """``lambda_n = lambda_fn(n)`` shared by every edge."""

    lambda_fn: Callable[[int], float]


@dataclass(frozen=True)
class BlockStructure:
    """Vertex labels in ``0..K-1`` and a symmetric ``K x K`` lambda matrix."""

    labels: np.ndarray
    matrix: np.ndarray

    def members(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.labels == b) + 1 for b in range(self.matrix.shape[0])]


@dataclass(frozen=True, eq=False)
class Inhomogeneous:
    """Per-edge lambda-values ``lambda_fn(n, i, j)``.

    ``lambda_fn`` receives 1-based integer arrays ``i < j`` and must return an
    array of the same shape (scalars broadcast). ``lambda_max``, when given,
    is a certified upper bound that enables an O(edges) thinning sampler;
    ``blocks`` marks a block-constant model with closed-form edge classes.
    """

    lambda_fn: Callable[[int, np.ndarray, np.ndarray], np.ndarray]
    lambda_max: float | None = None
    blocks: BlockStructure | None = None


ModelKind = Union[Homogeneous, HomogeneousSchedule, Inhomogeneous]


@dataclass(frozen=True, eq=False)
class EdgeProbModel:
    n: int
    kind: ModelKind
    _lam: float | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidModelError(f"vertex count must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if isinstance(self.kind, Homogeneous):
            lam = float(self.kind.lam)
        elif isinstance(self.kind, HomogeneousSchedule):
            lam = float(self.kind.lambda_fn(self.n))
        elif isinstance(self.kind, Inhomogeneous):
            lam = None
            if self.kind.blocks is not None:
                b = self.kind.blocks
                if b.labels.shape != (self.n,):
                    raise InvalidModelError("block labels must have one entry per vertex")
                _check_lambdas(b.matrix, self.n)
        else:
            raise InvalidModelError(f"unknown model kind {type(self.kind).__name__}")
        if lam is not None:
            _check_lambdas(np.asarray(lam), self.n)
        object.__setattr__(self, "_lam", lam)

    # constructors ---------------------------------------------------------

    @classmethod
    def homogeneous(cls, n: int, lam: float) -> "EdgeProbModel":
        return cls(n, Homogeneous(lam))

    @classmethod
    def schedule(cls, n: int, lambda_fn: Callable[[int], float]) -> "EdgeProbModel":
        return cls(n, HomogeneousSchedule(lambda_fn))

    @classmethod
    def inhomogeneous(cls, n: int, lambda_fn, lambda_max: float | None = None) -> "EdgeProbModel":
        return cls(n, Inhomogeneous(lambda_fn, lambda_max=lambda_max))

    @classmethod
    def from_blocks(cls, n: int, labels, matrix) -> "EdgeProbModel":
        labels = np.asarray(labels, dtype=np.int64)
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or not np.allclose(matrix, matrix.T):
            raise InvalidModelError("block matrix must be square and symmetric")
        if labels.size and (labels.min() < 0 or labels.max() >= matrix.shape[0]):
            raise InvalidModelError("block labels out of range")
        blocks = BlockStructure(labels, matrix)

        def fn(n_, i, j):
            return matrix[labels[np.asarray(i) - 1], labels[np.asarray(j) - 1]]

        return cls(n, Inhomogeneous(fn, lambda_max=float(matrix.max()), blocks=blocks))

    @classmethod
    def from_edge_values(cls, n: int, values) -> "EdgeProbModel":
        """Model from a flat array of ``C(n, 2)`` lambda-values in linear order."""
        values = np.asarray(values, dtype=float)
        if values.shape != (n_pairs(n),):
            raise InvalidModelError(f"expected {n_pairs(n)} edge values, got shape {values.shape}")
        _check_lambdas(values, n)

        def fn(n_, i, j):
            return values[pair_index(n, i, j)]

        top = float(values.max()) if values.size else 0.0
        return cls(n, Inhomogeneous(fn, lambda_max=top))

    @classmethod
    def from_matrix(cls, n: int, matrix) -> "EdgeProbModel":
        """Model from an ``n x n`` lambda matrix (upper triangle is used)."""
        matrix = np.asarray(matrix, dtype=float)
        iu = np.triu_indices(n, k=1)
        return cls.from_edge_values(n, matrix[iu])

    # queries ----------------------------------------------------------------

    @property
    def homogeneous_lambda(self) -> float | None:
        """Shared lambda-value, or ``None`` for inhomogeneous models."""
        return self._lam

    @property
    def is_homogeneous(self) -> bool:
        return self._lam is not None

    @property
    def blocks(self) -> BlockStructure | None:
        if self.is_homogeneous:
            return BlockStructure(np.zeros(self.n, dtype=np.int64), np.array([[self._lam]]))
        return self.kind.blocks

    def lambdas_at(self, i, j) -> np.ndarray:
        """Lambda-values at 1-based pairs ``i < j``, validated."""
        i = np.asarray(i, dtype=np.int64)
        if self._lam is not None:
            return np.full(i.shape, self._lam)
        vals = np.broadcast_to(np.asarray(self.kind.lambda_fn(self.n, i, np.asarray(j)), dtype=float), i.shape)
        _check_lambdas(vals, self.n)
        return vals

    def iter_lambdas(self, max_pairs: int = CHUNK_PAIRS) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """Yield ``(i, j, lambda)`` chunks over every candidate edge."""
        for ii, jj in iter_pair_chunks(self.n, max_pairs):
            yield ii, jj, self.lambdas_at(ii, jj)


def _check_lambdas(vals: np.ndarray, n: int) -> None:
    vals = np.asarray(vals, dtype=float)
    if vals.size == 0:
        return
    if not np.all(np.isfinite(vals)):
        raise InvalidModelError("lambda-values must be finite")
    lo, hi = float(vals.min()), float(vals.max())
    if lo < 0 or hi > n:
        raise InvalidModelError(f"lambda-values must lie in [0, n={n}], got range [{lo}, {hi}]")


# --------------------------------------------------------------------------
# samples and statistics


@dataclass(frozen=True, eq=False)
class GraphSample:
    """An ``n``-vertex simple graph; ``edges`` is an ``(m, 2)`` int array, ``i < j``."""

    n: int
    edges: np.ndarray
    seed: int | None = None

    @property
    def m(self) -> int:
        return int(self.edges.shape[0])

    def validate(self) -> None:
        e = self.edges
        if e.ndim != 2 or e.shape[1] != 2:
            raise ValueError("edges must have shape (m, 2)")
        if e.size == 0:
            return
        if e.min() < 1 or e.max() > self.n:
            raise ValueError(f"edge endpoint outside [1, {self.n}]")
        if np.any(e[:, 0] >= e[:, 1]):
            raise ValueError("edge pairs must satisfy i < j")
        if np.unique(pair_index(self.n, e[:, 0], e[:, 1])).size != e.shape[0]:
            raise ValueError("duplicate edges")

    def __eq__(self, other) -> bool:
        if not isinstance(other, GraphSample):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    __hash__ = None


@dataclass(frozen=True)
class ComponentSummary:
    sizes: tuple[int, ...]
    max_size: int
    is_connected: bool


@dataclass(frozen=True)
class DegreeHistogram:
    counts: dict[int, int]
    n: int

    def frequencies(self) -> dict[int, float]:
        return {k: c / self.n for k, c in self.counts.items()}


def _edges_from_index(n: int, idx: np.ndarray) -> np.ndarray:
    i, j = index_to_pair(n, idx)
    return np.column_stack([i, j]).astype(np.int64)


def _skip_positions(rng: np.random.Generator, total: int, p: float) -> np.ndarray:
    """Indices in ``[0, total)`` each kept with probability ``p`` via geometric gaps."""
    if total <= 0 or p <= 0.0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(total, dtype=np.int64)
    out = []
    pos = -1
    while True:
        remaining = (total - 1 - pos) * p
        size = int(remaining + 4.0 * math.sqrt(remaining) + 16)
        # clip gaps so that tiny p cannot overflow the int64 running sum
        gaps = np.minimum(rng.geometric(p, size=size), total + 1)
        idx = pos + np.cumsum(gaps, dtype=np.int64)
        if idx[-1] >= total:
            out.append(idx[idx < total])
            break
        out.append(idx)
        pos = int(idx[-1])
    return np.concatenate(out)


def sample(model: EdgeProbModel, seed: int) -> GraphSample:
    """Draw one graph: each candidate edge present independently w.p. ``lambda/n``.

    Homogeneous models and block models use geometric skipping (expected cost
    O(edges)); a general inhomogeneous model with ``lambda_max`` is thinned
    from a homogeneous ``lambda_max`` proposal; otherwise every pair is
    visited in row chunks.
    """
    n = model.n
    rng = make_rng(seed)
    lam = model.homogeneous_lambda
    if lam is not None:
        idx = _skip_positions(rng, n_pairs(n), lam / n)
        return GraphSample(n, _edges_from_index(n, idx), seed)

    kind = model.kind
    if kind.blocks is not None:
        edges = _sample_blocks(rng, n, kind.blocks)
    elif kind.lambda_max is not None:
        edges = _sample_thinned(rng, model)
    else:
        parts = []
        for ii, jj, vals in model.iter_lambdas():
            keep = rng.random(ii.size) < vals / n
            parts.append(np.column_stack([ii[keep], jj[keep]]))
        edges = np.concatenate(parts) if parts else np.empty((0, 2), dtype=np.int64)
    return GraphSample(n, edges.astype(np.int64).reshape(-1, 2), seed)


def _sample_thinned(rng: np.random.Generator, model: EdgeProbModel) -> np.ndarray:
    n = model.n
    top = float(model.kind.lambda_max)
    if top > n:
        raise InvalidModelError(f"lambda_max={top} exceeds n={n}")
    idx = _skip_positions(rng, n_pairs(n), top / n)
    if idx.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    i, j = index_to_pair(n, idx)
    vals = model.lambdas_at(i, j)
    if np.any(vals > top * (1 + 1e-12)):
        raise InvalidModelError("lambda_max is not an upper bound for lambda_fn")
    u = rng.random(idx.size)
    keep = u * top < vals
    return np.column_stack([i[keep], j[keep]])


def _sample_blocks(rng: np.random.Generator, n: int, blocks: BlockStructure) -> np.ndarray:
    members = blocks.members()
    k = len(members)
    parts = []
    for a in range(k):
        va = members[a]
        for b in range(a, k):
            p = float(blocks.matrix[a, b]) / n
            if a == b:
                s = va.size
                idx = _skip_positions(rng, n_pairs(s), p)
                if idx.size:
                    x, y = index_to_pair(s, idx)
                    parts.append(np.column_stack([va[x - 1], va[y - 1]]))
            else:
                vb = members[b]
                idx = _skip_positions(rng, va.size * vb.size, p)
                if idx.size:
                    x, y = va[idx // vb.size], vb[idx % vb.size]
                    parts.append(np.column_stack([np.minimum(x, y), np.maximum(x, y)]))
    if not parts:
        return np.empty((0, 2), dtype=np.int64)
    e = np.concatenate(parts)
    order = np.argsort(pair_index(n, e[:, 0], e[:, 1]), kind="stable")
    return e[order]


def components(g: GraphSample) -> ComponentSummary:
    """Exact connected components; sizes in descending order."""
    n = g.n
    if g.m == 0:
        sizes = np.ones(n, dtype=np.int64)
    else:
        e = g.edges - 1
        adj = coo_matrix((np.ones(g.m, dtype=np.int8), (e[:, 0], e[:, 1])), shape=(n, n))
        _, labels = connected_components(adj, directed=False)
        sizes = np.bincount(labels)
    sizes = np.sort(sizes)[::-1]
    top = int(sizes[0])
    return ComponentSummary(tuple(int(s) for s in sizes), top, top == n)


def max_component_size(g: GraphSample) -> int:
    """``|C_max|`` without materializing the size tuple."""
    if g.m == 0:
        return 1
    e = g.edges - 1
    adj = coo_matrix((np.ones(g.m, dtype=np.int8), (e[:, 0], e[:, 1])), shape=(g.n, g.n))
    _, labels = connected_components(adj, directed=False)
    return int(np.bincount(labels).max())


class UnionFind:
    """Disjoint-set forest with union by size and path halving."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True

    def component_sizes(self) -> list[int]:
        return sorted((self.size[r] for r in range(len(self.parent)) if self.find(r) == r), reverse=True)


def components_union_find(g: GraphSample) -> ComponentSummary:
    """Pure-Python union-find route to :func:`components` (reference path)."""
    uf = UnionFind(g.n)
    for i, j in g.edges.tolist():
        uf.union(i - 1, j - 1)
    sizes = uf.component_sizes()
    return ComponentSummary(tuple(sizes), sizes[0], sizes[0] == g.n)


def degrees(g: GraphSample) -> np.ndarray:
    """Degree of each vertex, index 0 is vertex 1."""
    return np.bincount(g.edges.ravel() - 1, minlength=g.n)[: g.n] if g.m else np.zeros(g.n, dtype=np.int64)


def degree_histogram(g: GraphSample) -> DegreeHistogram:
    counts = np.bincount(degrees(g))
    return DegreeHistogram({k: int(c) for k, c in enumerate(counts) if c}, g.n)


# --------------------------------------------------------------------------
# edge-list text format: "n m" then m lines "i j"


def write_edge_list(g: GraphSample, dest) -> None:
    buf = io.StringIO()
    buf.write(f"{g.n} {g.m}\n")
    if g.m:
        np.savetxt(buf, g.edges, fmt="%d")
    text = buf.getvalue()
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text)
    else:
        dest.write(text)


def read_edge_list(src) -> GraphSample:
    text = Path(src).read_text() if isinstance(src, (str, Path)) else src.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty edge-list file")
    try:
        n, m = (int(t) for t in lines[0].split())
    except ValueError as exc:
        raise ValueError(f"line 1: expected 'n m', got {lines[0]!r}") from exc
    if len(lines) - 1 != m:
        raise ValueError(f"header declares {m} edges, found {len(lines) - 1}")
    edges = np.empty((m, 2), dtype=np.int64)
    for row, ln in enumerate(lines[1:]):
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"line {row + 2}: expected 'i j', got {ln!r}")
        edges[row] = (int(parts[0]), int(parts[1]))
    g = GraphSample(n, edges)
    g.validate()
    return g
