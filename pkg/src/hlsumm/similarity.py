"""Structure-based node features and cosine similarity queries."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .encoding import Model, Structure
from .taxonomy import HGSError, HeteroGraph

TIE_DECIMALS = 12


@dataclass
class NodeStructureMatrix:
    """Rows are nodes (``rows`` holds their ids), columns are structures."""

    B: sp.csr_matrix
    rows: np.ndarray
    gamma: float
    d_max: int


@dataclass
class NodeFeatures:
    rows: np.ndarray
    vectors: np.ndarray
    singular_values: np.ndarray | None = None

    def row_of(self, node: int) -> int:
        i = int(np.searchsorted(self.rows, node))
        if i >= len(self.rows) or self.rows[i] != node:
            raise HGSError(f"node {node} is not a query row")
        return i


@dataclass(frozen=True)
class Match:
    node: int
    score: float | None  # None when the cosine is undefined (zero-norm row)

    @property
    def defined(self) -> bool:
        return self.score is not None


def hop_distances(graph: HeteroGraph, sources: np.ndarray, d_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes within ``d_max`` hops of any source, with their hop counts."""
    indptr, indices = graph.adj.indptr, graph.adj.indices
    frontier = np.unique(np.asarray(sources, dtype=np.int64))
    found_nodes, found_dist = [frontier], [np.zeros(len(frontier), dtype=np.int64)]
    visited = frontier
    for d in range(1, d_max + 1):
        if len(frontier) == 0:
            break
        starts = indptr[frontier]
        lens = indptr[frontier + 1] - starts
        offs = np.repeat(starts - np.concatenate(([0], np.cumsum(lens)[:-1])), lens)
        nbr = np.unique(indices[offs + np.arange(int(lens.sum()))])
        nbr = nbr[~np.isin(nbr, visited, assume_unique=True)]
        visited = np.union1d(visited, nbr)
        found_nodes.append(nbr)
        found_dist.append(np.full(len(nbr), d, dtype=np.int64))
        frontier = nbr
    return np.concatenate(found_nodes), np.concatenate(found_dist)


def build_matrix(
    graph: HeteroGraph,
    model: Model | Sequence[Structure],
    gamma: float = 0.7,
    d_max: int = 3,
    row_filter: str | None = None,
) -> NodeStructureMatrix:
    """Entry ``(i, s)`` is ``gamma ** hops(i, s)`` for nodes within ``d_max`` hops of ``s``."""
    structures = model.structures if isinstance(model, Model) else list(model)
    if not structures:
        raise HGSError("the model has no structures")
    if not 0.0 < gamma < 1.0:
        raise HGSError("gamma must lie in (0, 1)")
    if d_max < 0:
        raise HGSError("d_max must be >= 0")
    if row_filter is None:
        rows = np.arange(graph.n, dtype=np.int64)
    else:
        if row_filter not in graph.taxonomy:
            raise HGSError(f"unknown label {row_filter!r}")
        top = graph.taxonomy.label_id(row_filter)
        rows = np.flatnonzero(graph.label_ids[:, 0] == top)
    row_of = np.full(graph.n, -1, dtype=np.int64)
    row_of[rows] = np.arange(len(rows))
    ri, ci, val = [], [], []
    powers = gamma ** np.arange(d_max + 1, dtype=np.float64)
    for j, s in enumerate(structures):
        nodes, dist = hop_distances(graph, s.nodes, d_max)
        r = row_of[nodes]
        keep = r >= 0
        ri.append(r[keep])
        ci.append(np.full(int(keep.sum()), j, dtype=np.int64))
        val.append(powers[dist[keep]])
    B = sp.csr_matrix(
        (np.concatenate(val), (np.concatenate(ri), np.concatenate(ci))),
        shape=(len(rows), len(structures)),
    )
    B.sort_indices()
    return NodeStructureMatrix(B, rows, gamma, d_max)


def randomized_svd(B, r: int, p: int = 10, q: int = 2, seed: int = 0):
    """Truncated SVD by a Gaussian range finder with ``q`` power iterations.

    Returns ``(U, s, Vt)`` with ``r`` components, singular values descending.
    """
    m, n = B.shape
    if r < 1:
        raise HGSError("rank must be >= 1")
    if r > min(m, n):
        raise HGSError(f"rank {r} exceeds the smaller matrix dimension {min(m, n)}")
    rng = np.random.default_rng(seed)
    width = min(r + max(p, 0), min(m, n))
    omega = rng.standard_normal((n, width))
    Q, _ = np.linalg.qr(B @ omega)
    for _ in range(q):
        Z, _ = np.linalg.qr(B.T @ Q)
        Q, _ = np.linalg.qr(B @ Z)
    small = np.asarray((B.T @ Q).T)
    Uh, s, Vt = np.linalg.svd(small, full_matrices=False)
    U = Q @ Uh
    # fix signs so results are reproducible across BLAS builds
    flip = np.sign(U[np.argmax(np.abs(U), axis=0), np.arange(U.shape[1])])
    flip[flip == 0] = 1.0
    U *= flip
    Vt *= flip[:, None]
    return U[:, :r], s[:r], Vt[:r]


def node_features(matrix: NodeStructureMatrix, r: int = 16, p: int = 10, q: int = 2, seed: int = 0) -> NodeFeatures:
    U, s, _ = randomized_svd(matrix.B, r, p, q, seed)
    return NodeFeatures(matrix.rows, U * s, s)


def raw_features(matrix: NodeStructureMatrix) -> NodeFeatures:
    """Rows of B itself, for brute-force comparison."""
    return NodeFeatures(matrix.rows, matrix.B.toarray())


def top_similar(features: NodeFeatures, node: int, k: int = 10) -> list[Match]:
    """Cosine neighbours of ``node``: descending score, ties by id, undefined scores last."""
    if k < 1:
        raise HGSError("k must be >= 1")
    i = features.row_of(node)
    X = np.asarray(features.vectors, dtype=np.float64)
    norms = np.linalg.norm(X, axis=1)
    if norms[i] == 0:
        raise HGSError(f"node {node} has an all-zero feature vector")
    zero = norms == 0
    safe = np.where(zero, 1.0, norms)
    scores = (X @ X[i]) / (safe * norms[i])
    scores = np.clip(scores, -1.0, 1.0)
    ids = features.rows
    others = np.flatnonzero(np.arange(len(ids)) != i)
    defined = others[~zero[others]]
    undefined = others[zero[others]]
    # scores equal up to rounding noise count as ties and fall back to id order
    key = np.round(scores[defined], TIE_DECIMALS)
    order = defined[np.lexsort((ids[defined], -key))]
    out = [Match(int(ids[j]), float(scores[j])) for j in order[:k]]
    for j in undefined[: max(0, k - len(out))]:
        out.append(Match(int(ids[j]), None))
    return out


def cosine(features: NodeFeatures, a: int, b: int) -> float:
    x = np.asarray(features.vectors[features.row_of(a)], dtype=np.float64)
    y = np.asarray(features.vectors[features.row_of(b)], dtype=np.float64)
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        return math.nan
    return float(np.clip(x @ y / (nx * ny), -1.0, 1.0))
