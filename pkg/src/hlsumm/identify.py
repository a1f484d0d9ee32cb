"""Encode each candidate subgraph as every vocabulary type and keep the cheapest."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .decompose import fabp_sides
from .encoding import KIND_ORDER, MIN_NODES, LocalScorer, Structure
from .taxonomy import HeteroGraph


class LocalView:
    """A candidate subgraph in local coordinates, built once and shared by all encoders."""

    def __init__(self, graph: HeteroGraph, nodes):
        self.graph = graph
        self.nodes = np.unique(np.asarray(nodes, dtype=np.int64))
        k = len(self.nodes)
        self.lu, self.lv = graph.local_edges(self.nodes)
        rows = np.concatenate([self.lu, self.lv])
        cols = np.concatenate([self.lv, self.lu])
        order = np.lexsort((cols, rows))
        indptr = np.concatenate(([0], np.cumsum(np.bincount(rows, minlength=k))))
        self.adj = sp.csr_matrix((np.ones(len(rows), dtype=np.int8), cols[order], indptr), shape=(k, k))
        self.degrees = np.diff(self.adj.indptr)
        self.scorer = LocalScorer(graph, self.nodes, (self.lu, self.lv))

    def __len__(self) -> int:
        return len(self.nodes)


def _view(graph, nodes) -> LocalView:
    return nodes if isinstance(nodes, LocalView) else LocalView(graph, nodes)


def encode_as_star(graph: HeteroGraph, nodes) -> Structure | None:
    v = _view(graph, nodes)
    if len(v) < MIN_NODES["st"]:
        return None
    hub = int(np.argmax(v.degrees))
    return Structure.star(v.nodes[hub], np.delete(v.nodes, hub))


def encode_as_clique(graph: HeteroGraph, nodes) -> tuple[Structure | None, Structure | None]:
    v = _view(graph, nodes)
    fc = Structure.clique(v.nodes) if len(v) >= MIN_NODES["fc"] else None
    nc = v.scorer.with_counts(Structure.clique(v.nodes, near=True)) if len(v) >= MIN_NODES["nc"] else None
    return fc, nc


def encode_as_bipartite(graph: HeteroGraph, nodes) -> tuple[Structure | None, Structure | None]:
    v = _view(graph, nodes)
    if len(v) < MIN_NODES["bc"]:
        return None, None
    side_a = fabp_sides(v.adj)
    a, b = v.nodes[side_a], v.nodes[~side_a]
    if len(a) == 0 or len(b) == 0:
        return None, None
    return Structure.bipartite(a, b), v.scorer.with_counts(Structure.bipartite(a, b, near=True))


SMALL_BFS = 512


def _bfs(indptr: np.ndarray, indices: np.ndarray, source: int, alive: np.ndarray | None = None):
    """Hop distances (-1 if unreachable) and BFS-tree predecessors from ``source``.

    A node's predecessor is the earliest-discovered frontier node adjacent to it.
    """
    k = len(indptr) - 1
    if k <= SMALL_BFS:
        return _bfs_small(indptr, indices, source, alive)
    dist = np.full(k, -1, dtype=np.int64)
    pred = np.full(k, -1, dtype=np.int64)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    d = 0
    while len(frontier):
        d += 1
        starts = indptr[frontier]
        lens = indptr[frontier + 1] - starts
        src = np.repeat(frontier, lens)
        offs = np.repeat(starts - np.concatenate(([0], np.cumsum(lens)[:-1])), lens)
        nbr = indices[offs + np.arange(int(lens.sum()))]
        ok = dist[nbr] < 0
        if alive is not None:
            ok &= alive[nbr]
        nbr, first = np.unique(nbr[ok], return_index=True)
        dist[nbr] = d
        pred[nbr] = src[ok][first]
        frontier = nbr
    return dist, pred


def _bfs_small(indptr, indices, source, alive):
    # same visiting order as the vectorised version, without numpy call overhead
    k = len(indptr) - 1
    ptr, idx = indptr.tolist(), indices.tolist()
    ok = [True] * k if alive is None else alive.tolist()
    dist = [-1] * k
    pred = [-1] * k
    dist[source] = 0
    frontier = [source]
    d = 0
    while frontier:
        d += 1
        found = []
        for u in frontier:
            for w in idx[ptr[u] : ptr[u + 1]]:
                if dist[w] < 0 and ok[w]:
                    dist[w] = d
                    pred[w] = u
                    found.append(w)
        frontier = sorted(found)
    return np.array(dist, dtype=np.int64), np.array(pred, dtype=np.int64)


def _farthest(dist: np.ndarray) -> int:
    return int(np.argmax(dist))


def _path(pred: np.ndarray, source: int, target: int) -> list[int]:
    path = [target]
    while path[-1] != source:
        path.append(int(pred[path[-1]]))
    return path[::-1]


def encode_as_chain(graph: HeteroGraph, nodes, rng: np.random.Generator | None = None) -> Structure | None:
    """Double-sweep BFS for a long shortest path, then extend both ends."""
    v = _view(graph, nodes)
    if len(v) < MIN_NODES["ch"]:
        return None
    rng = rng or np.random.default_rng(0)
    indptr, indices = v.adj.indptr, v.adj.indices
    start = int(rng.integers(len(v)))
    dist, _ = _bfs(indptr, indices, start)
    if np.any(dist < 0):
        return None
    n_s = _farthest(dist)
    dist, pred = _bfs(indptr, indices, n_s)
    n_e = _farthest(dist)
    chain = _path(pred, n_s, n_e)

    for end in ("tail", "head"):
        anchor = chain[-1] if end == "tail" else chain[0]
        alive = np.ones(len(v), dtype=bool)
        alive[chain] = False
        alive[anchor] = True
        dist, pred = _bfs(indptr, indices, anchor, alive)
        far = _farthest(dist)
        ext = _path(pred, anchor, far)[1:]
        chain = chain + ext if end == "tail" else ext[::-1] + chain
    if len(chain) < MIN_NODES["ch"]:
        return None
    return Structure.chain(v.nodes[chain])


def all_encodings(graph: HeteroGraph, nodes, rng: np.random.Generator | None = None) -> list[Structure]:
    v = _view(graph, nodes)
    st = encode_as_star(graph, v)
    fc, nc = encode_as_clique(graph, v)
    bc, nb = encode_as_bipartite(graph, v)
    ch = encode_as_chain(graph, v, rng)
    return [s for s in (st, fc, nc, bc, nb, ch) if s is not None]


def best_structure(
    graph: HeteroGraph, nodes, rng: np.random.Generator | None = None
) -> tuple[Structure, float] | None:
    """Cheapest encoding of the subgraph by local cost; ties go to the earlier type."""
    v = _view(graph, nodes)
    best = None
    for s in all_encodings(graph, v, rng):
        cost = v.scorer.cost([s])
        rank = (cost, KIND_ORDER[s.kind])
        if best is None or rank < best[0]:
            best = (rank, s)
    if best is None:
        return None
    return best[1], best[0][0]
