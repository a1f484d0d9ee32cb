"""Candidate subgraph generation by hub removal, plus the bipartite role splitter."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .taxonomy import HGSError, HeteroGraph

EGONET = "hub-egonet"
SATELLITE = "satellite-component"
TERMINAL = "terminal-gcc"


@dataclass(frozen=True)
class DecomposeConfig:
    hubs_per_iter: int = 1
    gcc_stop_threshold: int = 1
    max_iters: int | None = None
    min_subgraph_nodes: int = 3

    def __post_init__(self):
        for name in ("hubs_per_iter", "gcc_stop_threshold", "min_subgraph_nodes"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")

    @classmethod
    def for_graph(cls, n: int, **overrides) -> "DecomposeConfig":
        k = max(1, math.ceil(0.005 * n))
        params = {"hubs_per_iter": k, "gcc_stop_threshold": k}
        params.update({key: v for key, v in overrides.items() if v is not None})
        return cls(**params)


@dataclass(frozen=True)
class CandidateSubgraph:
    nodes: np.ndarray  # sorted global ids
    origin: str
    index: int = 0

    def __len__(self) -> int:
        return len(self.nodes)


class Decomposer(Protocol):
    def __call__(self, graph: HeteroGraph, cfg: DecomposeConfig, seed: int) -> list[CandidateSubgraph]: ...


def _components(sub: sp.csr_matrix) -> tuple[int, np.ndarray]:
    return connected_components(sub, directed=False)


def slashburn_decompose(
    graph: HeteroGraph, cfg: DecomposeConfig | None = None, seed: int = 0
) -> list[CandidateSubgraph]:
    """Shatter the graph by repeatedly removing its top-degree hubs.

    Each removed hub contributes its egonet in the graph as it stands at
    removal time; every component split off from the giant component is a
    candidate as well. A component only counts as giant when it is strictly
    the largest one; on a tie every component is emitted and burning stops.
    ``seed`` is accepted for interface compatibility; the schedule is fully
    determined by degree-then-id ordering.
    """
    if graph.n == 0:
        raise HGSError("cannot decompose an empty graph")
    cfg = cfg or DecomposeConfig.for_graph(graph.n)
    min_nodes = cfg.min_subgraph_nodes
    out: list[CandidateSubgraph] = []

    def emit(nodes: np.ndarray, origin: str) -> None:
        if len(nodes) >= min_nodes:
            out.append(CandidateSubgraph(np.sort(nodes), origin, len(out)))

    def split(cur: np.ndarray, sub: sp.csr_matrix) -> np.ndarray | None:
        """Emit satellites; return the giant component's positions in ``cur``."""
        ncomp, lab = _components(sub)
        sizes = np.bincount(lab, minlength=ncomp)
        top = sizes.max()
        if ncomp > 1 and (sizes == top).sum() > 1:
            order = np.argsort(lab, kind="stable")
            bounds = np.cumsum(sizes)[:-1]
            for comp in np.split(order, bounds):
                emit(cur[comp], SATELLITE)
            return None
        giant = int(np.argmax(sizes))
        if ncomp > 1:
            order = np.argsort(lab, kind="stable")
            bounds = np.cumsum(sizes)[:-1]
            for c, comp in enumerate(np.split(order, bounds)):
                if c != giant:
                    emit(cur[comp], SATELLITE)
        return np.flatnonzero(lab == giant)

    cur = np.arange(graph.n, dtype=np.int64)
    sub = graph.adj
    keep = split(cur, sub)
    if keep is None:
        return out
    cur, sub = cur[keep], sub[keep][:, keep]
    it = 0
    while len(cur) > cfg.gcc_stop_threshold and (cfg.max_iters is None or it < cfg.max_iters):
        it += 1
        deg = np.diff(sub.indptr)
        k = min(cfg.hubs_per_iter, len(cur))
        # cur is sorted, so a stable sort on -degree breaks ties by node id
        hubs = np.argsort(-deg, kind="stable")[:k]
        removed = np.zeros(len(cur), dtype=bool)
        for hpos in hubs:
            nbr = sub.indices[sub.indptr[hpos] : sub.indptr[hpos + 1]]
            nbr = nbr[~removed[nbr]]
            removed[hpos] = True
            emit(np.concatenate(([cur[hpos]], cur[nbr])), EGONET)
        rest = np.flatnonzero(~removed)
        if len(rest) == 0:
            cur = rest
            break
        cur, sub = cur[rest], sub[rest][:, rest]
        keep = split(cur, sub)
        if keep is None:
            cur = cur[:0]
            break
        cur, sub = cur[keep], sub[keep][:, keep]
    if len(cur):
        emit(cur, TERMINAL)
    return out


def fabp_bipartite_split(
    graph: HeteroGraph,
    nodes,
    weight: float = -0.1,
    damping: float = 0.5,
    tol: float = 1e-4,
    max_iter: int = 20,
) -> tuple[np.ndarray, np.ndarray]:
    """Split a connected subgraph into two sides by heterophilic propagation.

    The highest-degree node (smallest id on ties) seeds side A and its
    neighbours seed side B. Beliefs are rescaled to unit max-norm each round
    so that large cores, whose propagation operator has spectral radius
    above one, still settle on the sign pattern of the bipartition.
    """
    nodes = np.sort(np.asarray(nodes, dtype=np.int64))
    if len(nodes) == 0:
        raise HGSError("cannot split an empty subgraph")
    side_a = fabp_sides(graph.induced(nodes), weight, damping, tol, max_iter)
    return nodes[side_a], nodes[~side_a]


def fabp_sides(sub, weight=-0.1, damping=0.5, tol=1e-4, max_iter=20) -> np.ndarray:
    """Boolean side-A mask for a symmetric adjacency matrix (see :func:`fabp_bipartite_split`)."""
    sub = sub.astype(np.float64)
    deg = np.diff(sub.indptr)
    seed = int(np.argmax(deg))
    prior = np.zeros(sub.shape[0])
    prior[sub.indices[sub.indptr[seed] : sub.indptr[seed + 1]]] = -1.0
    prior[seed] = 1.0
    belief = prior.copy()
    for _ in range(max_iter):
        new = damping * belief + (1 - damping) * (prior + weight * (sub @ belief))
        scale = np.abs(new).max()
        if scale > 0:
            new /= scale
        delta = np.abs(new - belief).max()
        belief = new
        if delta < tol:
            break
    return belief > 0
