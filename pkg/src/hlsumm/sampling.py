"""Forest Fire sampling of labeled graphs."""
from __future__ import annotations

from collections import deque

import numpy as np

from .taxonomy import HGSError, HeteroGraph


def ffs_sample(graph: HeteroGraph, target: int, p_forward: float = 0.7, seed: int = 0) -> HeteroGraph:
    """Burn from random seeds until ``target`` nodes are collected.

    Each burning node ignites a geometrically distributed number of its
    unburnt neighbours (mean ``p/(1-p)``); when the fire dies out a new
    random seed is lit. Returns the induced subgraph with labels, nodes in
    increasing original id (kept in ``.origin``).
    """
    if not 0.0 < p_forward < 1.0:
        raise HGSError("p_forward must lie in (0, 1)")
    if target < 1 or target > graph.n:
        raise HGSError(f"target must lie in [1, {graph.n}]")
    rng = np.random.default_rng(seed)
    burnt = np.zeros(graph.n, dtype=bool)
    taken = 0
    indptr, indices = graph.adj.indptr, graph.adj.indices
    order = rng.permutation(graph.n)
    cursor = 0
    while taken < target:
        while burnt[order[cursor]]:
            cursor += 1
        start = int(order[cursor])
        burnt[start] = True
        taken += 1
        queue = deque([start])
        while queue and taken < target:
            v = queue.popleft()
            nbr = indices[indptr[v] : indptr[v + 1]]
            nbr = nbr[~burnt[nbr]]
            if len(nbr) == 0:
                continue
            x = int(rng.geometric(1.0 - p_forward)) - 1
            if x == 0:
                continue
            picked = rng.choice(nbr, size=min(x, len(nbr), target - taken), replace=False)
            burnt[picked] = True
            taken += len(picked)
            queue.extend(int(w) for w in picked)
    return graph.subgraph(np.flatnonzero(burnt))
