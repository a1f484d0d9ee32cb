"""Hierarchical label taxonomy and the labeled, undirected simple graph."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

LabelPath = tuple[str, ...]


class HGSError(Exception):
    """Base class for input and contract errors raised by this package."""


class TaxonomyError(HGSError):
    pass


def as_path(path: str | Sequence[str]) -> LabelPath:
    if isinstance(path, str):
        parts = tuple(p for p in path.strip().split("/"))
    else:
        parts = tuple(path)
    if not parts or any(not p for p in parts):
        raise TaxonomyError(f"malformed label path {path!r}")
    return parts


@dataclass
class LabelNode:
    name: str
    children: list["LabelNode"] = field(default_factory=list)


class LabelTaxonomy:
    """Rooted forest of label names.

    Every distinct path prefix gets an integer id. Sibling counts include
    labels no node uses, so the taxonomy must be given in full.
    """

    def __init__(self, paths: Iterable[str | Sequence[str]]):
        self._ids: dict[LabelPath, int] = {}
        self._paths: list[LabelPath] = []
        self._parent: list[int] = []
        children: dict[int, list[int]] = {-1: []}
        for raw in paths:
            path = as_path(raw)
            for d in range(1, len(path) + 1):
                prefix = path[:d]
                if prefix in self._ids:
                    continue
                tid = len(self._paths)
                parent = self._ids[prefix[:-1]] if d > 1 else -1
                self._ids[prefix] = tid
                self._paths.append(prefix)
                self._parent.append(parent)
                children.setdefault(parent, []).append(tid)
                children[tid] = []
        if not self._paths:
            raise TaxonomyError("taxonomy has no labels")
        self._children = children
        self.sibling_counts = np.array(
            [len(children[p]) for p in self._parent], dtype=np.int64
        )
        self.depth = max(len(p) for p in self._paths)

    @property
    def h(self) -> int:
        return self.depth

    @property
    def root_count(self) -> int:
        return len(self._children[-1])

    @property
    def paths(self) -> list[LabelPath]:
        """All label paths (every prefix), in definition order."""
        return list(self._paths)

    def leaf_paths(self) -> list[LabelPath]:
        return [p for i, p in enumerate(self._paths) if not self._children[i]]

    def roots(self) -> list[LabelNode]:
        def build(tid: int) -> LabelNode:
            return LabelNode(self._paths[tid][-1], [build(c) for c in self._children[tid]])

        return [build(r) for r in self._children[-1]]

    def label_id(self, path: str | Sequence[str]) -> int:
        p = as_path(path)
        try:
            return self._ids[p]
        except KeyError:
            raise TaxonomyError(f"unknown label path {'/'.join(p)!r}") from None

    def path_of(self, label_id: int) -> LabelPath:
        return self._paths[label_id]

    def parent_of(self, label_id: int) -> int:
        return self._parent[label_id]

    def children_of(self, path: str | Sequence[str] | None = None) -> list[LabelPath]:
        tid = -1 if path is None else self.label_id(path)
        return [self._paths[c] for c in self._children[tid]]

    def __contains__(self, path) -> bool:
        try:
            return as_path(path) in self._ids
        except TaxonomyError:
            return False

    def __len__(self) -> int:
        return len(self._paths)

    def to_lines(self) -> list[str]:
        """One slash-joined line per leaf; parsing them rebuilds this taxonomy."""
        return ["/".join(p) for p in self.leaf_paths()]


def sibling_count(taxonomy: LabelTaxonomy, path_prefix: str | Sequence[str], level: int) -> int:
    """Number of labels sharing a parent with the level-``level`` segment."""
    path = as_path(path_prefix)
    if level < 1 or level > len(path):
        raise TaxonomyError(f"level {level} out of range for path {'/'.join(path)!r}")
    return int(taxonomy.sibling_counts[taxonomy.label_id(path[:level])])


class HeteroGraph:
    """Undirected simple graph whose nodes carry taxonomy label paths.

    Nodes are dense ids ``0..n-1``. Edges are stored once as ``(u, v)`` with
    ``u < v``, sorted. The graph is treated as immutable after construction.
    """

    def __init__(
        self,
        taxonomy: LabelTaxonomy,
        labels: Sequence[str | Sequence[str]],
        edges: Iterable[tuple[int, int]] | np.ndarray = (),
    ):
        self.taxonomy = taxonomy
        self.n = len(labels)
        self.labels: list[LabelPath] = [as_path(p) for p in labels]
        h = taxonomy.h
        ids = np.full((self.n, h), -1, dtype=np.int64)
        cache: dict[LabelPath, list[int]] = {}
        for v, path in enumerate(self.labels):
            row = cache.get(path)
            if row is None:
                taxonomy.label_id(path)
                row = [taxonomy.label_id(path[:d]) for d in range(1, len(path) + 1)]
                cache[path] = row
            ids[v, : len(row)] = row
        #: taxonomy id of each node's level-k label (column k-1); -1 past its depth
        self.label_ids = ids
        sib = np.ones((self.n, h), dtype=np.int64)
        present = ids >= 0
        sib[present] = taxonomy.sibling_counts[ids[present]]
        #: log2 of the sibling count per node and level; 0 past a node's depth
        self.log_sibling = np.log2(sib.astype(np.float64))
        self.depths = present.sum(axis=1)

        e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        e = e.reshape(-1, 2)
        if len(e):
            if e.min() < 0 or e.max() >= self.n:
                raise HGSError("edge endpoint out of range")
            if np.any(e[:, 0] == e[:, 1]):
                raise HGSError("self-loops are not allowed")
        lo = np.minimum(e[:, 0], e[:, 1])
        hi = np.maximum(e[:, 0], e[:, 1])
        keys = np.unique(lo * self.n + hi)
        #: number of duplicate or reversed edges dropped at construction
        self.duplicate_edges = len(e) - len(keys)
        self.edge_keys = keys
        self.edges = np.stack([keys // max(self.n, 1), keys % max(self.n, 1)], axis=1)
        self.m = len(keys)
        rows = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        cols = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        self.adj = sp.csr_matrix(
            (np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(self.n, self.n)
        )
        self.adj.sort_indices()
        self.degrees = np.diff(self.adj.indptr)
        #: original node ids when this graph was cut out of a larger one
        self.origin: np.ndarray | None = None

    def neighbors(self, v: int) -> np.ndarray:
        return self.adj.indices[self.adj.indptr[v] : self.adj.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        a, b = (u, v) if u < v else (v, u)
        key = a * self.n + b
        i = np.searchsorted(self.edge_keys, key)
        return bool(i < self.m and self.edge_keys[i] == key)

    def edge_mask(self, keys: np.ndarray) -> np.ndarray:
        """Boolean mask of which upper-triangular cell keys are edges."""
        if self.m == 0 or len(keys) == 0:
            return np.zeros(len(keys), dtype=bool)
        idx = np.searchsorted(self.edge_keys, keys)
        idx[idx >= self.m] = self.m - 1
        return self.edge_keys[idx] == keys

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.edges}

    def label_at_level(self, node: int, level: int) -> str | None:
        if node < 0 or node >= self.n:
            raise HGSError(f"unknown node {node}")
        path = self.labels[node]
        return path[level - 1] if 1 <= level <= len(path) else None

    def local_edges(self, nodes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Induced edges of sorted distinct ``nodes`` as local index pairs ``(i, j)``, i < j."""
        nodes = np.asarray(nodes, dtype=np.int64)
        if len(nodes) < 2:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty
        starts = self.adj.indptr[nodes]
        lens = self.adj.indptr[nodes + 1] - starts
        total = int(lens.sum())
        src = np.repeat(np.arange(len(nodes), dtype=np.int64), lens)
        offs = np.repeat(starts - np.concatenate(([0], np.cumsum(lens)[:-1])), lens)
        nbr = self.adj.indices[offs + np.arange(total, dtype=np.int64)]
        pos = np.searchsorted(nodes, nbr)
        pos[pos >= len(nodes)] = 0
        keep = (nodes[pos] == nbr) & (src < pos)
        return src[keep], pos[keep]

    def induced(self, nodes: Sequence[int]) -> sp.csr_matrix:
        """Symmetric adjacency of the induced subgraph, in the given node order."""
        idx = np.asarray(nodes, dtype=np.int64)
        order = np.argsort(idx, kind="stable")
        lu, lv = self.local_edges(idx[order])
        lu, lv = order[lu], order[lv]
        k = len(idx)
        return sp.csr_matrix(
            (np.ones(2 * len(lu), dtype=np.int8), (np.concatenate([lu, lv]), np.concatenate([lv, lu]))),
            shape=(k, k),
        )

    def subgraph(self, nodes: Sequence[int]) -> "HeteroGraph":
        """Induced subgraph, relabelled to ``0..len(nodes)-1`` in the given order."""
        idx = np.asarray(nodes, dtype=np.int64)
        sub = sp.triu(self.induced(idx), k=1).tocoo()
        g = HeteroGraph(
            self.taxonomy,
            [self.labels[i] for i in idx],
            np.stack([sub.row, sub.col], axis=1),
        )
        g.origin = idx
        return g

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, HeteroGraph)
            and self.labels == other.labels
            and np.array_equal(self.edge_keys, other.edge_keys)
        )

    def __repr__(self) -> str:
        return f"HeteroGraph(n={self.n}, m={self.m}, h={self.taxonomy.h})"


def label_at_level(graph: HeteroGraph, node: int, level: int) -> str | None:
    return graph.label_at_level(node, level)


# Label hierarchy of the online-game graph used as the reference workload:
# four entity types, character play-styles and jobs, dungeon tiers, item slots.
BNS_TAXONOMY_PATHS = [
    "account",
    "character/dealer/force master",
    "character/dealer/destroyer",
    "character/dealer/summoner",
    "character/dealer/blade dancer",
    "character/dealer/zen archer",
    "character/tanker/blade master",
    "character/tanker/kung fu master",
    "character/tanker/warden",
    "character/buffer/assassin",
    "character/buffer/warlock",
    "character/buffer/soul fighter",
    "dungeon/normal",
    "dungeon/advanced",
    "dungeon/others",
    "equipment/weapon",
    "equipment/soul shield",
    "equipment/ring",
    "equipment/bracelet",
    "equipment/earring",
    "equipment/belt",
    "equipment/necklace",
    "equipment/soul",
    "equipment/heart",
    "equipment/pet",
    "equipment/glove",
    "equipment/soul badge",
    "equipment/mystic badge",
    "equipment/talisman",
]

# Node count per leaf label in the reference graph.
BNS_NODE_COUNTS = {
    "account": 83970,
    "character/dealer/force master": 19147,
    "character/dealer/destroyer": 23327,
    "character/dealer/summoner": 6266,
    "character/dealer/blade dancer": 5822,
    "character/dealer/zen archer": 11023,
    "character/tanker/blade master": 11854,
    "character/tanker/kung fu master": 17845,
    "character/tanker/warden": 6689,
    "character/buffer/assassin": 18460,
    "character/buffer/warlock": 15868,
    "character/buffer/soul fighter": 18249,
    "dungeon/normal": 154,
    "dungeon/advanced": 12,
    "dungeon/others": 133,
    "equipment/weapon": 3219,
    "equipment/soul shield": 3400,
    "equipment/ring": 431,
    "equipment/bracelet": 398,
    "equipment/earring": 455,
    "equipment/belt": 95,
    "equipment/necklace": 430,
    "equipment/soul": 171,
    "equipment/heart": 47,
    "equipment/pet": 269,
    "equipment/glove": 26,
    "equipment/soul badge": 927,
    "equipment/mystic badge": 739,
    "equipment/talisman": 29,
}

# Edge count between level-1 labels in the reference graph.
BNS_EDGE_BLOCKS = {
    ("account", "account"): 229338,
    ("account", "character"): 154550,
    ("character", "dungeon"): 2680520,
    ("character", "equipment"): 4821079,
}


def bns_taxonomy() -> LabelTaxonomy:
    return LabelTaxonomy(BNS_TAXONOMY_PATHS)
