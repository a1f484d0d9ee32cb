"""Synthetic labeled graphs: planted vocabulary structures and a game-graph preset."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .taxonomy import (
    BNS_EDGE_BLOCKS,
    BNS_NODE_COUNTS,
    BNS_TAXONOMY_PATHS,
    HGSError,
    HeteroGraph,
    LabelTaxonomy,
)

PLANTABLE = ("st", "fc", "nc", "bc", "nb", "ch")
LABEL_MODES = ("consistent", "role", "random")

# Edge total of the reference graph; the preset scales every block to a budget.
BNS_TOTAL_EDGES = sum(BNS_EDGE_BLOCKS.values())
BNS_DEFAULT_EDGES = 2_500_000


@dataclass
class PlantSpec:
    kind: str
    count: int
    size_range: tuple[int, int] = (5, 30)
    labels: str = "consistent"
    missing: float = 0.1  # fraction of pattern cells left out of near structures

    def __post_init__(self):
        if self.kind not in PLANTABLE:
            raise HGSError(f"cannot plant {self.kind!r}")
        if self.labels not in LABEL_MODES:
            raise HGSError(f"unknown label mode {self.labels!r}")
        lo, hi = self.size_range
        if self.count < 0 or lo < 4 or hi < lo:
            raise HGSError(f"infeasible plant spec {self}")


@dataclass
class GeneratorConfig:
    taxonomy: list[str] = field(default_factory=lambda: list(BNS_TAXONOMY_PATHS))
    background: dict[str, int] = field(default_factory=dict)
    plants: list[PlantSpec] = field(default_factory=list)
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.noise < 1.0:
            raise HGSError("noise fraction must lie in [0, 1)")
        if any(c < 0 for c in self.background.values()):
            raise HGSError("background node counts must be non-negative")


@dataclass
class PlantedStructure:
    kind: str
    parts: list[list[int]]

    @property
    def nodes(self) -> list[int]:
        return sorted(v for p in self.parts for v in p)


def _plant(kind: str, size: int, first: int, rng: np.random.Generator, missing: float):
    ids = list(range(first, first + size))
    if kind == "st":
        parts = [[ids[0]], ids[1:]]
        edges = [(ids[0], v) for v in ids[1:]]
    elif kind in ("fc", "nc"):
        parts = [ids]
        edges = [(a, b) for i, a in enumerate(ids) for b in ids[i + 1 :]]
    elif kind in ("bc", "nb"):
        a = int(rng.integers(2, size - 1))
        parts = [ids[:a], ids[a:]]
        edges = [(u, v) for u in ids[:a] for v in ids[a:]]
    else:
        parts = [ids]
        edges = list(zip(ids[:-1], ids[1:]))
    if kind in ("nc", "nb"):
        drop = max(1, int(round(missing * len(edges))))
        keep = np.sort(rng.choice(len(edges), size=len(edges) - drop, replace=False))
        edges = [edges[i] for i in keep]
    return parts, edges


def generate_synthetic(cfg: GeneratorConfig) -> tuple[HeteroGraph, LabelTaxonomy, list[PlantedStructure]]:
    """Plant structures on fresh nodes, add background nodes and noise edges.

    Node ids are shuffled so that planted structures do not occupy
    contiguous id ranges. Deterministic for a given config.
    """
    rng = np.random.default_rng(cfg.seed)
    taxonomy = LabelTaxonomy(cfg.taxonomy)
    leaves = ["/".join(p) for p in taxonomy.leaf_paths()]
    labels: list[str] = []
    edges: list[tuple[int, int]] = []
    planted: list[PlantedStructure] = []
    for spec in cfg.plants:
        for _ in range(spec.count):
            size = int(rng.integers(spec.size_range[0], spec.size_range[1] + 1))
            first = len(labels)
            parts, e = _plant(spec.kind, size, first, rng, spec.missing)
            if spec.labels == "random":
                labels += [leaves[i] for i in rng.integers(len(leaves), size=size)]
            elif spec.labels == "role" and len(parts) == 2:
                a, b = rng.choice(len(leaves), size=2, replace=len(leaves) < 2)
                labels += [leaves[a]] * len(parts[0]) + [leaves[b]] * len(parts[1])
            else:
                labels += [leaves[int(rng.integers(len(leaves)))]] * size
            edges += e
            planted.append(PlantedStructure(spec.kind, parts))
    for path, count in cfg.background.items():
        if path not in taxonomy:
            raise HGSError(f"background label {path!r} not in taxonomy")
        labels += [path] * count
    n = len(labels)
    if n == 0:
        raise HGSError("configuration generates no nodes")

    existing = {(min(u, v), max(u, v)) for u, v in edges}
    want = int(round(cfg.noise * len(edges)))
    if want > n * (n - 1) // 2 - len(existing):
        raise HGSError("not enough free node pairs for the requested noise")
    noise = set()
    while len(noise) < want:
        u, v = (int(x) for x in rng.integers(n, size=2))
        if u == v:
            continue
        e = (min(u, v), max(u, v))
        if e not in existing:
            noise.add(e)
    edges += sorted(noise)

    perm = rng.permutation(n)
    new_labels = [""] * n
    for old, new in enumerate(perm):
        new_labels[new] = labels[old]
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    graph = HeteroGraph(taxonomy, new_labels, perm[e] if len(e) else e)
    for p in planted:
        p.parts = [sorted(int(perm[v]) for v in part) for part in p.parts]
    return graph, taxonomy, planted


def planted_config(
    per_kind: int = 5,
    kinds=("st", "fc", "bc", "ch"),
    size_range=(5, 30),
    noise: float = 0.01,
    labels: str = "consistent",
    seed: int = 0,
    background: dict[str, int] | None = None,
) -> GeneratorConfig:
    return GeneratorConfig(
        plants=[PlantSpec(k, per_kind, tuple(size_range), labels) for k in kinds],
        noise=noise,
        seed=seed,
        background=dict(background or {}),
    )


def _heavy_tail(rng: np.random.Generator, count: int, alpha: float) -> np.ndarray:
    w = rng.pareto(alpha, size=count) + 1.0
    return w / w.sum()


def _draw_pairs(rng, left, right, wl, wr, count, seen_keys, n):
    """Draw ``count`` new distinct edges between two node pools."""
    out = []
    need = count
    for _ in range(20):
        if need <= 0:
            break
        draw = int(need * 1.15) + 16
        u = left[rng.choice(len(left), size=draw, p=wl)]
        v = right[rng.choice(len(right), size=draw, p=wr)]
        ok = u != v
        lo, hi = np.minimum(u[ok], v[ok]), np.maximum(u[ok], v[ok])
        keys = np.unique(lo * n + hi)
        keys = keys[~np.isin(keys, seen_keys)]
        keys = rng.permutation(keys)[:need]
        out.append(keys)
        seen_keys = np.union1d(seen_keys, keys)
        need -= len(keys)
    return np.concatenate(out) if out else np.zeros(0, np.int64), seen_keys


def generate_bns_like(
    edges: int = BNS_DEFAULT_EDGES, node_scale: float = 1.0, seed: int = 0
) -> HeteroGraph:
    """Game-graph preset: the reference label mix and level-1 edge blocks.

    Node counts per label follow the reference table (times ``node_scale``);
    the four edge blocks keep their relative sizes and sum to ``edges``.
    Item and dungeon popularity is heavy-tailed; characters have a modal
    degree; the account friendship block is heavy-tailed on both ends.
    """
    rng = np.random.default_rng(seed)
    taxonomy = LabelTaxonomy(BNS_TAXONOMY_PATHS)
    labels: list[str] = []
    pools: dict[str, list[int]] = {}
    for path in BNS_TAXONOMY_PATHS:
        count = max(1, int(round(BNS_NODE_COUNTS[path] * node_scale)))
        start = len(labels)
        labels += [path] * count
        pools.setdefault(path.split("/")[0], []).extend(range(start, start + count))
    n = len(labels)
    pool = {k: np.asarray(v, dtype=np.int64) for k, v in pools.items()}
    weights = {
        "account": _heavy_tail(rng, len(pool["account"]), 1.2),
        "character": rng.gamma(6.0, 1.0, size=len(pool["character"])),
        "dungeon": _heavy_tail(rng, len(pool["dungeon"]), 0.9),
        "equipment": _heavy_tail(rng, len(pool["equipment"]), 0.9),
    }
    weights["character"] /= weights["character"].sum()
    scale = edges / BNS_TOTAL_EDGES
    seen = np.zeros(0, dtype=np.int64)
    keys = []
    for (a, b), count in BNS_EDGE_BLOCKS.items():
        target = int(round(count * scale))
        if a == b == "account":
            k, seen = _draw_pairs(rng, pool[a], pool[b], weights[a], weights[b], target, seen, n)
        elif a == "account":
            uniform = np.full(len(pool[b]), 1.0 / len(pool[b]))
            k, seen = _draw_pairs(rng, pool[a], pool[b], weights[a], uniform, target, seen, n)
        else:
            k, seen = _draw_pairs(rng, pool[a], pool[b], weights[a], weights[b], target, seen, n)
        keys.append(k)
    allk = np.sort(np.concatenate(keys))
    return HeteroGraph(taxonomy, labels, np.stack([allk // n, allk % n], axis=1))
