"""Description-length bookkeeping: structure, label, error and model costs."""
from __future__ import annotations

import math
from functools import cached_property
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .mdl import (
    log2_binomial,
    log2_or_zero,
    prefix_code_cost,
    universal_int_code_len,
    weak_composition_code_len,
)
from .taxonomy import HGSError, HeteroGraph

KINDS = ("st", "fc", "nc", "bc", "nb", "ch")
KIND_ORDER = {k: i for i, k in enumerate(KINDS)}
NEAR_KINDS = frozenset({"nc", "nb"})
ROLE_KINDS = frozenset({"st", "bc", "nb"})
MIN_NODES = {"st": 3, "fc": 2, "nc": 3, "bc": 3, "nb": 3, "ch": 3}
N_TYPES = len(KINDS)


class StructureError(HGSError):
    pass


@dataclass(frozen=True)
class Structure:
    """One vocabulary element.

    ``parts`` holds the role-annotated node sets: ``(hub,), spokes`` for a
    star, ``(nodes,)`` for cliques, ``(A, B)`` for bipartite cores and the
    ordered sequence for a chain. Near variants additionally carry the count
    of present (``ones``) and absent (``zeros``) cells over the area they
    encode, and, once placed in a model, the exact present edges.
    """

    kind: str
    parts: tuple[tuple[int, ...], ...]
    ones: int | None = None
    zeros: int | None = None
    edges: tuple[tuple[int, int], ...] | None = None

    @staticmethod
    def star(hub: int, spokes: Iterable[int]) -> "Structure":
        return Structure("st", ((int(hub),), tuple(sorted(int(x) for x in spokes))))

    @staticmethod
    def clique(nodes: Iterable[int], near: bool = False) -> "Structure":
        return Structure("nc" if near else "fc", (tuple(sorted(int(x) for x in nodes)),))

    @staticmethod
    def bipartite(a: Iterable[int], b: Iterable[int], near: bool = False) -> "Structure":
        return Structure(
            "nb" if near else "bc",
            (tuple(sorted(int(x) for x in a)), tuple(sorted(int(x) for x in b))),
        )

    @staticmethod
    def chain(sequence: Iterable[int]) -> "Structure":
        return Structure("ch", (tuple(int(x) for x in sequence),))

    @property
    def hub(self) -> int:
        return self.parts[0][0]

    @cached_property
    def nodes(self) -> np.ndarray:
        """Sorted distinct node ids of the structure (read-only)."""
        out = np.unique(np.fromiter((v for p in self.parts for v in p), dtype=np.int64))
        out.setflags(write=False)
        return out

    @property
    def size(self) -> int:
        return sum(len(p) for p in self.parts)

    @property
    def near(self) -> bool:
        return self.kind in NEAR_KINDS

    def roles(self) -> tuple[np.ndarray, np.ndarray] | None:
        if self.kind not in ROLE_KINDS:
            return None
        return np.asarray(self.parts[0], dtype=np.int64), np.asarray(self.parts[1], dtype=np.int64)

    def validate(self) -> "Structure":
        k = self.kind
        if k not in KIND_ORDER:
            raise StructureError(f"unknown structure kind {k!r}")
        flat = [v for p in self.parts for v in p]
        if len(set(flat)) != len(flat):
            raise StructureError(f"{k}: repeated node")
        if k == "st":
            if len(self.parts) != 2 or len(self.parts[0]) != 1 or len(self.parts[1]) < 2:
                raise StructureError("star needs one hub and at least 2 spokes")
        elif k in ("bc", "nb"):
            if len(self.parts) != 2 or not self.parts[0] or not self.parts[1]:
                raise StructureError("bipartite core needs two non-empty sides")
        elif len(self.parts) != 1:
            raise StructureError(f"{k}: expected a single node list")
        if len(flat) < MIN_NODES[k]:
            raise StructureError(f"{k} needs at least {MIN_NODES[k]} nodes, got {len(flat)}")
        return self

    def cells(self, n: int) -> np.ndarray:
        """Upper-triangular cell keys ``u*n+v`` (u < v) of the structure's pattern."""
        if self.kind == "st":
            a = np.full(len(self.parts[1]), self.hub, dtype=np.int64)
            b = np.asarray(self.parts[1], dtype=np.int64)
        elif self.kind in ("fc", "nc"):
            v = np.asarray(self.parts[0], dtype=np.int64)
            iu, ju = np.triu_indices(len(v), k=1)
            a, b = v[iu], v[ju]
        elif self.kind in ("bc", "nb"):
            a0 = np.asarray(self.parts[0], dtype=np.int64)
            b0 = np.asarray(self.parts[1], dtype=np.int64)
            a = np.repeat(a0, len(b0))
            b = np.tile(b0, len(a0))
        else:
            seq = np.asarray(self.parts[0], dtype=np.int64)
            a, b = seq[:-1], seq[1:]
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        return lo * n + hi

    def cell_count(self) -> int:
        if self.kind == "st":
            return len(self.parts[1])
        if self.kind in ("fc", "nc"):
            k = len(self.parts[0])
            return k * (k - 1) // 2
        if self.kind in ("bc", "nb"):
            return len(self.parts[0]) * len(self.parts[1])
        return len(self.parts[0]) - 1

    def present_count(self, graph: HeteroGraph) -> int:
        """Number of pattern cells that are edges of ``graph``."""
        adj = graph.adj
        if self.kind == "st":
            row = graph.neighbors(self.hub)
            return int(np.isin(np.asarray(self.parts[1]), row, assume_unique=True).sum())
        if self.kind in ("fc", "nc"):
            return int(graph.induced(self.parts[0]).nnz // 2)
        if self.kind in ("bc", "nb"):
            a = np.asarray(self.parts[0], dtype=np.int64)
            b = np.asarray(self.parts[1], dtype=np.int64)
            return int(adj[a][:, b].nnz)
        return int(graph.edge_mask(self.cells(graph.n)).sum())

    def with_counts(self, graph: HeteroGraph) -> "Structure":
        """Near variants: record present/absent counts over the full pattern."""
        if not self.near:
            return self
        ones = self.present_count(graph)
        return replace(self, ones=ones, zeros=self.cell_count() - ones, edges=None)

    def key(self) -> tuple:
        return (self.kind, self.parts)


# ---------------------------------------------------------------- connectivity


def connectivity_cost(s: Structure, n_total: int) -> float:
    """Bits to transmit the connectivity of ``s`` in a graph of ``n_total`` nodes."""
    s.validate()
    n = n_total
    LN = universal_int_code_len
    if s.size > n:
        raise StructureError("structure larger than the graph")
    k = s.kind
    if k == "st":
        spokes = len(s.parts[1])
        return LN(spokes) + math.log2(n) + log2_binomial(n - 1, spokes)
    if k == "fc":
        return LN(s.size) + log2_binomial(n, s.size)
    if k == "bc":
        a, b = len(s.parts[0]), len(s.parts[1])
        return LN(a) + LN(b) + log2_binomial(n, a) + log2_binomial(n, b)
    if k == "ch":
        size = s.size
        return LN(size - 1) + math.fsum(math.log2(n - i) for i in range(size))
    if s.ones is None or s.zeros is None:
        raise StructureError(f"{k} needs observed edge counts")
    near = math.log2(s.ones) if s.ones > 0 else 0.0
    near += prefix_code_cost(s.ones, s.zeros)
    if k == "nc":
        return LN(s.size) + log2_binomial(n, s.size) + near
    a, b = len(s.parts[0]), len(s.parts[1])
    return LN(a) + LN(b) + log2_binomial(n, a) + log2_binomial(n, b) + near


# ---------------------------------------------------------------------- labels


def _level_ids(graph: HeteroGraph, nodes, k: int) -> np.ndarray:
    return graph.label_ids[np.asarray(nodes, dtype=np.int64), k - 1]


def _sibs(graph: HeteroGraph, label: int) -> int:
    return 1 if label < 0 else int(graph.taxonomy.sibling_counts[label])


def label_base_cost(s: Structure, graph: HeteroGraph, k: int) -> float:
    """Per-node codebook for level ``k``; nodes shallower than ``k`` are free."""
    return float(graph.log_sibling[s.nodes, k - 1].sum())


def is_consistent(s: Structure, graph: HeteroGraph, k: int) -> bool:
    ids = _level_ids(graph, s.nodes, k)
    return bool(np.all(ids == ids[0]))


def label_consistent_cost(s: Structure, graph: HeteroGraph, k: int) -> float:
    ids = _level_ids(graph, s.nodes, k)
    if not np.all(ids == ids[0]):
        raise StructureError(f"structure is not label-consistent at level {k}")
    return math.log2(_sibs(graph, int(ids[0])))


def _role_labels(s: Structure, graph: HeteroGraph, k: int) -> tuple[int, int] | None:
    roles = s.roles()
    if roles is None:
        return None
    first = _level_ids(graph, roles[0], k)
    second = _level_ids(graph, roles[1], k)
    if not (np.all(first == first[0]) and np.all(second == second[0])):
        return None
    if first[0] == second[0]:
        return None
    return int(first[0]), int(second[0])


def is_role_consistent(s: Structure, graph: HeteroGraph, k: int) -> bool:
    return _role_labels(s, graph, k) is not None


def label_role_consistent_cost(s: Structure, graph: HeteroGraph, k: int) -> float:
    """First role's label from its sibling set, then the second role's label.

    When both labels hang off the same parent the second codebook excludes
    the first role's label.
    """
    if s.kind not in ROLE_KINDS:
        raise StructureError(f"{s.kind} has no roles")
    pair = _role_labels(s, graph, k)
    if pair is None:
        raise StructureError(f"structure is not role-consistent at level {k}")
    return _role_pair_cost(graph, *pair)


def _uniform_prefix(ids: np.ndarray) -> np.ndarray:
    """Per level, whether every row of a (nodes x levels) id matrix agrees."""
    return np.all(ids == ids[0], axis=0)


def _levels(s: Structure, graph: HeteroGraph):
    h = graph.taxonomy.h
    ids = graph.label_ids[s.nodes]
    same = _uniform_prefix(ids)
    h1 = h if same.all() else int(np.argmin(same))
    h2 = h1
    pair_ids = None
    roles = s.roles()
    if roles is not None and h1 < h:
        first = graph.label_ids[roles[0]]
        second = graph.label_ids[roles[1]]
        ok = _uniform_prefix(first) & _uniform_prefix(second) & (first[0] != second[0])
        while h2 < h and ok[h2]:
            h2 += 1
        pair_ids = (first[0], second[0])
    return h1, h2, ids[0], pair_ids


def consistency_levels(s: Structure, graph: HeteroGraph) -> tuple[int, int]:
    h1, h2, _, _ = _levels(s, graph)
    return h1, h2


def _role_pair_cost(graph: HeteroGraph, a: int, b: int) -> float:
    tax = graph.taxonomy
    la, lb = _sibs(graph, a), _sibs(graph, b)
    same_parent = a >= 0 and b >= 0 and tax.parent_of(a) == tax.parent_of(b)
    return math.log2(la) + math.log2(lb - 1 if same_parent else lb)


def label_full_cost(s: Structure, graph: HeteroGraph) -> tuple[float, int, int]:
    """Hierarchical label cost of ``s`` with its consistency depths ``(h1, h2)``."""
    tax = graph.taxonomy
    h = tax.h
    h1, h2, shared, pair_ids = _levels(s, graph)
    terms = [weak_composition_code_len(s.size, tax.root_count)]
    terms += [math.log2(_sibs(graph, int(shared[i]))) for i in range(h1)]
    terms += [_role_pair_cost(graph, int(pair_ids[0][j]), int(pair_ids[1][j])) for j in range(h1, h2)]
    if h2 < h:
        terms.append(float(graph.log_sibling[s.nodes, h2:].sum()))
    terms.append(2 * math.log2(h))
    return math.fsum(terms), h1, h2


def labeling_error_cost(en: Sequence[int] | np.ndarray, graph: HeteroGraph) -> float:
    """Labels of nodes no structure covers, sent as one base-encoded group."""
    en = np.asarray(en, dtype=np.int64)
    if len(en) == 0:
        return 0.0
    return weak_composition_code_len(len(en), graph.taxonomy.root_count) + float(
        graph.log_sibling[en].sum()
    )


# ---------------------------------------------------------------------- errors


@dataclass
class ErrorState:
    """Cells the model gets wrong, plus the domains they are coded over.

    ``e_plus`` are modeled cells with no edge, ``e_minus`` edges outside every
    modeled area, ``en`` nodes covered by no structure. Keys are ``u*n+v``.
    """

    n: int
    e_plus: np.ndarray
    e_minus: np.ndarray
    en: np.ndarray
    plus_domain: int
    minus_domain: int

    def e_plus_edges(self) -> set[tuple[int, int]]:
        return {(int(k // self.n), int(k % self.n)) for k in self.e_plus}

    def e_minus_edges(self) -> set[tuple[int, int]]:
        return {(int(k // self.n), int(k % self.n)) for k in self.e_minus}


def error_channel_cost(ones: int, domain: int) -> float:
    """Number of 1s, then the 1s and 0s of the domain with a prefix code."""
    if ones > domain:
        raise ValueError("more errors than cells in the domain")
    return log2_or_zero(ones) + prefix_code_cost(ones, domain - ones)


def connectivity_error_cost(err: ErrorState) -> float:
    return error_channel_cost(len(err.e_plus), err.plus_domain) + error_channel_cost(
        len(err.e_minus), err.minus_domain
    )


# ---------------------------------------------------------------- local costs


class LocalScorer:
    """Scores sets of structures against one subgraph, caching per-structure terms.

    The structures scored together must not share pattern cells (true for a
    single structure and for every segmentation split). Nodes of the
    subgraph that no structure covers pay their base label cost.
    """

    def __init__(self, graph: HeteroGraph, sub_nodes, edges: tuple[np.ndarray, np.ndarray] | None = None):
        self.graph = graph
        self.sub_nodes = np.unique(np.asarray(sub_nodes, dtype=np.int64))
        k = len(self.sub_nodes)
        self.pairs = k * (k - 1) // 2
        # errors are counted inside the subgraph but coded with the whole graph's codebook
        self.all_pairs = graph.n * (graph.n - 1) // 2
        self.lu, self.lv = edges if edges is not None else graph.local_edges(self.sub_nodes)
        self.sub_edges = len(self.lu)
        self._cache: dict[tuple, tuple[float, int, int, bool]] = {}

    def _local(self, part) -> np.ndarray | None:
        arr = np.asarray(part, dtype=np.int64)
        pos = np.searchsorted(self.sub_nodes, arr)
        if len(arr) and (pos.max() >= len(self.sub_nodes) or np.any(self.sub_nodes[pos] != arr)):
            return None
        return pos

    def present(self, s: Structure) -> int:
        """Pattern cells of ``s`` that are edges, counted on the cached subgraph."""
        if s.kind == "ch":
            return int(self.graph.edge_mask(s.cells(self.graph.n)).sum())
        locs = [self._local(p) for p in s.parts]
        if any(p is None for p in locs):
            return s.present_count(self.graph)
        mark = np.zeros(len(self.sub_nodes), dtype=np.int8)
        lu, lv = self.lu, self.lv
        if s.kind in ("fc", "nc"):
            mark[locs[0]] = 1
            return int(np.count_nonzero(mark[lu] & mark[lv]))
        mark[locs[0]] = 1
        mark[locs[1]] = 2
        return int(np.count_nonzero(mark[lu] * mark[lv] == 2))

    def with_counts(self, s: Structure) -> Structure:
        if not s.near:
            return s
        ones = self.present(s)
        return replace(s, ones=ones, zeros=s.cell_count() - ones, edges=None)

    def terms(self, s: Structure) -> tuple[float, int, int, bool]:
        key = s.key()
        hit = self._cache.get(key)
        if hit is None:
            cells = s.cell_count()
            present = self.present(s)
            if s.near:
                s = replace(s, ones=present, zeros=cells - present)
            bits = connectivity_cost(s, self.graph.n) + label_full_cost(s, self.graph)[0]
            hit = (bits, cells, present, s.near)
            self._cache[key] = hit
        return hit

    def unmodeled(self) -> float:
        return error_channel_cost(self.sub_edges, self.all_pairs) + labeling_error_cost(self.sub_nodes, self.graph)

    def cost(self, structures: Sequence[Structure]) -> float:
        bits = []
        plus_domain = plus_ones = near_cells = covered_present = 0
        for s in structures:
            b, cells, present, near = self.terms(s)
            bits.append(b)
            if near:
                near_cells += cells
            else:
                plus_domain += cells
                plus_ones += cells - present
            covered_present += present
        bits.append(error_channel_cost(plus_ones, plus_domain))
        bits.append(
            error_channel_cost(self.sub_edges - covered_present, self.all_pairs - plus_domain - near_cells)
        )
        uncovered = self.sub_nodes
        if structures and len(uncovered):
            covered = np.concatenate([s.nodes for s in structures])
            pos = np.minimum(np.searchsorted(self.sub_nodes, covered), len(self.sub_nodes) - 1)
            hit = np.ones(len(self.sub_nodes), dtype=bool)
            hit[pos[self.sub_nodes[pos] == covered]] = False
            uncovered = self.sub_nodes[hit]
        if len(uncovered):
            bits.append(labeling_error_cost(uncovered, self.graph))
        return math.fsum(bits)


def local_cost(graph: HeteroGraph, sub_nodes, s: Structure | Sequence[Structure]) -> float:
    """Cost of encoding the induced subgraph on ``sub_nodes`` with ``s``.

    Accepts one structure or several pattern-disjoint ones scored jointly.
    The model-level terms (structure count, type code) are left out.
    """
    structures = [s] if isinstance(s, Structure) else list(s)
    return LocalScorer(graph, sub_nodes).cost(structures)


def unmodeled_cost(graph: HeteroGraph, sub_nodes) -> float:
    """Cost of leaving a subgraph's edges to E- and its labels to E^a."""
    return LocalScorer(graph, sub_nodes).unmodeled()


# ----------------------------------------------------------------------- model


@dataclass
class Model:
    """Ordered structures plus the error state they leave against a graph."""

    structures: list[Structure]
    errors: ErrorState

    @property
    def type_counts(self) -> dict[str, int]:
        counts = dict.fromkeys(KINDS, 0)
        for s in self.structures:
            counts[s.kind] += 1
        return counts

    def __len__(self) -> int:
        return len(self.structures)


def build_model(structures: Sequence[Structure], graph: HeteroGraph) -> Model:
    """Resolve cell ownership and derive E+, E-, en and near-structure edges.

    Each pattern cell belongs to the first structure (in list order) whose
    pattern contains it; a decoder can replay this from the structure list.
    Near structures transmit the edges of the cells they own exactly, so
    those cells never reach the error channels.
    """
    n = graph.n
    structures = [s.validate() for s in structures]
    if not structures:
        return Model(
            [],
            ErrorState(
                n,
                np.zeros(0, np.int64),
                graph.edge_keys.copy(),
                np.arange(n, dtype=np.int64),
                0,
                n * (n - 1) // 2,
            ),
        )
    cell_lists = [s.cells(n) for s in structures]
    keys = np.concatenate(cell_lists)
    owner_all = np.repeat(np.arange(len(structures)), [len(c) for c in cell_lists])
    ukeys, first = np.unique(keys, return_index=True)
    owner = owner_all[first]
    present = graph.edge_mask(ukeys)
    is_near = np.array([s.near for s in structures])
    near_cell = is_near[owner]

    owned = np.bincount(owner, minlength=len(structures))
    owned_present = np.bincount(owner[present], minlength=len(structures))
    # present cells grouped by owner; the stable sort keeps keys ascending
    by_owner = np.argsort(owner[present], kind="stable")
    grouped = ukeys[present][by_owner]
    starts = np.concatenate(([0], np.cumsum(owned_present)))
    final = []
    for i, s in enumerate(structures):
        if owned[i] == 0:
            raise StructureError(f"structure {i} ({s.kind}) owns no cells; its pattern is fully overlapped")
        if s.near:
            sel = grouped[starts[i] : starts[i + 1]]
            edges = tuple((int(k // n), int(k % n)) for k in sel)
            s = replace(s, ones=int(owned_present[i]), zeros=int(owned[i] - owned_present[i]), edges=edges)
        final.append(s)

    full_mask = ~near_cell
    e_plus = ukeys[full_mask & ~present]
    modeled_edges = ukeys[present]
    e_minus = graph.edge_keys[~np.isin(graph.edge_keys, modeled_edges, assume_unique=True)]
    covered = np.unique(np.concatenate([s.nodes for s in final]))
    en = np.setdiff1d(np.arange(n, dtype=np.int64), covered, assume_unique=True)
    err = ErrorState(
        n=n,
        e_plus=e_plus,
        e_minus=e_minus,
        en=en,
        plus_domain=int(full_mask.sum()),
        minus_domain=n * (n - 1) // 2 - len(ukeys),
    )
    return Model(final, err)


@dataclass
class StructureCost:
    kind: str
    type_bits: float
    connectivity_bits: float
    label_bits: float
    h1: int
    h2: int

    @property
    def total(self) -> float:
        return self.type_bits + self.connectivity_bits + self.label_bits


@dataclass
class CostBreakdown:
    structure_count_bits: float
    type_composition_bits: float
    per_structure: list[StructureCost]
    error_plus_bits: float
    error_minus_bits: float
    labeling_error_bits: float
    n_structures: int = 0
    e_plus_count: int = 0
    e_minus_count: int = 0
    uncovered_nodes: int = 0
    edges: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def model_bits(self) -> float:
        return math.fsum(
            [self.structure_count_bits, self.type_composition_bits]
            + [c.total for c in self.per_structure]
        )

    @property
    def type_bits(self) -> float:
        return math.fsum(c.type_bits for c in self.per_structure)

    @property
    def connectivity_bits(self) -> float:
        return math.fsum(c.connectivity_bits for c in self.per_structure)

    @property
    def label_bits(self) -> float:
        return math.fsum(c.label_bits for c in self.per_structure)

    @property
    def total(self) -> float:
        return math.fsum(
            [self.model_bits, self.error_plus_bits, self.error_minus_bits, self.labeling_error_bits]
        )

    @property
    def unexplained_ratio(self) -> float:
        return self.e_minus_count / self.edges if self.edges else 0.0

    def terms(self) -> dict[str, float]:
        return {
            "model_bits": self.model_bits,
            "structure_count_bits": self.structure_count_bits,
            "type_composition_bits": self.type_composition_bits,
            "type_bits": self.type_bits,
            "connectivity_bits": self.connectivity_bits,
            "label_bits": self.label_bits,
            "error_plus_bits": self.error_plus_bits,
            "error_minus_bits": self.error_minus_bits,
            "labeling_error_bits": self.labeling_error_bits,
            "total": self.total,
        }


def model_cost(model: Model | Sequence[Structure], graph: HeteroGraph) -> CostBreakdown:
    """Total description length of ``graph`` under ``model``."""
    if not isinstance(model, Model):
        model = build_model(model, graph)
    structures = model.structures
    size = len(structures)
    counts = model.type_counts
    per = []
    for s in structures:
        type_bits = -math.log2(counts[s.kind] / size)
        lab, h1, h2 = label_full_cost(s, graph)
        per.append(StructureCost(s.kind, type_bits, connectivity_cost(s, graph.n), lab, h1, h2))
    err = model.errors
    return CostBreakdown(
        structure_count_bits=universal_int_code_len(size + 1),
        type_composition_bits=weak_composition_code_len(size, N_TYPES),
        per_structure=per,
        error_plus_bits=error_channel_cost(len(err.e_plus), err.plus_domain),
        error_minus_bits=error_channel_cost(len(err.e_minus), err.minus_domain),
        labeling_error_bits=labeling_error_cost(err.en, graph),
        n_structures=size,
        e_plus_count=len(err.e_plus),
        e_minus_count=len(err.e_minus),
        uncovered_nodes=len(err.en),
        edges=graph.m,
    )


def reconstruct(structures: Sequence[Structure], e_plus, e_minus, n: int) -> set[tuple[int, int]]:
    """Decode the edge set from a model's structures and its two error sets.

    Near structures must carry their transmitted edges (as set by
    :func:`build_model`).
    """
    owned: set[int] = set()
    edges: set[int] = set()
    for s in structures:
        cells = [int(c) for c in s.cells(n)]
        mine = [c for c in cells if c not in owned]
        owned.update(mine)
        if s.near:
            if s.edges is None:
                raise StructureError("near structure without transmitted edges")
            edges.update(u * n + v for u, v in s.edges)
        else:
            edges.update(mine)
    edges ^= {int(k) for k in e_plus}
    edges ^= {int(k) for k in e_minus}
    return {(k // n, k % n) for k in edges}
