"""Pick the final model out of the candidate structures."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .encoding import (
    CostBreakdown,
    LocalScorer,
    Model,
    Structure,
    StructureError,
    build_model,
    local_cost,
    model_cost,
    reconstruct,
    unmodeled_cost,
)
from .taxonomy import HGSError, HeteroGraph

STRATEGIES = ("vanilla", "topk", "benefit")
DEFAULT_TOP_K = 100


@dataclass(frozen=True)
class Candidate:
    structure: Structure
    local_cost: float
    gain: float
    index: int
    source: int = -1


def compute_gain(graph: HeteroGraph, nodes, s: Structure) -> float:
    """Bits saved by encoding the subgraph as ``s`` instead of leaving it unmodeled."""
    return unmodeled_cost(graph, nodes) - local_cost(graph, nodes, s)


def _trim_round(items: list[tuple[int, Structure]], graph: HeteroGraph):
    n = graph.n
    cell_lists = [s.cells(n) for _, s in items]
    sizes = [len(c) for c in cell_lists]
    keys = np.concatenate(cell_lists)
    owner_all = np.repeat(np.arange(len(items)), sizes)
    _, first = np.unique(keys, return_index=True)
    is_first = np.zeros(len(keys), dtype=bool)
    is_first[first] = True
    present = graph.edge_mask(keys)
    owned_present = np.bincount(owner_all[is_first & present], minlength=len(items))
    offsets = np.concatenate(([0], np.cumsum(sizes)))
    out, changed = [], False
    for i, (idx, s) in enumerate(items):
        if owned_present[i] == 0:
            changed = True
            continue
        mine = is_first[offsets[i] : offsets[i + 1]]
        if s.kind == "st" and not mine.all():
            changed = True
            spokes = np.asarray(s.parts[1])[mine]
            if len(spokes) < 2:
                continue
            s = Structure.star(s.hub, spokes)
        out.append((idx, s))
    return out, changed


def resolve_overlaps(structures: Sequence[Structure], graph: HeteroGraph) -> list[tuple[int, Structure]]:
    """First-wins overlap trimming in list order.

    Earlier structures keep their cells; a later star loses the spokes whose
    hub cell is already taken, and a structure left owning no edge of the
    graph is dropped. Returns the surviving ``(original index, structure)``.
    """
    items = list(enumerate(structures))
    changed = bool(items)
    while changed and items:
        items, changed = _trim_round(items, graph)
    return items


def prepare_candidates(
    graph: HeteroGraph, structures: Sequence[Structure], sources: Sequence[int] | None = None
) -> list[Candidate]:
    """Turn emitted structures into an edge-disjoint candidate set with gains."""
    sources = list(sources) if sources is not None else list(range(len(structures)))
    out = []
    for idx, s in resolve_overlaps(structures, graph):
        scorer = LocalScorer(graph, s.nodes)
        cost = scorer.cost([s])
        gain = scorer.unmodeled() - cost
        out.append(Candidate(s, cost, gain, len(out), sources[idx]))
    return out


def select(candidates: Sequence[Candidate], strategy: str = "vanilla", k: int = DEFAULT_TOP_K) -> list[Candidate]:
    strategy = strategy.lower()
    if strategy == "vanilla":
        chosen = list(candidates)
    elif strategy == "topk":
        if k < 1:
            raise HGSError("top-k needs k >= 1")
        ranked = sorted(candidates, key=lambda c: (-c.gain, c.index))
        chosen = ranked[:k]
    elif strategy == "benefit":
        chosen = [c for c in candidates if c.gain > 0]
    else:
        raise HGSError(f"unknown strategy {strategy!r}; expected one of {', '.join(STRATEGIES)}")
    return sorted(chosen, key=lambda c: c.index)


def assemble(
    candidates: Sequence[Candidate],
    strategy: str,
    graph: HeteroGraph,
    k: int = DEFAULT_TOP_K,
) -> tuple[Model, CostBreakdown]:
    """Select structures by strategy, resolve the model and score it.

    Selection ranks by gain, but the model keeps candidate order, so the
    same subset always yields the same model whatever strategy picked it.
    """
    chosen = select(candidates, strategy, k)
    model = build_model([c.structure for c in chosen], graph)
    return model, model_cost(model, graph)


def empty_model(graph: HeteroGraph) -> tuple[Model, CostBreakdown]:
    model = build_model([], graph)
    return model, model_cost(model, graph)


def decode(model: Model) -> set[tuple[int, int]]:
    err = model.errors
    return reconstruct(model.structures, err.e_plus, err.e_minus, err.n)


def check_lossless(model: Model, graph: HeteroGraph) -> None:
    if decode(model) != graph.edge_set():
        raise StructureError("model does not reproduce the graph's edge set")
    covered = set()
    for s in model.structures:
        covered.update(int(v) for v in s.nodes)
    if covered | set(int(v) for v in model.errors.en) != set(range(graph.n)):
        raise StructureError("some node label is neither in a structure nor in the labeling error")


def strip_near_edges(structures: Sequence[Structure]) -> list[Structure]:
    return [replace(s, edges=None, ones=None, zeros=None) for s in structures]
