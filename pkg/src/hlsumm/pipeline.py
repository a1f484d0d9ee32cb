"""End-to-end summarization: decompose, identify, segment, assemble."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .assemble import DEFAULT_TOP_K, STRATEGIES, Candidate, assemble, empty_model, prepare_candidates
from .decompose import CandidateSubgraph, DecomposeConfig, slashburn_decompose
from .encoding import CostBreakdown, Model, Structure
from .identify import LocalView, best_structure
from .segment import TraceEvent, hierarchical_segment
from .taxonomy import HGSError, HeteroGraph


@dataclass
class SegmentRecord:
    source: int
    structure: Structure
    parts: list[Structure]
    events: list[TraceEvent]


@dataclass
class Summary:
    model: Model
    cost: CostBreakdown
    baseline: CostBreakdown
    candidates: list[Candidate]
    subgraphs: list[CandidateSubgraph]
    segments: list[SegmentRecord]
    dropped: list[tuple[int, str]] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)
    strategy: str = "vanilla"
    k: int = DEFAULT_TOP_K
    seed: int = 0

    @property
    def relative_cost(self) -> float:
        return self.cost.total / self.baseline.total if self.baseline.total else 0.0


def chain_rng(seed: int, index: int) -> np.random.Generator:
    """Per-subgraph generator, so results do not depend on processing order."""
    return np.random.default_rng([seed, index])


def identify_and_segment(
    graph: HeteroGraph,
    subgraphs: list[CandidateSubgraph],
    seed: int = 0,
    segment: bool = True,
    trace: bool = False,
) -> tuple[list[Structure], list[int], list[SegmentRecord], list[tuple[int, str]]]:
    structures: list[Structure] = []
    sources: list[int] = []
    records: list[SegmentRecord] = []
    dropped: list[tuple[int, str]] = []
    for sub in subgraphs:
        view = LocalView(graph, sub.nodes)
        found = best_structure(graph, view, chain_rng(seed, sub.index))
        if found is None:
            dropped.append((sub.index, "no structure fits the subgraph"))
            continue
        s, _ = found
        events: list[TraceEvent] = []
        if segment:
            parts = hierarchical_segment(graph, s, events if trace else None, view.scorer)
        else:
            parts = [s]
        if trace:
            records.append(SegmentRecord(sub.index, s, parts, events))
        structures.extend(parts)
        sources.extend([sub.index] * len(parts))
    return structures, sources, records, dropped


def summarize(
    graph: HeteroGraph,
    strategy: str = "vanilla",
    k: int = DEFAULT_TOP_K,
    seed: int = 0,
    decompose_cfg: DecomposeConfig | None = None,
    segment: bool = True,
    trace: bool = False,
) -> Summary:
    strategy = strategy.lower()
    if strategy not in STRATEGIES:
        raise HGSError(f"unknown strategy {strategy!r}; expected one of {', '.join(STRATEGIES)}")
    if strategy == "topk" and k < 1:
        raise HGSError("top-k needs k >= 1")
    timings = {}
    t0 = time.perf_counter()
    subgraphs = slashburn_decompose(graph, decompose_cfg or DecomposeConfig.for_graph(graph.n), seed)
    t1 = time.perf_counter()
    structures, sources, records, dropped = identify_and_segment(graph, subgraphs, seed, segment, trace)
    t2 = time.perf_counter()
    candidates = prepare_candidates(graph, structures, sources)
    kept = {c.source for c in candidates}
    for src in dict.fromkeys(sources):
        if src not in kept:
            dropped.append((src, "fully overlapped by earlier structures"))
    model, cost = assemble(candidates, strategy, graph, k)
    _, baseline = empty_model(graph)
    t3 = time.perf_counter()
    timings.update(decompose=t1 - t0, identify=t2 - t1, assemble=t3 - t2, total=t3 - t0)
    return Summary(model, cost, baseline, candidates, subgraphs, records, dropped, timings, strategy, k, seed)
