"""Split label-inconsistent structures into same-type pieces when that is cheaper.

Every split is judged jointly against the node set of the structure being
segmented from the top, so an accepted split always lowers that total.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .encoding import (
    MIN_NODES,
    LocalScorer,
    Structure,
    is_consistent,
    is_role_consistent,
)
from .taxonomy import HeteroGraph


def majority_split(graph: HeteroGraph, nodes, k: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Nodes carrying the most frequent level-``k`` label versus the rest.

    Ties go to the lexicographically smallest label path; nodes shallower
    than ``k`` share a bucket (label ``-1``) that loses every tie.
    """
    nodes = np.asarray(nodes, dtype=np.int64)
    ids = graph.label_ids[nodes, k - 1]
    labels, counts = np.unique(ids, return_counts=True)
    top = counts.max()
    tied = [int(x) for x in labels[counts == top]]

    def name(label: int) -> tuple[int, str]:
        if label < 0:
            return (1, "")
        return (0, "/".join(graph.taxonomy.path_of(label)))

    winner = min(tied, key=name)
    mask = ids == winner
    return nodes[mask], nodes[~mask], winner


@dataclass
class TraceEvent:
    level: int
    kind: str
    size: int
    action: str
    cost_before: float | None = None
    cost_after: float | None = None
    parts: list[int] = field(default_factory=list)


class _Context:
    """The structure list being refined, scored against the root's node set."""

    def __init__(self, graph: HeteroGraph, root: Structure, scorer: LocalScorer | None = None):
        self.graph = graph
        if scorer is None or not np.array_equal(scorer.sub_nodes, root.nodes):
            scorer = LocalScorer(graph, root.nodes)
        self.scorer = scorer
        self.others: list[Structure] = []

    def cost(self, structures) -> float:
        return self.scorer.cost(self.others + list(structures))


def _valid(parts: list[Structure]) -> bool:
    for p in parts:
        try:
            p.validate()
        except Exception:
            return False
    return True


def _choose(ctx: _Context, current: Structure, options: list[list[Structure]]):
    """Cheapest option strictly below the unsplit cost, else None."""
    base = ctx.cost([current])
    best, best_cost = None, base
    for opt in options:
        if not _valid(opt):
            continue
        c = ctx.cost(opt)
        if c < best_cost or (best is not None and c == best_cost and len(opt) < len(best)):
            best, best_cost = opt, c
    return best, base, best_cost


def _star_options(graph: HeteroGraph, st: Structure, k: int) -> list[list[Structure]]:
    spokes = np.asarray(st.parts[1], dtype=np.int64)
    major, rest, _ = majority_split(graph, spokes, k)
    if len(rest) == 0 or len(major) < 2 or len(rest) < 2:
        return []
    return [[Structure.star(st.hub, major), Structure.star(st.hub, rest)]]


def _bipartite_options(graph: HeteroGraph, s: Structure, k: int) -> list[list[Structure]]:
    near = s.near
    a = np.asarray(s.parts[0], dtype=np.int64)
    b = np.asarray(s.parts[1], dtype=np.int64)
    a1, a2, _ = majority_split(graph, a, k)
    b1, b2, _ = majority_split(graph, b, k)
    mk = lambda x, y: Structure.bipartite(x, y, near=near)  # noqa: E731
    options = []
    if len(a2):
        options.append([mk(a1, b), mk(a2, b)])
    if len(b2):
        options.append([mk(a, b1), mk(a, b2)])
    if len(a2) and len(b2):
        options.append([mk(a1, b1), mk(a1, b2), mk(a2, b1), mk(a2, b2)])
    return options


def _runs(seq: np.ndarray, mask: np.ndarray) -> list[np.ndarray]:
    """Maximal runs of consecutive ``True`` positions with at least 3 nodes."""
    runs, start = [], None
    for i, flag in enumerate(list(mask) + [False]):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            if i - start >= MIN_NODES["ch"]:
                runs.append(seq[start:i])
            start = None
    return runs


def _uniform_options(graph: HeteroGraph, s: Structure, k: int) -> list[list[Structure]]:
    if s.kind == "ch":
        seq = np.asarray(s.parts[0], dtype=np.int64)
        major, _, label = majority_split(graph, seq, k)
        mask = graph.label_ids[seq, k - 1] == label
        left, right = _runs(seq, mask), _runs(seq, ~mask)
        if not left or not right:
            return []
        return [[Structure.chain(r) for r in left + right]]
    nodes = np.asarray(s.parts[0], dtype=np.int64)
    major, rest, _ = majority_split(graph, nodes, k)
    if len(rest) == 0:
        return []
    near = s.kind == "nc"
    return [[Structure.clique(major, near=near), Structure.clique(rest, near=near)]]


def _options(graph: HeteroGraph, s: Structure, k: int) -> list[list[Structure]]:
    if s.kind == "st":
        return _star_options(graph, s, k)
    if s.kind in ("bc", "nb"):
        return _bipartite_options(graph, s, k)
    return _uniform_options(graph, s, k)


def _segment_once(graph, s, k, ctx=None) -> list[Structure]:
    if is_consistent(s, graph, k) or is_role_consistent(s, graph, k):
        return [s]
    ctx = ctx or _Context(graph, s)
    best, _, _ = _choose(ctx, s, _options(graph, s, k))
    return best if best is not None else [s]


def segment_star(graph: HeteroGraph, st: Structure, k: int) -> list[Structure]:
    """Two stars on the same hub (majority-label spokes and the rest), if cheaper."""
    return _segment_once(graph, st, k)


def segment_bipartite(graph: HeteroGraph, s: Structure, k: int) -> list[Structure]:
    """Best of: no split, split side A, split side B, split both."""
    return _segment_once(graph, s, k)


def segment_uniform(graph: HeteroGraph, s: Structure, k: int) -> list[Structure]:
    """Cliques split into majority/rest; chains into their same-side runs of 3+."""
    return _segment_once(graph, s, k)


def hierarchical_segment(
    graph: HeteroGraph,
    s: Structure,
    trace: list[TraceEvent] | None = None,
    scorer: LocalScorer | None = None,
) -> list[Structure]:
    """Walk label levels top-down, splitting where it lowers the total cost.

    A structure that is consistent or role-consistent at a level moves on to
    the next level; an inconsistent one is either split (and each part moves
    on) or kept as it is and finalised.
    """
    h = graph.taxonomy.h
    ctx = _Context(graph, s, scorer)
    work: list[tuple[Structure, int]] = [(s, 1)]
    final: list[Structure] = []
    while work:
        cur, k = work.pop(0)
        if k > h:
            final.append(cur)
            continue
        if is_consistent(cur, graph, k) or is_role_consistent(cur, graph, k):
            if trace is not None:
                trace.append(TraceEvent(k, cur.kind, cur.size, "descend"))
            work.insert(0, (cur, k + 1))
            continue
        ctx.others = final + [w for w, _ in work]
        best, before, after = _choose(ctx, cur, _options(graph, cur, k))
        if best is None:
            if trace is not None:
                trace.append(TraceEvent(k, cur.kind, cur.size, "keep", before, before))
            final.append(cur)
            continue
        if trace is not None:
            trace.append(TraceEvent(k, cur.kind, cur.size, "split", before, after, [p.size for p in best]))
        work = [(p, k + 1) for p in best] + work
    return final
