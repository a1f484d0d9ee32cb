"""Wall-time ladder over Forest Fire samples of the game-graph preset."""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .generate import BNS_DEFAULT_EDGES, generate_bns_like
from .pipeline import summarize
from .sampling import ffs_sample

# node counts of the reference sampling ladder; the full graph is appended
LADDER_NODES = (34203, 62339, 109764, 162759)


@dataclass
class LadderPoint:
    nodes: int
    edges: int
    seconds: float
    structures: int
    relative_cost: float
    timings: dict


def loglog_slope(edges, seconds) -> float:
    return float(np.polyfit(np.log10(np.asarray(edges, float)), np.log10(np.asarray(seconds, float)), 1)[0])


def run_ladder(
    edges: int = BNS_DEFAULT_EDGES,
    targets=LADDER_NODES,
    seed: int = 0,
    strategy: str = "vanilla",
    p_forward: float = 0.7,
    node_scale: float = 1.0,
    progress=None,
) -> list[LadderPoint]:
    graph = generate_bns_like(edges, node_scale, seed=seed)
    points = []
    for target in [t for t in targets if t < graph.n] + [graph.n]:
        g = graph if target == graph.n else ffs_sample(graph, target, p_forward, seed)
        t0 = time.perf_counter()
        summary = summarize(g, strategy, seed=seed)
        dt = time.perf_counter() - t0
        point = LadderPoint(g.n, g.m, dt, len(summary.model), summary.relative_cost, summary.timings)
        points.append(point)
        if progress is not None:
            progress(point)
    return points
