"""Figures for summaries and scalability runs, written to image files."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .encoding import KINDS, CostBreakdown, Model  # noqa: E402

KIND_NAMES = {
    "st": "star",
    "fc": "full clique",
    "nc": "near clique",
    "bc": "bipartite core",
    "nb": "near bipartite",
    "ch": "chain",
}


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def type_counts_figure(model: Model, path) -> Path:
    counts = model.type_counts
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar([KIND_NAMES[k] for k in KINDS], [counts[k] for k in KINDS], color="#4c72b0")
    ax.set_ylabel("structures")
    ax.set_title("Structures per type")
    ax.tick_params(axis="x", labelrotation=30)
    return _save(fig, Path(path))


def size_distribution_figure(model: Model, path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for k in KINDS:
        sizes = [s.size for s in model.structures if s.kind == k]
        if sizes:
            values, freq = np.unique(sizes, return_counts=True)
            ax.scatter(values, freq, s=14, label=KIND_NAMES[k])
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("structure size (nodes)")
    ax.set_ylabel("count")
    ax.set_title("Structure size distribution")
    if model.structures:
        ax.legend(fontsize=8)
    return _save(fig, Path(path))


def cost_breakdown_figure(cost: CostBreakdown, baseline: CostBreakdown, path) -> Path:
    parts = {
        "model": cost.model_bits,
        "E+": cost.error_plus_bits,
        "E-": cost.error_minus_bits,
        "labels of uncovered": cost.labeling_error_bits,
    }
    base = {
        "model": baseline.model_bits,
        "E+": baseline.error_plus_bits,
        "E-": baseline.error_minus_bits,
        "labels of uncovered": baseline.labeling_error_bits,
    }
    fig, ax = plt.subplots(figsize=(6, 3.5))
    bottom = np.zeros(2)
    for name in parts:
        vals = np.array([base[name], parts[name]])
        ax.bar(["original", "summary"], vals, bottom=bottom, label=name)
        bottom += vals
    ax.set_ylabel("bits")
    ax.set_title(f"Description length (relative cost {cost.total / baseline.total:.3f})" if baseline.total else "Description length")
    ax.legend(fontsize=8)
    return _save(fig, Path(path))


def scalability_figure(edges: Sequence[int], seconds: Sequence[float], path) -> tuple[Path, float]:
    x = np.asarray(edges, dtype=float)
    y = np.asarray(seconds, dtype=float)
    slope, intercept = np.polyfit(np.log10(x), np.log10(y), 1)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(x, y, "o-", label="measured")
    ref = 10 ** intercept * x
    ax.loglog(x, ref / ref[0] * y[0], "--", color="grey", label="linear reference")
    ax.set_xlabel("edges")
    ax.set_ylabel("wall time (s)")
    ax.set_title(f"Summarize wall time, slope {slope:.2f}")
    ax.legend(fontsize=8)
    return _save(fig, Path(path)), float(slope)


def summary_figures(model: Model, cost: CostBreakdown, baseline: CostBreakdown, directory) -> list[Path]:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    return [
        type_counts_figure(model, d / "type_counts.png"),
        size_distribution_figure(model, d / "size_distribution.png"),
        cost_breakdown_figure(cost, baseline, d / "cost_breakdown.png"),
    ]
