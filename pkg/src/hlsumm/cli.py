"""Command-line entry point: ``hlsumm <command> [options]``."""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import io
from .assemble import DEFAULT_TOP_K, STRATEGIES, empty_model
from .bench import LADDER_NODES, loglog_slope, run_ladder
from .decompose import DecomposeConfig, slashburn_decompose
from .encoding import build_model, model_cost
from .generate import BNS_DEFAULT_EDGES, PLANTABLE, generate_bns_like, generate_synthetic, planted_config
from .pipeline import identify_and_segment, summarize
from .report import scalability_figure, summary_figures
from .sampling import ffs_sample
from .segment import hierarchical_segment
from .similarity import build_matrix, node_features, top_similar
from .taxonomy import HGSError

EXIT_OK = 0
EXIT_INPUT = 2


class UsageError(HGSError):
    pass


def _default_seed() -> int:
    raw = os.environ.get("HGS_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"HGS_SEED must be an integer, got {raw!r}") from None


def _add_graph_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("graph input (a directory, or the three files)")
    g.add_argument("--graph", metavar="DIR", help="directory with taxonomy.txt, nodes.tsv, edges.tsv")
    g.add_argument("--nodes", metavar="FILE")
    g.add_argument("--edges", metavar="FILE")
    g.add_argument("--taxonomy", metavar="FILE")


def _load(args):
    files = (args.nodes, args.edges, args.taxonomy)
    if args.graph and any(files):
        raise UsageError("give either --graph or --nodes/--edges/--taxonomy, not both")
    if args.graph:
        return io.load_graph_dir(args.graph)[0]
    if not all(files):
        raise UsageError("a graph is required: --graph DIR or all of --nodes, --edges, --taxonomy")
    return io.load_graph(*files)[0]


def _seed(args) -> int:
    return args.seed if args.seed is not None else _default_seed()


def _parse_background(items) -> dict[str, int]:
    out = {}
    for item in items or []:
        label, sep, count = item.partition("=")
        if not sep or not count.isdigit():
            raise UsageError(f"--background expects LABEL=COUNT, got {item!r}")
        out[label] = int(count)
    return out


# --------------------------------------------------------------------- commands


def cmd_summarize(args) -> int:
    graph = _load(args)
    result = summarize(graph, args.strategy, args.k, _seed(args))
    rows = io.cost_rows(result.cost, result.baseline)
    meta = {"strategy": result.strategy, "seed": result.seed, "nodes": graph.n, "edges": graph.m}
    if result.strategy == "topk":
        meta["k"] = result.k
    if args.out:
        io.write_model(args.out, result.model, result.cost, meta)
    if args.report:
        io.write_cost_report(args.report, result.cost, result.baseline)
    if args.candidates:
        io.write_candidates(args.candidates, result.subgraphs)
    if args.figures:
        for path in summary_figures(result.model, result.cost, result.baseline, args.figures):
            print(f"figure\t{path}", file=sys.stderr)
    io.write_rows("-", ("key", "value"), rows)
    return EXIT_OK


def cmd_cost(args) -> int:
    graph = _load(args)
    _, baseline = empty_model(graph)
    if args.model == "empty":
        cost = baseline
    else:
        structures, _ = io.read_model(args.model)
        for s in structures:
            if int(max(s.nodes)) >= graph.n:
                raise HGSError(f"{args.model}: structure refers to node {int(max(s.nodes))} not in the graph")
        model = build_model(structures, graph)
        io.check_near_edges(structures, model)
        cost = model_cost(model, graph)
    if args.report:
        io.write_cost_report(args.report, cost, baseline)
    io.write_rows("-", ("key", "value"), io.cost_rows(cost, baseline))
    return EXIT_OK


def cmd_decompose(args) -> int:
    graph = _load(args)
    cfg = DecomposeConfig.for_graph(graph.n, hubs_per_iter=args.hubs, min_subgraph_nodes=args.min_nodes)
    subgraphs = slashburn_decompose(graph, cfg, _seed(args))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        width = max(4, len(str(len(subgraphs))))
        for c in subgraphs:
            io._write(out / f"candidate_{c.index:0{width}d}.txt", [str(int(v)) for v in c.nodes])
        io.write_candidates(out / "candidates.tsv", subgraphs)
    io.write_rows("-", ("index", "origin", "size"), ((c.index, c.origin, len(c.nodes)) for c in subgraphs))
    return EXIT_OK


def cmd_segment_trace(args) -> int:
    graph = _load(args)
    seed = _seed(args)
    rows = []
    if args.model:
        structures, _ = io.read_model(args.model)
        for i, s in enumerate(structures):
            events = []
            parts = hierarchical_segment(graph, s, events)
            rows += _trace_rows(i, s, parts, events)
    else:
        subgraphs = slashburn_decompose(graph, DecomposeConfig.for_graph(graph.n), seed)
        _, _, records, _ = identify_and_segment(graph, subgraphs, seed, segment=True, trace=True)
        for r in records:
            rows += _trace_rows(r.source, r.structure, r.parts, r.events)
    header = ("source", "root_kind", "root_size", "level", "kind", "size", "action",
              "cost_before", "cost_after", "part_sizes")
    io.write_rows(args.out or "-", header, rows)
    return EXIT_OK


def _trace_rows(source, root, parts, events):
    if not events:
        return [(source, root.kind, root.size, "-", root.kind, root.size, "final", "-", "-", root.size)]
    out = []
    for e in events:
        before = "-" if e.cost_before is None else float(e.cost_before)
        after = "-" if e.cost_after is None else float(e.cost_after)
        sizes = ",".join(str(x) for x in e.parts) or "-"
        out.append((source, root.kind, root.size, e.level, e.kind, e.size, e.action, before, after, sizes))
    out.append((source, root.kind, root.size, "-", "-", len(parts), "result", "-", "-",
                ",".join(str(p.size) for p in parts)))
    return out


def cmd_similar(args) -> int:
    graph = _load(args)
    seed = _seed(args)
    if args.model:
        structures, _ = io.read_model(args.model)
    else:
        structures = summarize(graph, "vanilla", seed=seed).model.structures
    rows_label = args.rows
    if rows_label == "auto":
        rows_label = "account" if "account" in graph.taxonomy else None
    elif rows_label == "all":
        rows_label = None
    matrix = build_matrix(graph, structures, args.gamma, args.d_max, rows_label)
    rank = min(args.rank, *matrix.B.shape)
    if rank < args.rank:
        print(f"note: rank lowered to {rank} (matrix is {matrix.B.shape[0]}x{matrix.B.shape[1]})", file=sys.stderr)
    features = node_features(matrix, rank, seed=seed)
    matches = top_similar(features, args.node, args.k)
    rows = []
    for i, m in enumerate(matches, start=1):
        score = "nan" if m.score is None else float(m.score)
        rows.append((i, m.node, score, graph.labels[m.node][0]))
    io.write_rows("-", ("rank", "node", "score", "label"), rows)
    return EXIT_OK


def cmd_generate(args) -> int:
    seed = _seed(args)
    out = Path(args.out)
    if args.preset == "bns-like":
        graph = generate_bns_like(args.edges, args.node_scale, seed)
        planted = []
    else:
        kinds = tuple(k.strip() for k in args.kinds.split(","))
        bad = [k for k in kinds if k not in PLANTABLE]
        if bad:
            raise UsageError(f"cannot plant {', '.join(bad)}; choose from {', '.join(PLANTABLE)}")
        cfg = planted_config(
            args.per_kind, kinds, (args.size_min, args.size_max), args.noise,
            args.labels, seed, _parse_background(args.background),
        )
        graph, _, planted = generate_synthetic(cfg)
    io.save_graph(graph, out)
    if planted:
        io.write_manifest(out / "manifest.tsv", planted)
    io.write_rows("-", ("key", "value"), [("nodes", graph.n), ("edges", graph.m), ("planted", len(planted))])
    return EXIT_OK


def cmd_sample(args) -> int:
    graph = _load(args)
    sub = ffs_sample(graph, args.target, args.p_forward, _seed(args))
    out = Path(args.out)
    io.save_graph(sub, out)
    io.write_origin(out / "origin.tsv", sub.origin)
    io.write_rows("-", ("key", "value"), [("nodes", sub.n), ("edges", sub.m)])
    return EXIT_OK


def cmd_bench(args) -> int:
    targets = [int(t) for t in args.targets.split(",")] if args.targets else LADDER_NODES
    points = run_ladder(
        args.edges, targets, _seed(args), args.strategy, node_scale=args.node_scale,
        progress=lambda p: print(f"{p.nodes}\t{p.edges}\t{p.seconds:.3f}", file=sys.stderr, flush=True),
    )
    rows = [(p.nodes, p.edges, p.seconds, p.structures, p.relative_cost) for p in points]
    io.write_rows(args.out or "-", ("nodes", "edges", "seconds", "structures", "relative_cost"), rows)
    if len(points) >= 2:
        slope = loglog_slope([p.edges for p in points], [p.seconds for p in points])
        if args.figures:
            Path(args.figures).mkdir(parents=True, exist_ok=True)
            path, _ = scalability_figure([p.edges for p in points], [p.seconds for p in points],
                                         Path(args.figures) / "scalability.png")
            print(f"figure\t{path}", file=sys.stderr)
        print(f"slope\t{slope:.4f}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hlsumm", description="Summarize labeled graphs with vocabulary structures.")
    parser.add_argument("--threads", type=int, default=None, metavar="N", help="cap BLAS worker threads")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def command(name, func, help_text, graph=True):
        p = sub.add_parser(name, help=help_text, description=help_text)
        if graph:
            _add_graph_args(p)
        p.add_argument("--seed", type=int, default=None, help="random seed (default: $HGS_SEED or 0)")
        p.set_defaults(func=func)
        return p

    p = command("summarize", cmd_summarize, "build a summary model and print its cost report")
    p.add_argument("--strategy", choices=STRATEGIES, default="vanilla")
    p.add_argument("--k", type=int, default=DEFAULT_TOP_K, help="structures kept by topk")
    p.add_argument("--out", metavar="FILE", help="write the model file")
    p.add_argument("--report", metavar="FILE", help="write the cost report")
    p.add_argument("--candidates", metavar="FILE", help="write the decomposition candidates")
    p.add_argument("--figures", metavar="DIR", help="render summary figures into DIR")

    p = command("cost", cmd_cost, "score a model file (or 'empty') against a graph")
    p.add_argument("--model", required=True, metavar="FILE|empty")
    p.add_argument("--report", metavar="FILE")

    p = command("decompose", cmd_decompose, "list the candidate subgraphs")
    p.add_argument("--out", metavar="DIR", help="write one node-list file per candidate")
    p.add_argument("--hubs", type=int, default=None, help="hubs removed per iteration")
    p.add_argument("--min-nodes", type=int, default=None, help="smallest candidate kept")

    p = command("segment-trace", cmd_segment_trace, "show label-driven segmentation decisions")
    p.add_argument("--model", metavar="FILE", help="trace these structures instead of decomposing")
    p.add_argument("--out", metavar="FILE")

    p = command("similar", cmd_similar, "nodes most similar to a query node")
    p.add_argument("--node", type=int, required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--model", metavar="FILE", help="model file (default: summarize first)")
    p.add_argument("--rank", type=int, default=16)
    p.add_argument("--gamma", type=float, default=0.7)
    p.add_argument("--d-max", type=int, default=3)
    p.add_argument("--rows", default="auto", metavar="LABEL|all|auto",
                   help="level-1 label of the rows; auto picks 'account' when present")

    p = command("generate", cmd_generate, "write a synthetic graph", graph=False)
    p.add_argument("--preset", choices=("planted", "bns-like"), default="planted")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--per-kind", type=int, default=5)
    p.add_argument("--kinds", default="st,fc,bc,ch")
    p.add_argument("--size-min", type=int, default=5)
    p.add_argument("--size-max", type=int, default=30)
    p.add_argument("--noise", type=float, default=0.01)
    p.add_argument("--labels", choices=("consistent", "role", "random"), default="consistent")
    p.add_argument("--background", action="append", metavar="LABEL=COUNT")
    p.add_argument("--edges", type=int, default=BNS_DEFAULT_EDGES, help="edge budget of bns-like")
    p.add_argument("--node-scale", type=float, default=1.0)

    p = command("sample", cmd_sample, "Forest Fire sample of a graph")
    p.add_argument("--target", type=int, required=True, help="node count")
    p.add_argument("--p-forward", type=float, default=0.7)
    p.add_argument("--out", required=True, metavar="DIR")

    p = command("bench", cmd_bench, "wall-time ladder on the bns-like preset", graph=False)
    p.add_argument("--edges", type=int, default=BNS_DEFAULT_EDGES)
    p.add_argument("--targets", help="comma-separated node counts (full graph is always added)")
    p.add_argument("--node-scale", type=float, default=1.0, help="scale the preset's node counts")
    p.add_argument("--strategy", choices=STRATEGIES, default="vanilla")
    p.add_argument("--out", metavar="FILE")
    p.add_argument("--figures", metavar="DIR")
    return parser


def _limit_threads(n):
    if n is None:
        return None
    if n < 1:
        raise UsageError("--threads must be >= 1")
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _limit_threads(args.threads)
        return args.func(args)
    except (HGSError, ValueError) as exc:
        print(f"hlsumm: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
