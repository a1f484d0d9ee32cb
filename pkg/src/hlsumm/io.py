"""Text formats for graphs, models, cost reports and candidate dumps.

Everything is ASCII with LF line endings. Floats are written with six
decimals through ``format`` so output does not depend on the locale.
"""
from __future__ import annotations

import sys
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .encoding import KINDS, CostBreakdown, Model, Structure, StructureError
from .taxonomy import HGSError, HeteroGraph, LabelTaxonomy, TaxonomyError

TAXONOMY_FILE = "taxonomy.txt"
NODES_FILE = "nodes.tsv"
EDGES_FILE = "edges.tsv"
UNEXPLAINED_NOTE = "edges in E- divided by all edges of the graph"


class GraphFormatError(HGSError):
    def __init__(self, path, line: int | None, message: str):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")
        self.path = str(path)
        self.line = line


def _lines(path) -> Iterable[tuple[int, str]]:
    """Non-blank, non-comment lines with their 1-based numbers."""
    try:
        with open(path, "r", encoding="ascii", newline="") as fh:
            for no, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n").rstrip("\r")
                if not line.strip() or line.startswith("#"):
                    continue
                yield no, line
    except UnicodeDecodeError as exc:
        raise GraphFormatError(path, None, f"not ASCII ({exc.reason})") from None
    except OSError as exc:
        raise GraphFormatError(path, None, exc.strerror or str(exc)) from None


def _write(path, lines: Iterable[str]) -> None:
    text = "".join(line + "\n" for line in lines)
    text.encode("ascii")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)


def _fmt(x: float) -> str:
    return format(float(x), ".6f")


def _int(token: str, path, no: int, what: str) -> int:
    token = token.strip()
    if not token.isdigit():
        raise GraphFormatError(path, no, f"{what} {token!r} is not a non-negative integer")
    return int(token)


# ---------------------------------------------------------------------- graphs


def load_taxonomy(path) -> LabelTaxonomy:
    paths = []
    for no, line in _lines(path):
        try:
            LabelTaxonomy([line.strip()])
        except TaxonomyError as exc:
            raise GraphFormatError(path, no, str(exc)) from None
        paths.append(line.strip())
    if not paths:
        raise GraphFormatError(path, None, "taxonomy file defines no labels")
    return LabelTaxonomy(paths)


def load_graph(nodes_file, edges_file, taxonomy_file) -> tuple[HeteroGraph, LabelTaxonomy]:
    """Read a labeled graph. Node ids must be exactly ``0..n-1`` in any order."""
    taxonomy = load_taxonomy(taxonomy_file)
    labels: dict[int, str] = {}
    for no, line in _lines(nodes_file):
        fields = line.split("\t")
        if len(fields) != 2:
            raise GraphFormatError(nodes_file, no, "expected '<id>\\t<label/path>'")
        v = _int(fields[0], nodes_file, no, "node id")
        if v in labels:
            raise GraphFormatError(nodes_file, no, f"duplicate node id {v}")
        path = fields[1].strip()
        if path not in taxonomy:
            raise GraphFormatError(nodes_file, no, f"unknown label path {path!r}")
        labels[v] = path
    n = len(labels)
    if n == 0:
        raise GraphFormatError(nodes_file, None, "no nodes")
    if max(labels) != n - 1:
        raise GraphFormatError(nodes_file, None, f"node ids must be 0..{n - 1}; found {max(labels)}")
    edges = []
    for no, line in _lines(edges_file):
        fields = line.split("\t")
        if len(fields) != 2:
            raise GraphFormatError(edges_file, no, "expected '<u>\\t<v>'")
        u = _int(fields[0], edges_file, no, "node id")
        v = _int(fields[1], edges_file, no, "node id")
        for x in (u, v):
            if x >= n:
                raise GraphFormatError(edges_file, no, f"unknown node id {x}")
        if u == v:
            raise GraphFormatError(edges_file, no, f"self-loop on node {u}")
        edges.append((u, v))
    graph = HeteroGraph(taxonomy, [labels[i] for i in range(n)], np.asarray(edges, dtype=np.int64).reshape(-1, 2))
    return graph, taxonomy


def load_graph_dir(directory) -> tuple[HeteroGraph, LabelTaxonomy]:
    d = Path(directory)
    return load_graph(d / NODES_FILE, d / EDGES_FILE, d / TAXONOMY_FILE)


def save_graph(graph: HeteroGraph, directory) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    _write(d / TAXONOMY_FILE, graph.taxonomy.to_lines())
    _write(d / NODES_FILE, (f"{v}\t{'/'.join(p)}" for v, p in enumerate(graph.labels)))
    _write(d / EDGES_FILE, (f"{u}\t{v}" for u, v in graph.edges))


# ---------------------------------------------------------------------- models


def _ids(values: Sequence[int]) -> str:
    return ",".join(str(int(v)) for v in values)


def _edge_list(edges) -> str:
    return ",".join(f"{u}-{v}" for u, v in edges)


def format_structure(s: Structure) -> str:
    if s.kind == "st":
        return f"st {s.hub}, {_ids(s.parts[1])}"
    if s.kind in ("fc", "ch"):
        return f"{s.kind} {_ids(s.parts[0])}"
    if s.kind == "nc":
        return f"nc {_ids(s.parts[0])} | {_edge_list(s.edges or ())}"
    body = f"{_ids(s.parts[0])} , {_ids(s.parts[1])}"
    if s.kind == "bc":
        return f"bc {body}"
    return f"nb {body} | {_edge_list(s.edges or ())}"


def _parse_ids(text: str, path, no: int) -> list[int]:
    text = text.strip()
    if not text:
        raise GraphFormatError(path, no, "empty node list")
    return [_int(t, path, no, "node id") for t in text.split(",")]


def _parse_edges(text: str, path, no: int) -> tuple[tuple[int, int], ...]:
    text = text.strip()
    if not text:
        return ()
    out = []
    for tok in text.split(","):
        a, sep, b = tok.partition("-")
        if not sep:
            raise GraphFormatError(path, no, f"malformed edge {tok!r}")
        out.append((_int(a, path, no, "node id"), _int(b, path, no, "node id")))
    return tuple(out)


def parse_structure(line: str, path="<model>", no: int = 0) -> Structure:
    kind, _, rest = line.partition(" ")
    if kind not in KINDS:
        raise GraphFormatError(path, no, f"unknown structure kind {kind!r}")
    edges = None
    if kind in ("nc", "nb"):
        body, sep, tail = rest.partition("|")
        if not sep:
            raise GraphFormatError(path, no, f"{kind} line needs '| <edges>'")
        edges, rest = _parse_edges(tail, path, no), body
    try:
        if kind == "st":
            hub, sep, spokes = rest.partition(",")
            if not sep:
                raise GraphFormatError(path, no, "star line needs '<hub>, <spokes>'")
            s = Structure.star(_int(hub, path, no, "hub"), _parse_ids(spokes, path, no))
        elif kind in ("fc", "nc"):
            s = Structure.clique(_parse_ids(rest, path, no), near=kind == "nc")
        elif kind == "ch":
            s = Structure.chain(_parse_ids(rest, path, no))
        else:
            a, sep, b = rest.partition(" , ")
            if not sep:
                raise GraphFormatError(path, no, "bipartite line needs '<A> , <B>'")
            s = Structure.bipartite(_parse_ids(a, path, no), _parse_ids(b, path, no), near=kind == "nb")
        s.validate()
    except StructureError as exc:
        raise GraphFormatError(path, no, str(exc)) from None
    if edges is not None:
        s = Structure(s.kind, s.parts, edges=edges)
    return s


def write_model(path, model: Model, cost: CostBreakdown, meta: dict | None = None) -> None:
    header = dict(meta or {})
    header.update(
        structures=len(model),
        total_bits=_fmt(cost.total),
        model_bits=_fmt(cost.model_bits),
        unexplained_edges=_fmt(cost.unexplained_ratio),
        unexplained_definition=UNEXPLAINED_NOTE,
    )
    lines = [f"# {k}: {v}" for k, v in header.items()]
    lines += [format_structure(s) for s in model.structures]
    _write(path, lines)


def read_model(path) -> tuple[list[Structure], dict[str, str]]:
    header: dict[str, str] = {}
    structures = []
    try:
        fh = open(path, "r", encoding="ascii", newline="")
    except OSError as exc:
        raise GraphFormatError(path, None, exc.strerror or str(exc)) from None
    with fh:
        for no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                key, sep, value = line[1:].partition(":")
                if sep:
                    header[key.strip()] = value.strip()
                continue
            structures.append(parse_structure(line, path, no))
    return structures, header


def check_near_edges(structures: Sequence[Structure], model: Model) -> None:
    """Near structures read from a file must carry the edges the graph implies."""
    for i, (given, derived) in enumerate(zip(structures, model.structures)):
        if given.near and set(given.edges or ()) != set(derived.edges or ()):
            raise HGSError(f"structure {i + 1} ({given.kind}): stored edges disagree with the graph")


# ---------------------------------------------------------------------- reports


def cost_rows(cost: CostBreakdown, baseline: CostBreakdown | None = None) -> list[tuple[str, str]]:
    rows = [
        ("structures", str(cost.n_structures)),
        *[(f"count_{k}", str(sum(1 for c in cost.per_structure if c.kind == k))) for k in KINDS],
    ]
    rows += [(k, _fmt(v)) for k, v in cost.terms().items()]
    rows += [
        ("e_plus_edges", str(cost.e_plus_count)),
        ("e_minus_edges", str(cost.e_minus_count)),
        ("uncovered_nodes", str(cost.uncovered_nodes)),
        ("graph_edges", str(cost.edges)),
    ]
    if baseline is not None:
        rows.append(("original_bits", _fmt(baseline.total)))
        rel = cost.total / baseline.total if baseline.total else 0.0
        rows.append(("relative_cost", _fmt(rel)))
    rows.append(("unexplained_edges", _fmt(cost.unexplained_ratio)))
    return rows


def write_cost_report(path, cost: CostBreakdown, baseline: CostBreakdown | None = None) -> None:
    _write(path, (f"{k}\t{v}" for k, v in cost_rows(cost, baseline)))


def read_cost_report(path) -> dict[str, str]:
    out = {}
    for no, line in _lines(path):
        key, sep, value = line.partition("\t")
        if not sep:
            raise GraphFormatError(path, no, "expected '<key>\\t<value>'")
        out[key] = value
    return out


def write_candidates(path, subgraphs) -> None:
    lines = ["index\torigin\tsize\tnodes"]
    lines += [f"{c.index}\t{c.origin}\t{len(c.nodes)}\t{_ids(c.nodes)}" for c in subgraphs]
    _write(path, lines)


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = ["\t".join(header)]
    for row in rows:
        lines.append("\t".join(_fmt(x) if isinstance(x, float) else str(x) for x in row))
    if path is None or path == "-":
        sys.stdout.write("".join(line + "\n" for line in lines))
    else:
        _write(path, lines)


def write_manifest(path, planted) -> None:
    """Planted structures, one per line: ``index, kind, parts`` with parts split by ' ; '."""
    lines = ["index\tkind\tparts"]
    lines += [f"{i}\t{p.kind}\t{' ; '.join(_ids(part) for part in p.parts)}" for i, p in enumerate(planted)]
    _write(path, lines)


def read_manifest(path):
    from .generate import PlantedStructure

    out = []
    for no, line in _lines(path):
        if line.startswith("index\t"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise GraphFormatError(path, no, "expected '<index>\\t<kind>\\t<parts>'")
        parts = [_parse_ids(p, path, no) for p in fields[2].split(" ; ")]
        out.append(PlantedStructure(fields[1], parts))
    return out


def write_origin(path, origin) -> None:
    _write(path, ["node\torigin"] + [f"{i}\t{int(o)}" for i, o in enumerate(origin)])
