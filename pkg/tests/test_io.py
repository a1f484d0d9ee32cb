from pathlib import Path

import pytest

from hlsumm import io
from hlsumm.encoding import Structure, build_model, model_cost
from hlsumm.generate import generate_synthetic, planted_config
from hlsumm.pipeline import summarize
from hlsumm.taxonomy import bns_taxonomy


def write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="ascii")
    return path


@pytest.fixture
def three_files(tmp_path):
    tax = write(tmp_path / "taxonomy.txt", "account\ncharacter/dealer/destroyer\ncharacter/tanker/warden\n")
    nodes = write(tmp_path / "nodes.tsv", "0\taccount\n1\tcharacter/dealer\n2\tcharacter/tanker/warden\n")
    edges = write(tmp_path / "edges.tsv", "0\t1\n1\t2\n0\t2\n")
    return nodes, edges, tax


def test_fixture_round_trip(three_files, tmp_path):
    g, _ = io.load_graph(*three_files)
    assert g.n == 3 and g.m == 3
    assert g.labels[1] == ("character", "dealer")
    io.save_graph(g, tmp_path / "copy")
    g2, _ = io.load_graph_dir(tmp_path / "copy")
    assert g2 == g
    io.save_graph(g2, tmp_path / "copy2")
    for name in (io.TAXONOMY_FILE, io.NODES_FILE, io.EDGES_FILE):
        assert (tmp_path / "copy" / name).read_bytes() == (tmp_path / "copy2" / name).read_bytes()


@pytest.mark.parametrize(
    "nodes_text, edges_text, line, fragment",
    [
        ("0\taccount\n1\taccount\n", "0\t1\n0\t7\n", 2, "unknown node id 7"),
        ("0\taccount\n0\taccount\n", "", 2, "duplicate node id"),
        ("0\taccount\n1\tdungeon/x\n", "", 2, "unknown label path"),
        ("0\taccount\n1 account\n", "", 2, "expected"),
        ("0\taccount\n1\taccount\n", "1\t1\n", 1, "self-loop"),
    ],
)
def test_load_errors_carry_line_numbers(tmp_path, nodes_text, edges_text, line, fragment):
    tax = write(tmp_path / "t.txt", "account\ncharacter/dealer/destroyer\n")
    nodes = write(tmp_path / "n.tsv", nodes_text)
    edges = write(tmp_path / "e.tsv", edges_text)
    with pytest.raises(io.GraphFormatError) as exc:
        io.load_graph(nodes, edges, tax)
    assert exc.value.line == line
    assert fragment in str(exc.value)


def test_structure_lines_round_trip():
    structures = [
        Structure.star(3, [1, 5, 9]),
        Structure.clique([0, 2, 4]),
        Structure("nc", ((1, 2, 3, 4),), edges=((1, 2), (2, 3))),
        Structure.bipartite([0, 1], [7, 8, 9]),
        Structure("nb", ((0, 1), (7, 8)), edges=((0, 7),)),
        Structure.chain([5, 3, 9, 1]),
    ]
    for s in structures:
        line = io.format_structure(s)
        back = io.parse_structure(line)
        assert io.format_structure(back) == line
        assert back.parts == s.parts and back.kind == s.kind


def test_parse_rejects_bad_lines():
    for bad in ("zz 1,2,3", "st 1 2 3", "bc 1,2 3,4", "nc 1,2,3", "fc 1,x,3"):
        with pytest.raises(io.GraphFormatError):
            io.parse_structure(bad)


def test_model_file_round_trip(tmp_path):
    g, _, _ = generate_synthetic(planted_config(per_kind=2, seed=1, background={"account": 50}))
    r = summarize(g)
    p1, p2 = tmp_path / "m1.txt", tmp_path / "m2.txt"
    io.write_model(p1, r.model, r.cost, {"strategy": "vanilla"})
    structures, header = io.read_model(p1)
    model = build_model(structures, g)
    io.check_near_edges(structures, model)
    cost = model_cost(model, g)
    assert cost.total == pytest.approx(r.cost.total, abs=1e-6)
    assert header["total_bits"] == io._fmt(r.cost.total)
    io.write_model(p2, model, cost, {"strategy": "vanilla"})
    assert p1.read_bytes() == p2.read_bytes()


def test_cost_report_round_trip(tmp_path):
    g, _, _ = generate_synthetic(planted_config(per_kind=1, seed=2))
    r = summarize(g)
    io.write_cost_report(tmp_path / "c.tsv", r.cost, r.baseline)
    back = io.read_cost_report(tmp_path / "c.tsv")
    assert float(back["total"]) == pytest.approx(r.cost.total, abs=1e-6)
    assert back["relative_cost"] == io._fmt(r.cost.total / r.baseline.total)
    assert "unexplained_edges" in back
    text = (tmp_path / "c.tsv").read_bytes()
    assert b"\r" not in text
    text.decode("ascii")


def test_manifest_round_trip(tmp_path):
    _, _, planted = generate_synthetic(planted_config(per_kind=1, seed=3))
    io.write_manifest(tmp_path / "m.tsv", planted)
    back = io.read_manifest(tmp_path / "m.tsv")
    assert [(p.kind, p.parts) for p in back] == [(p.kind, p.parts) for p in planted]
