"""End-to-end acceptance checks; each prints a single PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

import oracle
from fixtures import community_graph, random_labeled_graph, spoke_star_fixture
from hlsumm import io
from hlsumm.assemble import assemble, check_lossless, decode
from hlsumm.bench import loglog_slope, run_ladder
from hlsumm.cli import main
from hlsumm.encoding import (
    Structure,
    connectivity_cost,
    error_channel_cost,
    is_consistent,
    label_base_cost,
    label_consistent_cost,
    label_full_cost,
    label_role_consistent_cost,
    labeling_error_cost,
    model_cost,
)
from hlsumm.generate import generate_synthetic, planted_config
from hlsumm.mdl import universal_int_code_len
from hlsumm.pipeline import summarize
from hlsumm.similarity import build_matrix, cosine, node_features, raw_features, top_similar
from hlsumm.taxonomy import HeteroGraph, LabelTaxonomy


@pytest.fixture
def verdict(capsys):
    def emit(name, ok, detail, elapsed, budget):
        ok = ok and elapsed < budget
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail} ({elapsed:.2f}s, budget {budget:g}s)")
        assert ok, detail

    return emit


# ------------------------------------------------------------------ 1


def test_lossless_reconstruction(verdict):
    t0 = time.perf_counter()
    failures = []
    for i in range(100):
        g = random_labeled_graph(np.random.default_rng(1000 + i))
        # decomposition and identification do not depend on the strategy
        summary = summarize(g, "vanilla", seed=i)
        for strategy in ("vanilla", "topk", "benefit"):
            model = summary.model if strategy == "vanilla" else assemble(summary.candidates, strategy, g, k=10)[0]
            try:
                check_lossless(model, g)
            except Exception as exc:  # noqa: BLE001 - collected for the report
                failures.append((i, strategy, str(exc)))
                continue
            # every label comes back from a structure member or the labeling-error list
            recovered = {}
            for s in model.structures:
                for v in s.nodes:
                    recovered[int(v)] = g.labels[int(v)]
            for v in model.errors.en:
                recovered[int(v)] = g.labels[int(v)]
            if recovered != {v: g.labels[v] for v in range(g.n)} or decode(model) != g.edge_set():
                failures.append((i, strategy, "labels"))
    verdict("lossless reconstruction", not failures, f"300 runs, {len(failures)} failures", time.perf_counter() - t0, 30)


# ------------------------------------------------------------------ 2


def _random_taxonomy(rng):
    paths = []
    for r in range(int(rng.integers(1, 5))):
        depth = int(rng.integers(1, 5))
        stack = [f"r{r}"]
        for _ in range(depth - 1):
            stack = [f"{p}/c{c}" for p in stack for c in range(int(rng.integers(1, 4)))]
        paths += stack
    return paths


def _random_labels(rng, paths, n, pool=None):
    # include internal prefixes so that some nodes end above the leaf level
    choices = sorted({"/".join(p.split("/")[:d]) for p in paths for d in range(1, len(p.split("/")) + 1)})
    if pool is not None:
        choices = list(rng.choice(choices, size=min(pool, len(choices)), replace=False))
    return [str(choices[j]) for j in rng.integers(0, len(choices), size=n)]


def _random_structure(rng, kind, n, k=None):
    k = k or int(rng.integers(4, max(5, min(n, 12))))
    ids = [int(v) for v in rng.choice(n, size=k, replace=False)]
    if kind == "st":
        return Structure.star(ids[0], ids[1:]), ("st", [[ids[0]], ids[1:]])
    if kind in ("fc", "nc"):
        return Structure.clique(ids, near=kind == "nc"), (kind, [ids])
    if kind in ("bc", "nb"):
        h = k // 2
        return Structure.bipartite(ids[:h], ids[h:], near=kind == "nb"), (kind, [ids[:h], ids[h:]])
    return Structure.chain(ids), ("ch", [ids])


def _close(got, want):
    want = float(want)
    if want == 0:
        return abs(got) < 1e-12
    return abs(got - want) / abs(want) < 1e-9


KINDS = ("st", "fc", "nc", "bc", "nb", "ch")


def _draw(i):
    rng = np.random.default_rng([7, i])
    op = i % 13
    if op == 0:
        n = int(rng.integers(1, 10**12))
        return "universal", universal_int_code_len(n), oracle.universal(n)
    if op <= 6:
        kind = KINDS[op - 1]
        n = int(rng.integers(12, 5000))
        s, ref = _random_structure(rng, kind, n, int(rng.integers(4, 12)))
        ones = zeros = None
        if s.near:
            cells = len(oracle.cells(ref))
            ones = int(rng.integers(0, cells + 1))
            zeros = cells - ones
            s = Structure(s.kind, s.parts, ones=ones, zeros=zeros)
        return f"L_t {kind}", connectivity_cost(s, n), oracle.connectivity(ref, n, ones, zeros)
    paths = _random_taxonomy(rng)
    tax = LabelTaxonomy(paths)
    otax = oracle.Tax(tax.to_lines())
    n = int(rng.integers(10, 40))
    if op == 7:
        labels = _random_labels(rng, paths, n)
        g = HeteroGraph(tax, labels)
        s, ref = _random_structure(rng, KINDS[int(rng.integers(6))], n)
        k = int(rng.integers(1, tax.h + 1))
        return "L_a base", label_base_cost(s, g, k), oracle.base(otax, labels, oracle.nodes_of(ref), k)
    if op == 8:
        labels = _random_labels(rng, paths, n, pool=1)
        g = HeteroGraph(tax, labels)
        s, ref = _random_structure(rng, "fc", n)
        k = int(rng.integers(1, tax.h + 1))
        assert is_consistent(s, g, k)
        return "L_a consistent", label_consistent_cost(s, g, k), oracle.consistent(otax, labels, oracle.nodes_of(ref), k)
    if op == 9:
        pool = _random_labels(rng, paths, 2, pool=2)
        labels = [pool[0]] + [pool[1]] * (n - 1)
        g = HeteroGraph(tax, labels)
        ids = [0] + [int(v) for v in rng.choice(np.arange(1, n), size=int(rng.integers(3, 9)), replace=False)]
        s = Structure.star(ids[0], ids[1:])
        pair = None
        for k in range(tax.h, 0, -1):
            pair = oracle.role_labels(otax, labels, ids[:1], ids[1:], k)
            if pair is not None:
                break
        if pair is None:
            return "L_a role-consistent", 0.0, 0
        return "L_a role-consistent", label_role_consistent_cost(s, g, k), oracle.role_pair(otax, *pair)
    if op == 10:
        labels = _random_labels(rng, paths, n, pool=3)
        g = HeteroGraph(tax, labels)
        s, ref = _random_structure(rng, KINDS[int(rng.integers(6))], n)
        bits, h1, h2 = label_full_cost(s, g)
        want, w1, w2 = oracle.full_label(otax, labels, ref)
        assert (h1, h2) == (w1, w2)
        return "L_a full", bits, want
    if op == 11:
        domain = int(rng.integers(1, 10**9))
        ones = int(rng.integers(0, domain + 1))
        return "L(E+/-)", error_channel_cost(ones, domain), oracle.channel(ones, domain)
    if op == 12 and i % 2:
        labels = _random_labels(rng, paths, n)
        g = HeteroGraph(tax, labels)
        en = sorted(int(v) for v in rng.choice(n, size=int(rng.integers(1, n)), replace=False))
        return "L(E^a)", labeling_error_cost(en, g), oracle.labeling_error(otax, labels, en)
    labels = _random_labels(rng, paths, n, pool=4)
    p = float(rng.uniform(0.05, 0.3))
    edges = [(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < p]
    g = HeteroGraph(tax, labels, edges)
    picked = [_random_structure(rng, KINDS[int(rng.integers(6))], n) for _ in range(int(rng.integers(0, 4)))]
    got = model_cost([s for s, _ in picked], g).total
    return "model total", got, oracle.total(otax, labels, edges, [r for _, r in picked])


def test_cost_formulas_match_oracle(verdict):
    t0 = time.perf_counter()
    worst, bad, ops = 0.0, [], {}
    for i in range(1000):
        name, got, want = _draw(i)
        ops[name] = ops.get(name, 0) + 1
        want = float(want)
        err = abs(got - want) / abs(want) if want else abs(got)
        worst = max(worst, err)
        if not _close(got, want):
            bad.append((i, name, got, want))
    detail = f"1000 draws over {len(ops)} operations, worst relative error {worst:.2e}, {len(bad)} mismatches"
    verdict("cost oracle equivalence", not bad and len(ops) == 14, detail, time.perf_counter() - t0, 10)


# ------------------------------------------------------------------ 3


def _jaccard(a, b):
    a, b = set(a), set(b)
    return len(a & b) / len(a | b)


def test_planted_structure_recovery(verdict, tmp_path, capsys):
    t0 = time.perf_counter()
    d = tmp_path / "planted"
    assert main(["generate", "--out", str(d), "--background", "account=2000", "--seed", "0"]) == 0
    assert main(["summarize", "--graph", str(d), "--strategy", "vanilla", "--out", str(d / "model.txt"),
                 "--report", str(d / "cost.tsv")]) == 0
    capsys.readouterr()
    planted = io.read_manifest(d / "manifest.tsv")
    found, _ = io.read_model(d / "model.txt")
    recovered = sum(
        any(s.kind == p.kind and _jaccard(s.nodes.tolist(), p.nodes) >= 0.9 for s in found) for p in planted
    )
    report = io.read_cost_report(d / "cost.tsv")
    relative = float(report["total"]) / float(report["original_bits"])
    ok = len(planted) == 20 and recovered >= 16 and relative <= 0.8
    detail = f"{recovered}/{len(planted)} planted structures recovered, relative cost {relative:.3f}"
    verdict("planted-structure recovery", ok, detail, time.perf_counter() - t0, 10)


def test_planted_recovery_across_seeds():
    for seed in range(1, 5):
        g, _, planted = generate_synthetic(planted_config(seed=seed, background={"account": 2000}))
        summary = summarize(g, "vanilla", seed=seed)
        hit = sum(
            any(s.kind == p.kind and _jaccard(s.nodes.tolist(), p.nodes) >= 0.9 for s in summary.model.structures)
            for p in planted
        )
        assert hit >= 16 and summary.relative_cost <= 0.8


# ------------------------------------------------------------------ 4


def _trace(directory, capsys):
    assert main(["segment-trace", "--graph", str(directory)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    return [dict(zip(lines[0].split("\t"), line.split("\t"))) for line in lines[1:]]


def test_segmentation_fidelity(verdict, tmp_path, capsys):
    from hlsumm.encoding import local_cost

    t0 = time.perf_counter()
    g, star = spoke_star_fixture()
    io.save_graph(g, tmp_path / "mixed")
    rows = _trace(tmp_path / "mixed", capsys)
    result = next(r for r in rows if r["action"] == "result")
    sizes = sorted(int(x) for x in result["part_sizes"].split(","))
    first_split = next(r for r in rows if r["action"] == "split")
    whole = local_cost(g, star.nodes, star)
    final = min(float(r["cost_after"]) for r in rows if r["action"] in ("split", "keep"))
    gm, mirror = spoke_star_fixture(mixed=False)
    io.save_graph(gm, tmp_path / "consistent")
    mirror_rows = _trace(tmp_path / "consistent", capsys)
    mirror_result = next(r for r in mirror_rows if r["action"] == "result")
    ok = (
        len(sizes) > 1
        and abs(float(first_split["cost_before"]) - whole) < 1e-6
        and final < whole
        and not any(r["action"] == "split" for r in mirror_rows)
        and mirror_result["size"] == "1"
    )
    detail = f"star split into {sizes}, local cost {whole:.2f} -> {final:.2f} bits; consistent star kept whole"
    verdict("segmentation fidelity", ok, detail, time.perf_counter() - t0, 5)


# ------------------------------------------------------------------ 5


def _same(a, b):
    ma, ca = a
    mb, cb = b
    return (
        [s.key() for s in ma.structures] == [s.key() for s in mb.structures]
        and set(ma.errors.e_plus_edges()) == set(mb.errors.e_plus_edges())
        and set(ma.errors.e_minus_edges()) == set(mb.errors.e_minus_edges())
        and ca.total == cb.total
    )


def test_strategy_semantics(verdict):
    t0 = time.perf_counter()
    g, _, _ = generate_synthetic(planted_config(per_kind=40, seed=3, background={"account": 2000}))
    cands = summarize(g, "vanilla", seed=3).candidates
    vanilla = assemble(cands, "vanilla", g)
    topk_all = assemble(cands, "topk", g, k=len(cands))
    positive = [c for c in cands if c.gain > 0]
    benefit_pos = assemble(positive, "benefit", g)
    vanilla_pos = assemble(positive, "vanilla", g)
    top100 = assemble(cands, "topk", g, k=100)
    small = cands[:37]
    top100_small = assemble(small, "topk", g, k=100)
    ok = (
        _same(vanilla, topk_all)
        and _same(benefit_pos, vanilla_pos)
        and len(top100[0].structures) == min(100, len(cands))
        and len(top100_small[0].structures) == min(100, len(small))
    )
    detail = (
        f"|C|={len(cands)}: TopK(|C|) == Vanilla, Benefit == Vanilla on {len(positive)} positive-gain candidates, "
        f"TopK(100) emits {len(top100[0].structures)} and {len(top100_small[0].structures)} on |C|=37"
    )
    verdict("strategy semantics", ok and len(cands) > 100, detail, time.perf_counter() - t0, 10)


# ------------------------------------------------------------------ 6


@pytest.mark.slow
def test_scalability_shape(verdict):
    t0 = time.perf_counter()
    points = run_ladder()
    edges = [p.edges for p in points]
    seconds = [p.seconds for p in points]
    slope = loglog_slope(edges, seconds)
    ladder = ", ".join(f"{p.edges}e/{p.seconds:.1f}s" for p in points)
    verdict("scalability shape", slope <= 1.3, f"log-log slope {slope:.3f} over {ladder}", time.perf_counter() - t0, 900)


# ------------------------------------------------------------------ 7


def test_similarity_sanity(verdict, tmp_path, capsys):
    t0 = time.perf_counter()
    g, acc, (source, twin) = community_graph(seed=0)
    io.save_graph(g, tmp_path / "g")
    assert main(["similar", "--graph", str(tmp_path / "g"), "--node", str(twin), "--k", "1"]) == 0
    line = capsys.readouterr().out.strip().splitlines()[1].split("\t")
    clone_first = int(line[1]) == source and float(line[2]) >= 0.99

    model = summarize(g, "vanilla").model
    matrix = build_matrix(g, model, row_filter="account")
    svd = node_features(matrix, r=16)
    raw = raw_features(matrix)
    rng = np.random.default_rng(0)
    usable = [int(v) for v in matrix.rows if np.linalg.norm(raw.vectors[raw.row_of(int(v))]) > 0]
    queries = rng.choice(usable, size=20, replace=False)
    overlaps = []
    for q in queries:
        a = {m.node for m in top_similar(svd, int(q), 10)}
        b = {m.node for m in top_similar(raw, int(q), 10)}
        overlaps.append(len(a & b))
    total = sum(overlaps)
    ok = clone_first and total >= 160 and math.isclose(cosine(svd, source, twin), 1.0, abs_tol=1e-9)
    detail = (
        f"clone ranked first with cosine {float(line[2]):.4f}; top-10 agreement {total}/200 "
        f"(per-query min {min(overlaps)}/10)"
    )
    verdict("similarity sanity", ok, detail, time.perf_counter() - t0, 30)
