"""Graph builders shared by the unit and acceptance tests."""
from __future__ import annotations

import numpy as np

from hlsumm.encoding import Structure
from hlsumm.taxonomy import HeteroGraph, LabelTaxonomy, bns_taxonomy

SMALL_PATHS = ["a/x", "a/y", "b"]
OTHER_DEALERS = ["force master", "destroyer", "summoner", "blade dancer"]
TANKERS = ["blade master", "kung fu master", "warden"]


def small_graph(n, edges, label="a/x"):
    return HeteroGraph(LabelTaxonomy(SMALL_PATHS), [label] * n, edges)


def complete(n):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def complete_bipartite(a, b):
    return [(i, a + j) for i in range(a) for j in range(b)]


def spoke_star_fixture(spokes=200, zen_share=0.37, dealer_share=0.55, background=300, mixed=True):
    """Equipment hub with character spokes, plus unconnected account nodes.

    With ``mixed`` the spokes are zen archers (``zen_share``), other dealers
    (up to ``dealer_share`` of all spokes) and tankers; otherwise every spoke
    is a zen archer. Returns ``(graph, star)``.
    """
    labels = ["equipment/soul"]
    if mixed:
        zen = round(spokes * zen_share)
        dealers = round(spokes * dealer_share) - zen
        rest = spokes - zen - dealers
        labels += ["character/dealer/zen archer"] * zen
        labels += [f"character/dealer/{OTHER_DEALERS[i % 4]}" for i in range(dealers)]
        labels += [f"character/tanker/{TANKERS[i % 3]}" for i in range(rest)]
    else:
        labels += ["character/dealer/zen archer"] * spokes
    labels += ["account"] * background
    g = HeteroGraph(bns_taxonomy(), labels, [(0, i) for i in range(1, spokes + 1)])
    return g, Structure.star(0, range(1, spokes + 1))


def community_graph(communities=8, per=30, accounts=30, pmix=0.2, seed=0, clone=True):
    """Equipment hubs with character spokes, accounts touching one community each.

    Each account links to two characters of its community, sometimes one
    random character elsewhere, and accounts of a community are lightly
    interlinked. With ``clone`` one extra account copies the neighbourhood of
    an account of modal degree. Returns ``(graph, accounts, (source, clone))``.
    """
    rng = np.random.default_rng(seed)
    tax = bns_taxonomy()
    chars = [p for p in tax.leaf_paths() if p[0] == "character"]
    equip = [p for p in tax.leaf_paths() if p[0] == "equipment"]
    labels, edges, members = [], [], []
    for c in range(communities):
        hub = len(labels)
        labels.append("/".join(equip[c % len(equip)]))
        cs = []
        for _ in range(per):
            v = len(labels)
            labels.append("/".join(chars[c % len(chars)]))
            edges.append((hub, v))
            cs.append(v)
        members.append(cs)
    every = np.concatenate(members)
    acc = []
    for c in range(communities):
        mine = []
        for _ in range(accounts):
            a = len(labels)
            labels.append("account")
            acc.append(a)
            mine.append(a)
            for v in rng.choice(members[c], 2, replace=False):
                edges.append((a, int(v)))
            if rng.random() < pmix:
                edges.append((a, int(rng.choice(every))))
        for _ in range(accounts):
            x, y = rng.choice(mine, 2, replace=False)
            edges.append((int(x), int(y)))
    pair = None
    if clone:
        g0 = HeteroGraph(tax, labels, edges)
        # an ordinary account (modal degree), so the pair is not a hub of its own
        degs = g0.degrees[acc]
        modal = int(np.bincount(degs).argmax())
        source = int(acc[np.flatnonzero(degs == modal)[0]])
        twin = len(labels)
        labels.append("account")
        edges += [(twin, int(w)) for w in g0.neighbors(source)]
        acc.append(twin)
        pair = (source, twin)
    return HeteroGraph(tax, labels, edges), np.asarray(acc), pair


def random_labeled_graph(rng, n=None):
    """Random taxonomy (1-3 levels, mixed depths) and an Erdos-Renyi-plus-cliques graph."""
    n = int(n or rng.integers(50, 301))
    roots = int(rng.integers(1, 4))
    paths = []
    for r in range(roots):
        depth = int(rng.integers(1, 4))
        if depth == 1:
            paths.append(f"r{r}")
            continue
        for c in range(int(rng.integers(1, 4))):
            if depth == 2:
                paths.append(f"r{r}/c{c}")
            else:
                for d in range(int(rng.integers(1, 3))):
                    paths.append(f"r{r}/c{c}/d{d}")
    leaves = paths
    labels = [leaves[i] for i in rng.integers(0, len(leaves), size=n)]
    p = float(rng.uniform(0.005, 0.05))
    m = rng.random((n, n)) < p
    iu = np.triu_indices(n, 1)
    edges = list(zip(iu[0][m[iu]], iu[1][m[iu]]))
    for _ in range(int(rng.integers(0, 4))):
        members = rng.choice(n, size=int(rng.integers(4, 10)), replace=False)
        edges += [(int(a), int(b)) for i, a in enumerate(members) for b in members[i + 1:]]
    for _ in range(int(rng.integers(0, 4))):
        hub = int(rng.integers(n))
        spokes = rng.choice(n, size=int(rng.integers(3, 15)), replace=False)
        edges += [(hub, int(s)) for s in spokes if s != hub]
    return HeteroGraph(LabelTaxonomy(paths), labels, np.asarray(edges, dtype=np.int64).reshape(-1, 2))
