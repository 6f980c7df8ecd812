import math
import random

import pytest

from cwdist.ecc import (Cluster, GadgetError, analyze_cut, base_threshold, build_gadget_pair,
                        cross_cut_far, cut_sides, diameter, median_set, solve_all, wiener_index)
from cwdist.graph import Graph, GraphError
from cwdist.oracle import brute_apsp, brute_ecc_td
from cwdist.ptree import LcaIndex, choose_cut
from instances import C5_TEXT, P4_TEXT, STAR_TEXT, TWO_K2_TEXT, from_text, named, random_instance

# The 8-vertex example graph with A = {0, 5, 6, 7} split in three blocks
# {0}, {5}, {6, 7}; every B_i meets every other, every pair of A-blocks is adjacent.
EIGHT_EDGES = [(7, 5), (5, 0), (0, 6), (2, 4), (4, 1), (1, 3),
              (2, 0), (0, 3), (3, 5), (5, 2), (2, 7), (7, 3), (3, 6), (6, 2),
              (0, 4), (4, 6), (6, 1), (1, 7), (7, 4), (1, 5)]
EIGHT = Graph(8, EIGHT_EDGES)
EIGHT_A = [0, 5, 6, 7]


def test_p4_and_star_aggregates():
    _, g, t = from_text(P4_TEXT)
    agg = solve_all(g, t)
    a, b, c, d = named(g, "a", "b", "c", "d")
    assert [agg.ecc[v] for v in (a, b, c, d)] == [3, 2, 2, 3]
    assert [agg.td[v] for v in (a, b, c, d)] == [6, 4, 4, 6]
    assert diameter(agg) == 3 and wiener_index(agg) == 20
    assert sorted(g.name(v) for v in median_set(agg)) == ["b", "c"]
    _, s, ts = from_text(STAR_TEXT)
    agg = solve_all(s, ts)
    c, x = named(s, "c", "x")
    assert (agg.ecc[c], agg.ecc[x], agg.td[c], agg.td[x]) == (1, 2, 3, 5)
    assert diameter(agg) == 2 and wiener_index(agg) == 18 and median_set(agg) == [c]


def test_single_vertex():
    _, g, t = from_text("(v 1 a)")
    agg = solve_all(g, t)
    assert (diameter(agg), wiener_index(agg), median_set(agg)) == (0, 0, [0])


@pytest.mark.parametrize("alpha", [0.001, 0.25, 1.0, 4.0])
def test_small_examples_with_forced_recursion(alpha):
    for text in (P4_TEXT, STAR_TEXT, C5_TEXT):
        _, g, t = from_text(text)
        agg = solve_all(g, t, alpha=alpha, audit=True)
        assert (agg.ecc, agg.td) == brute_ecc_td(g)
        assert agg.stats.violations == []


def test_rejects_bad_input():
    _, g, t = from_text(TWO_K2_TEXT)
    with pytest.raises(GraphError, match="disconnected"):
        solve_all(g, t)
    _, g, t = from_text(P4_TEXT)
    with pytest.raises(GraphError, match="does not fit"):
        solve_all(Graph(4, [(0, 1)]), t)
    with pytest.raises(GraphError, match="leaves"):
        solve_all(Graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)]), t)
    with pytest.raises(ValueError):
        solve_all(g, t, alpha=0)


def test_base_threshold():
    assert base_threshold(1, 3, 1.0) == 3
    assert base_threshold(1024, 2, 1.0) == 40
    assert base_threshold(1024, 2, 0.01) == 3


def test_cut_sides_without_clusters():
    _, g, t = from_text(P4_TEXT)
    c, prefix = choose_cut(t)
    assert cut_sides([], c, prefix, LcaIndex(t)) == ([], [])


def test_cut_sides_rule():
    _, g, t = random_instance(40, 3, seed=1)
    lca = LcaIndex(t)
    c, prefix = choose_cut(t)
    below = t.subtree(prefix[0])[-1]          # a descendant of a_1
    above = t.parent[c] if t.parent[c] >= 0 else c
    others = [b for b in t.children[c] if b not in prefix]
    clusters = [Cluster([0], below), Cluster([1], above), Cluster([2], c)]
    if others:
        clusters.append(Cluster([3], others[0]))
    with_a, rest = cut_sides(clusters, c, prefix, lca)
    assert with_a == [0]
    assert rest == list(range(1, len(clusters)))


def test_three_block_gadgets():
    cut = analyze_cut(EIGHT, EIGHT_A)
    assert cut.blocks == [[0], [5], [6, 7]] and cut.k_prime == 3
    gp = build_gadget_pair(EIGHT, EIGHT_A, k=3, cut=cut)
    assert gp.b_weights == {(0, 1): 0, (0, 2): 0, (1, 2): 0}
    assert gp.a_weights == {(0, 1): 1, (0, 2): 1, (1, 2): 1}
    # three matching edges among the nine new vertices on each side
    for h, base in ((gp.H_A, 4), (gp.H_B, 4)):
        new = range(base, base + 9)
        inner = {(u, v) for u in new for v in h.adj[u] if v in new}
        assert len(inner) == 2 * 3
    assert_preserves(EIGHT, gp)


def test_degenerate_single_block_gadget():
    _, s, _ = from_text(STAR_TEXT)
    x = named(s, "x")[0]
    gp = build_gadget_pair(s, [x])
    assert gp.k_prime == 1 and gp.b_weights == {}
    assert gp.H_A.n == 2 and gp.H_A.edges() == [(0, 1, 1)]
    assert_preserves(s, gp)


def test_gadget_rejects_weighted_cut_and_wide_side():
    g = Graph(3, [(0, 1, 2), (1, 2, 1)])
    with pytest.raises(GadgetError, match="weighted"):
        build_gadget_pair(g, [0])
    with pytest.raises(GadgetError, match="module"):
        build_gadget_pair(EIGHT, EIGHT_A, k=2)


def assert_preserves(H, gp):
    d = brute_apsp(H)
    da, db = brute_apsp(gp.H_A), brute_apsp(gp.H_B)
    for ids, d2 in ((gp.side_ids, da), (gp.rest_ids, db)):
        for i, u in enumerate(ids):
            for j, v in enumerate(ids):
                assert d2[i][j] == d[u][v]


def test_gadgets_preserve_distances_on_tree_cuts():
    rng = random.Random(6)
    for i in range(25):
        _, g, t = random_instance(rng.randint(4, 60), rng.randint(2, 5), seed=200 + i)
        a = rng.choice([x for x in t.nodes() if t.children[x]])
        kids = t.children[a]
        side = [v for b in kids[:rng.randint(1, len(kids))] for v in t.vertices_under(b)]
        if len(side) == g.n:
            continue
        gp = build_gadget_pair(g, side, k=t.width)
        assert_preserves(g, gp)


def test_cross_cut_p4():
    _, g, _ = from_text(P4_TEXT)
    a, b, c, d = named(g, "a", "b", "c", "d")
    res = cross_cut_far(g, [a, b], [a, b], [c, d])
    assert (res.a_max, res.a_sum, res.a_cnt) == ([3, 2], [5, 3], [2, 2])
    assert (res.b_max, res.b_sum) == ([2, 3], [3, 5])
    single = cross_cut_far(g, [a, b], [a], [d])
    assert (single.a_max, single.a_sum, single.a_cnt) == ([3], [3], [1])
    empty = cross_cut_far(g, [a, b], [a], [])
    assert empty.a_max == [None] and empty.a_sum == [0]


def check_cross(H, side, a_sub, b_sub):
    d = brute_apsp(H)
    res = cross_cut_far(H, side, a_sub, b_sub)
    for u, mx, sm in zip(a_sub, res.a_max, res.a_sum):
        assert mx == max(d[u][v] for v in b_sub) and sm == sum(d[u][v] for v in b_sub)
    for v, mx, sm in zip(b_sub, res.b_max, res.b_sum):
        assert mx == max(d[v][u] for u in a_sub) and sm == sum(d[v][u] for u in a_sub)


def test_cross_cut_matches_oracle():
    rng = random.Random(12)
    for i in range(30):
        _, g, t = random_instance(rng.randint(4, 80), rng.randint(2, 5), seed=300 + i)
        c, prefix = choose_cut(t)
        side = sorted(v for b in prefix for v in t.vertices_under(b))
        rest = [v for v in range(g.n) if v not in set(side)]
        a_sub = rng.sample(side, rng.randint(1, len(side)))
        b_sub = rng.sample(rest, rng.randint(1, len(rest)))
        check_cross(g, side, a_sub, b_sub)


def test_deep_cuts_on_weighted_gadget_graphs():
    # every cut met during a deep recursion: gadget graphs carry weighted
    # (possibly zero) edges and clusters on both sides
    seen = []

    def hook(H, side, gp):
        seen.append((H, side))

    for i in range(6):
        _, g, t = random_instance(70, 3 + i % 3, seed=400 + i)
        solve_all(g, t, alpha=0.001, cut_hook=hook)
    deep = [(H, side) for H, side in seen if H.wts is not None]
    assert len(deep) > 20
    rng = random.Random(1)
    for H, side in rng.sample(deep, 20):
        s = set(side)
        rest = [v for v in range(H.n) if v not in s]
        check_cross(H, side, side, rest)
        assert_preserves(H, build_gadget_pair(H, side))


def test_random_instances_match_oracle_for_every_alpha():
    rng = random.Random(21)
    for i in range(25):
        n, k = rng.randint(4, 150), rng.randint(2, 6)
        _, g, t = random_instance(n, k, seed=500 + i)
        ref = brute_ecc_td(g)
        for alpha in (0.001, 0.25, 1.0):
            agg = solve_all(g, t, alpha=alpha, audit=True, seed=i)
            assert (agg.ecc, agg.td) == ref
            assert agg.stats.violations == []


def test_recursion_bounds():
    for i in range(10):
        _, g, t = random_instance(200, 2 + i % 5, seed=600 + i)
        st = solve_all(g, t, alpha=0.001).stats
        k = t.width
        assert st.cuts > 0
        assert st.depth <= math.ceil(math.log(g.n, 1.5)) + 1
        assert all(s <= g.n for s in st.level_u.values())
        assert all(c <= r for r, c in st.level_clusters.items())
        assert st.max_cluster_size <= k * k
        assert st.max_block_count <= k
