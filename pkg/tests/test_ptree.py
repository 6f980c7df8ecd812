import random

import pytest

from cwdist.graph import Graph, induced_subgraph
from cwdist.ptree import (LcaIndex, PartitionTree, StaleNodeError, bipartition_components, build_partition_tree,
                          centroid, choose_cut, is_module_partition, lca_build, lca_query,
                          minimal_partition, module_of_node, split_partition_tree, subtree_weights,
                          validate_partition_tree)
from instances import P4_TEXT, STAR_TEXT, from_text, named, random_instance


def names_of(g, blocks):
    return {frozenset(g.name(v) for v in b) for b in blocks}


def sets(*blocks):
    return {frozenset(b) for b in blocks}


@pytest.fixture
def p4():
    return from_text(P4_TEXT)


def node_with(t, g, blocks):
    for a in t.nodes():
        if names_of(g, t.partition(a)) == blocks:
            return a
    raise AssertionError(f"no node with partition {blocks}")


def test_p4_tree_shape(p4):
    _, g, t = p4
    root = t.root
    assert names_of(g, t.partition(root)) == sets("c", "d", "ab")
    kids = [names_of(g, t.partition(b)) for b in t.children[root]]
    assert sorted(kids, key=len) == [sets("d"), sets("c", "b", "a")]
    mid = node_with(t, g, sets("c", "b", "a"))
    grand = [names_of(g, t.partition(b)) for b in t.children[mid]]
    assert sorted(grand, key=len) == [sets("c"), sets("a", "b")]
    assert t.width == 3
    assert validate_partition_tree(t, g) is None


def test_single_leaf_tree():
    _, g, t = from_text("(v 1 a)")
    assert len(t) == 1 and t.partition(t.root) == [frozenset({0})]
    assert validate_partition_tree(t, g) is None


def test_star_tree_has_width_two():
    _, g, t = from_text(STAR_TEXT)
    assert t.width <= 2
    assert validate_partition_tree(t, g) is None


def test_validator_reports_compatibility_witness(p4):
    _, g, t = p4
    # put c into the same root block as a and b: edge c-d then forces a-d
    t.blocks[t.root] = [[(1, 0)], [(2, 0), (2, 1), (2, 2)]]
    t.up[2] = [1, 1, 1]
    bad = validate_partition_tree(t, g)
    assert bad.prop == "compatibility"
    u, v, at = bad.witness
    assert {g.name(u), g.name(v)} == {"c", "d"} and at == t.root


def test_validator_catches_structural_faults(p4):
    _, g, t = p4
    t.vertex[4], t.vertex[5] = t.vertex[5], t.vertex[5]
    assert validate_partition_tree(t, g).prop == "leaf"
    _, g, t = from_text(P4_TEXT)
    t.up[3] = [1, 0]
    assert validate_partition_tree(t, g).prop == "partition"
    _, g, t = from_text(P4_TEXT)
    assert validate_partition_tree(t, Graph(5)).prop == "leaf"


def test_centroid_examples(p4):
    _, g, t = p4
    c = centroid(t)
    assert names_of(g, t.partition(c)) == sets("c", "b", "a")
    # brute force: every node whose removal leaves parts of weight <= 2
    sub = subtree_weights(t)
    ok = [a for a in t.nodes()
          if all(2 * sub[b] <= 4 for b in t.children[a]) and 2 * (4 - sub[a]) <= 4]
    assert c == min(ok)
    _, _, t2 = from_text("(j 1 2 (u (v 1 a) (v 2 b)))")
    assert centroid(t2) == t2.root
    _, _, t1 = from_text("(v 1 a)")
    assert centroid(t1) == t1.root


def test_bipartition_star_and_p4(p4):
    # a root with four leaf children; unions are binary, so built by hand
    t = PartitionTree(0, {0: -1, 1: 0, 2: 0, 3: 0, 4: 0}, {0: [1, 2, 3, 4], 1: [], 2: [], 3: [], 4: []},
                      {1: 0, 2: 1, 3: 2, 4: 3}, {0: [[(1, 0), (2, 0), (3, 0), (4, 0)]],
                                                 1: [[]], 2: [[]], 3: [[]], 4: [[]]},
                      {0: [-1], 1: [0], 2: [0], 3: [0], 4: [0]})
    assert validate_partition_tree(t, Graph(4)) is None
    f1, f2 = bipartition_components(t, t.root)
    assert len(f1) == 2 and len(f2) == 2
    _, g, t = p4
    c = centroid(t)
    sub = subtree_weights(t)
    f1, f2 = bipartition_components(t, c)
    weight = lambda f: sum(sub[b] if b != t.parent[c] else 4 - sub[c] for b in f)
    assert sorted([weight(f1), weight(f2)]) == [2, 2]


def test_bipartition_single_component(p4):
    _, g, t = p4
    leaf = named(g, "a")[0]
    a_leaf = t.leaf_of()[leaf]
    f1, f2 = bipartition_components(t, a_leaf)
    assert f1 == [t.parent[a_leaf]] and f2 == []


def test_minimal_partition_examples(p4):
    _, g, _ = p4
    a, b, c, d = named(g, "a", "b", "c", "d")
    assert names_of(g, minimal_partition(g, [b, c])) == sets("b", "c")
    assert names_of(g, minimal_partition(g, [a, d])) == sets("a", "d")
    _, s, _ = from_text(STAR_TEXT)
    assert names_of(s, minimal_partition(s, named(s, "x", "y", "z"))) == sets("xyz")


def test_minimal_partition_order_is_canonical():
    g = Graph(5, [(0, 4), (2, 4), (1, 3)])
    assert minimal_partition(g, [2, 1, 0]) == [[0, 2], [1]]


def test_module_of_node_examples(p4):
    _, g, t = p4
    ab = node_with(t, g, sets("a", "b"))
    A, parts = module_of_node(t, ab)
    assert names_of(g, [A]) == sets("ab") and names_of(g, parts) == sets("a", "b")
    A, parts = module_of_node(t, t.root)
    assert A == set(range(4)) and parts == t.partition(t.root)
    d_leaf = t.leaf_of()[named(g, "d")[0]]
    A, parts = module_of_node(t, t.root, [d_leaf])
    assert names_of(g, [A]) == sets("d") and names_of(g, parts) == sets("d")
    mid = node_with(t, g, sets("c", "b", "a"))
    A, parts = module_of_node(t, mid, [ab], single_child_partition=False)
    assert names_of(g, parts) == sets("a", "b")


def test_lca_examples(p4):
    _, g, t = p4
    idx = lca_build(t)
    leaf = t.leaf_of()
    a, b = (leaf[v] for v in named(g, "a", "b"))
    assert names_of(g, t.partition(lca_query(idx, a, b))) == sets("a", "b")
    for x in t.nodes():
        assert lca_query(idx, x, x) == x
        assert lca_query(idx, t.root, x) == t.root
    with pytest.raises(StaleNodeError):
        lca_query(idx, 0, 999)


def test_lca_matches_naive_walk():
    for seed in range(10):
        _, g, t = random_instance(60, 4, seed)
        idx = LcaIndex(t)
        def ancestors(x):
            out = [x]
            while t.parent[x] >= 0:
                x = t.parent[x]
                out.append(x)
            return out
        nodes = t.nodes()
        rng = random.Random(seed)
        for _ in range(200):
            x, y = rng.choice(nodes), rng.choice(nodes)
            ay = set(ancestors(y))
            naive = next(z for z in ancestors(x) if z in ay)
            assert idx.lca(x, y) == naive == idx.lca(y, x)


def test_split_examples(p4):
    _, g, t = p4
    d_leaf = t.leaf_of()[named(g, "d")[0]]
    ta = split_partition_tree(t, t.root, [d_leaf], "A")
    assert len(ta) == 1 and names_of(g, ta.partition(ta.root)) == sets("d")
    tb = split_partition_tree(t, t.root, [d_leaf], "complement")
    assert names_of(g, tb.partition(tb.root)) == sets("c", "b", "a")
    assert tb.root == node_with(t, g, sets("c", "b", "a"))
    _, g2, t2 = from_text("(j 1 2 (u (v 1 a) (v 2 b)))")
    first = t2.children[t2.root][0]
    assert len(split_partition_tree(t2, t2.root, [first], "A")) == 1
    assert len(split_partition_tree(t2, t2.root, [first], "complement")) == 1


def test_split_does_not_mutate_input(p4):
    _, g, t = p4
    before = t.dump()
    c, prefix = choose_cut(t)
    split_partition_tree(t, c, prefix, "A")
    split_partition_tree(t, c, prefix, "complement")
    assert t.dump() == before


def random_trees(count, nmax=128):
    rng = random.Random(42)
    for i in range(count):
        n, k = rng.randint(2, nmax), rng.randint(2, 6)
        yield random_instance(n, k, seed=i, connected=rng.random() < 0.7)


def test_every_node_is_a_k_module():
    for _, g, t in random_trees(40):
        assert validate_partition_tree(t, g) is None
        for a in t.nodes():
            A, parts = module_of_node(t, a)
            assert is_module_partition(g, A, parts)
            assert len(minimal_partition(g, A)) <= len(parts) <= t.width


def test_child_prefix_modules():
    rng = random.Random(3)
    for _, g, t in random_trees(30):
        for a in t.nodes():
            kids = t.children[a]
            if len(kids) < 2:
                continue
            prefix = kids[:rng.randint(1, len(kids))]
            A, parts = module_of_node(t, a, prefix)
            assert is_module_partition(g, A, parts) and len(parts) <= t.width


def test_minimal_partition_is_coarsest():
    rng = random.Random(9)
    for _, g, _ in random_trees(30, 40):
        A = rng.sample(range(g.n), rng.randint(1, g.n))
        blocks = minimal_partition(g, A)
        assert sorted(v for b in blocks for v in b) == sorted(A)
        assert is_module_partition(g, A, blocks)
        for i in range(len(blocks)):
            for j in range(i + 1, len(blocks)):
                merged = [blocks[i] + blocks[j]]
                assert not is_module_partition(g, A, merged)


def test_centroid_and_bipartition_balance():
    for _, g, t in random_trees(60):
        sub = subtree_weights(t)
        n = sub[t.root]
        c = centroid(t)
        parts = [sub[b] for b in t.children[c]] + ([n - sub[c]] if t.parent[c] >= 0 else [])
        assert all(2 * w <= n for w in parts) or n == 2
        c, prefix = choose_cut(t)
        wa = sum(sub[b] for b in prefix)
        assert 0 < wa < n
        assert 3 * wa <= 2 * n + 2 and 3 * (n - wa) <= 2 * n + 2


def test_recursive_splits_stay_valid_and_keep_ancestry():
    for _, g, t in random_trees(40, 100):
        idx = LcaIndex(t)
        stack = [t]
        while stack:
            tu = stack.pop()
            verts = sorted(tu.vertex.values())
            sub, _, _ = induced_subgraph(g, verts)
            # validate against the induced subgraph by renaming leaves
            pos = {v: i for i, v in enumerate(verts)}
            renamed = split_copy(tu, pos)
            assert validate_partition_tree(renamed, sub) is None
            for a in tu.nodes():
                p = tu.parent[a]
                if p >= 0:
                    assert idx.is_strict_descendant(a, p)
            if len(verts) <= 1:
                continue
            c, prefix = choose_cut(tu)
            stack.append(split_partition_tree(tu, c, prefix, "A"))
            stack.append(split_partition_tree(tu, c, prefix, "complement"))


def split_copy(tu, pos):
    return PartitionTree(tu.root, dict(tu.parent), {a: list(c) for a, c in tu.children.items()},
                         {a: pos[v] for a, v in tu.vertex.items()}, tu.blocks, tu.up)
