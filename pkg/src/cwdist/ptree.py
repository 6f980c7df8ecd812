"""Partition trees stored as representation graphs.

Every node ``a`` keeps its partition ``f(a)`` as a list of blocks; a block of
an inner node is a list of arcs ``(child, child_block)`` to the child blocks
it contains, and ``up[a][b]`` points back to the containing block of the
parent.  A leaf has the single block ``{vertex[a]}``.  Node ids are assigned
in preorder on the tree built from the expression and survive every split,
so an ancestor always has a smaller id than its descendants.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .graph import Graph
from .kexpr import JOIN, RELAB, UNION, VERT, KExpression, _postorder


class PartitionTree:
    __slots__ = ("root", "parent", "children", "vertex", "blocks", "up")

    def __init__(self, root: int, parent: dict[int, int], children: dict[int, list[int]],
                 vertex: dict[int, int], blocks: dict[int, list[list[tuple[int, int]]]],
                 up: dict[int, list[int]]):
        self.root = root
        self.parent = parent
        self.children = children
        self.vertex = vertex
        self.blocks = blocks
        self.up = up

    # -- navigation ---------------------------------------------------------
    def __len__(self) -> int:
        return len(self.parent)

    def nodes(self) -> list[int]:
        """Nodes in preorder."""
        out, stack = [], [self.root]
        children = self.children
        while stack:
            a = stack.pop()
            out.append(a)
            stack.extend(reversed(children[a]))
        return out

    def is_leaf(self, a: int) -> bool:
        return not self.children[a]

    def subtree(self, a: int) -> list[int]:
        out, stack = [], [a]
        children = self.children
        while stack:
            b = stack.pop()
            out.append(b)
            stack.extend(children[b])
        return out

    def vertices_under(self, a: int) -> list[int]:
        vertex = self.vertex
        return [vertex[b] for b in self.subtree(a) if b in vertex]

    def block_vertices(self, a: int, i: int) -> list[int]:
        out, stack = [], [(a, i)]
        blocks, vertex = self.blocks, self.vertex
        while stack:
            b, j = stack.pop()
            if b in vertex:
                out.append(vertex[b])
            else:
                stack.extend(blocks[b][j])
        return out

    def partition(self, a: int) -> list[frozenset[int]]:
        """``f(a)`` in stored block order."""
        return [frozenset(self.block_vertices(a, i)) for i in range(len(self.blocks[a]))]

    def block_of(self, v_leaf: int, a: int) -> int:
        """Index of the block of ancestor ``a`` that contains leaf ``v_leaf``'s vertex."""
        b, i = v_leaf, 0
        while b != a:
            i = self.up[b][i]
            b = self.parent[b]
            if b < 0:
                raise ValueError(f"node {a} is not an ancestor of {v_leaf}")
        return i

    @property
    def width(self) -> int:
        return max(len(bl) for bl in self.blocks.values())

    def leaf_of(self) -> dict[int, int]:
        return {v: a for a, v in self.vertex.items()}

    def dump(self, names: Sequence[str] | None = None) -> str:
        """Text form of the representation graph, one block per line."""
        nm = (lambda v: names[v]) if names is not None else str
        lines = []
        for a in self.nodes():
            par = self.parent[a]
            head = f"node {a} parent {par if par >= 0 else '-'}"
            if a in self.vertex:
                lines.append(f"{head} leaf {nm(self.vertex[a])}")
                continue
            lines.append(f"{head} children {' '.join(map(str, self.children[a]))}")
            for i, arcs in enumerate(self.blocks[a]):
                members = ",".join(sorted(nm(v) for v in self.block_vertices(a, i)))
                arcs_s = " ".join(f"{b}.{j}" for b, j in arcs)
                lines.append(f"  block {a}.{i} {{{members}}} -> {arcs_s}")
        return "\n".join(lines) + "\n"


def _copy_tree(t: PartitionTree, keep: Iterable[int]) -> PartitionTree:
    keep = list(keep)
    return PartitionTree(
        t.root,
        {a: t.parent[a] for a in keep},
        {a: list(t.children[a]) for a in keep},
        {a: t.vertex[a] for a in keep if a in t.vertex},
        {a: t.blocks[a] for a in keep},
        {a: t.up[a] for a in keep},
    )


# -- construction ------------------------------------------------------------

def build_partition_tree(e: KExpression) -> PartitionTree:
    """Contract the non-branching nodes of the syntactic tree.

    ``f`` of a union node is the label classes right after the union.
    """
    ids = {name: i for i, name in enumerate(e.names)}
    # temporary node ids in creation order; renumbered to preorder below
    t_children: list[list[int]] = []
    t_blocks: list[list[list[tuple[int, int]]]] = []
    t_vertex: dict[int, int] = {}
    state: dict[int, tuple[int, dict[int, list[int]]]] = {}
    for node in _postorder(e.root):
        if node.kind == VERT:
            a = len(t_children)
            t_children.append([])
            t_blocks.append([[]])
            t_vertex[a] = ids[node.name]
            state[id(node)] = (a, {node.i: [0]})
        elif node.kind == UNION:
            kids = [state.pop(id(k)) for k in node.kids]
            a = len(t_children)
            t_children.append([b for b, _ in kids])
            labels = sorted({lab for _, cls in kids for lab in cls})
            blocks = []
            for lab in labels:
                arcs = [(b, j) for b, cls in kids for j in cls.get(lab, ())]
                blocks.append(arcs)
            t_blocks.append(blocks)
            state[id(node)] = (a, {lab: [i] for i, lab in enumerate(labels)})
        elif node.kind == JOIN:
            state[id(node)] = state.pop(id(node.kids[0]))
        elif node.kind == RELAB:
            a, cls = state.pop(id(node.kids[0]))
            cls = dict(cls)
            moved = cls.pop(node.i)
            cls[node.j] = cls.get(node.j, []) + moved
            state[id(node)] = (a, cls)
    troot, _ = state.pop(id(e.root))

    order, stack = [], [troot]
    while stack:
        a = stack.pop()
        order.append(a)
        stack.extend(reversed(t_children[a]))
    new_id = {a: i for i, a in enumerate(order)}

    parent = {0: -1}
    children: dict[int, list[int]] = {}
    vertex: dict[int, int] = {}
    for a in order:
        na = new_id[a]
        children[na] = [new_id[b] for b in t_children[a]]
        for b in children[na]:
            parent[b] = na
        if a in t_vertex:
            vertex[na] = t_vertex[a]

    # canonical block order: by smallest vertex, computed bottom-up
    blocks: dict[int, list[list[tuple[int, int]]]] = {}
    up: dict[int, list[int]] = {}
    min_v: dict[int, list[int]] = {}
    pos: dict[int, list[int]] = {}      # old block index -> sorted index
    for a in reversed(order):
        na = new_id[a]
        if na in vertex:
            blocks[na] = [[]]
            min_v[na] = [vertex[na]]
            pos[na] = [0]
            continue
        raw = [[(new_id[b], pos[new_id[b]][j]) for b, j in arcs] for arcs in t_blocks[a]]
        mins = [min(min_v[b][j] for b, j in arcs) for arcs in raw]
        perm = sorted(range(len(raw)), key=mins.__getitem__)
        blocks[na] = [sorted(raw[i], key=lambda bj: min_v[bj[0]][bj[1]]) for i in perm]
        min_v[na] = [mins[i] for i in perm]
        inv = [0] * len(perm)
        for new, old in enumerate(perm):
            inv[old] = new
        pos[na] = inv
    for na, bl in blocks.items():
        for i, arcs in enumerate(bl):
            for b, j in arcs:
                up.setdefault(b, [-1] * len(blocks[b]))[j] = i
    up[0] = [-1] * len(blocks[0])
    return PartitionTree(0, parent, children, vertex, blocks, up)


# -- validation ------------------------------------------------------------------

@dataclass
class Violation:
    prop: str
    message: str
    witness: tuple = ()

    def __str__(self) -> str:
        return f"{self.prop}: {self.message} {self.witness}"


def validate_partition_tree(t: PartitionTree, g: Graph) -> Violation | None:
    """Exhaustive check of the partition-tree axioms against ``g``.

    Returns ``None`` when everything holds, else the first violation found.
    """
    nodes = t.nodes()
    if len(nodes) != len(t.parent):
        return Violation("structure", "tree is not connected from the root", ())
    # leaf bijection
    seen: dict[int, int] = {}
    for a in nodes:
        if t.children[a]:
            if len(t.children[a]) < 2:
                return Violation("structure", "inner node with fewer than two children", (a,))
            if a in t.vertex:
                return Violation("structure", "inner node carries a vertex", (a,))
        else:
            if a not in t.vertex:
                return Violation("leaf", "leaf without a vertex", (a,))
            v = t.vertex[a]
            if v in seen:
                return Violation("leaf", "vertex on two leaves", (v, seen[v], a))
            if not 0 <= v < g.n:
                return Violation("leaf", "vertex out of range", (v, a))
            seen[v] = a
            if len(t.blocks[a]) != 1:
                return Violation("leaf", "leaf partition is not {{v}}", (a,))
    if len(seen) != g.n:
        missing = sorted(set(range(g.n)) - set(seen))
        return Violation("leaf", "vertices without a leaf", tuple(missing[:5]))
    # partition consistency and refinement: each child block sits in exactly
    # one parent block, and every block is non-empty
    for a in nodes:
        if not t.children[a]:
            continue
        kids = set(t.children[a])
        hits: dict[tuple[int, int], int] = {}
        for i, arcs in enumerate(t.blocks[a]):
            if not arcs:
                return Violation("partition", "empty block", (a, i))
            for b, j in arcs:
                if b not in kids or not 0 <= j < len(t.blocks[b]):
                    return Violation("refinement", "arc to a non-child block", (a, i, b, j))
                if (b, j) in hits:
                    return Violation("refinement", "child block in two parent blocks",
                                     (b, j, hits[(b, j)], i))
                hits[(b, j)] = i
        for b in kids:
            for j in range(len(t.blocks[b])):
                if (b, j) not in hits:
                    return Violation("refinement", "child block not contained in a parent block",
                                     (b, j, a))
                if t.up[b][j] != hits[(b, j)]:
                    return Violation("partition", "up-arc disagrees with down-arc", (b, j))
    # compatibility: every edge is handled at the lca of its two leaves
    leaf = t.leaf_of()
    depth = {t.root: 0}
    for a in nodes:
        for b in t.children[a]:
            depth[b] = depth[a] + 1
    adj = [set(r) for r in g.adj]
    cache: dict[tuple[int, int, int], bool] = {}
    for u, v, _ in g.edges():
        x, y, bx, by = leaf[u], leaf[v], 0, 0
        while depth[x] > depth[y]:
            bx, x = t.up[x][bx], t.parent[x]
        while depth[y] > depth[x]:
            by, y = t.up[y][by], t.parent[y]
        while x != y:
            bx, x = t.up[x][bx], t.parent[x]
            by, y = t.up[y][by], t.parent[y]
        if bx == by:
            return Violation("compatibility", "adjacent vertices share a block at their lca",
                             (u, v, x))
        key = (x, min(bx, by), max(bx, by))
        ok = cache.get(key)
        if ok is None:
            X = t.block_vertices(x, bx)
            Y = t.block_vertices(x, by)
            ok = all(yy in adj[xx] for xx in X for yy in Y)
            cache[key] = ok
        if not ok:
            return Violation("compatibility", "blocks of an edge are not completely joined",
                             (u, v, x))
    return None


# -- centroids ---------------------------------------------------------------

def _weights(t: PartitionTree, nodes, w) -> dict[int, int]:
    if w is None:
        return {a: (0 if t.children[a] else 1) for a in nodes}
    if callable(w):
        return {a: w(a) for a in nodes}
    return {a: w[a] for a in nodes}


def subtree_weights(t: PartitionTree, w: Mapping[int, int] | Callable | None = None) -> dict[int, int]:
    nodes = t.nodes()
    ws = _weights(t, nodes, w)
    sub = dict(ws)
    parent = t.parent
    for a in reversed(nodes):
        p = parent[a]
        if p >= 0:
            sub[p] += sub[a]
    return sub


def centroid(t: PartitionTree, w: Mapping[int, int] | Callable | None = None) -> int:
    """A ``w``-centroid; smallest node id on ties, the root when ``w(T) = 2``.

    ``w`` defaults to the leaf indicator.
    """
    sub = subtree_weights(t, w)
    total = sub[t.root]
    if total < 1:
        raise ValueError("tree has zero total weight")
    if total == 2 and w is None:
        return t.root
    best = None
    for a in t.nodes():
        worst = total - sub[a]
        for b in t.children[a]:
            if sub[b] > worst:
                worst = sub[b]
        if 2 * worst <= total and (best is None or a < best):
            best = a
    return best


def bipartition_components(t: PartitionTree, c: int,
                           w: Mapping[int, int] | Callable | None = None,
                           ) -> tuple[list[int], list[int]]:
    """Split the components of ``T - c`` into two forests of weight <= 2w(T)/3.

    A component is named by its root: a child of ``c``, or ``parent(c)`` for
    the part above ``c``.  Components are scanned children first (stored
    order), then the upper part.
    """
    sub = subtree_weights(t, w)
    total = sub[t.root]
    wc = sub[c] - sum(sub[b] for b in t.children[c])
    comps = [(b, sub[b]) for b in t.children[c]]
    if t.parent[c] >= 0:
        comps.append((t.parent[c], total - sub[c]))
    if len(comps) <= 1:
        return [b for b, _ in comps], []
    if 3 * wc > total:
        return [comps[0][0]], [b for b, _ in comps[1:]]
    run, i0 = 0, None
    for i, (_, cw) in enumerate(comps):
        run += cw
        if 3 * run > 2 * total:
            i0 = i
            break
    if i0 is None:
        # only reachable for weights that are not centroid-balanced
        return [b for b, _ in comps[:-1]], [comps[-1][0]]
    tail = sum(cw for _, cw in comps[i0:])
    if 3 * tail <= 2 * total:
        return [b for b, _ in comps[:i0]], [b for b, _ in comps[i0:]]
    return [comps[i0][0]], [b for i, (b, _) in enumerate(comps) if i != i0]


def choose_cut(t: PartitionTree) -> tuple[int, list[int]]:
    """Centroid ``c`` and the children of ``c`` whose subtrees form side ``A``.

    Side ``A`` is the forest that does not contain the part above ``c``.
    """
    c = centroid(t)
    f1, f2 = bipartition_components(t, c)
    up_root = t.parent[c]
    side = f2 if up_root in f1 else f1
    chosen = set(side)
    return c, [b for b in t.children[c] if b in chosen]


# -- k-modules ---------------------------------------------------------------

def minimal_partition(g: Graph, A: Iterable[int]) -> list[list[int]]:
    """Coarsest partition of ``A`` into blocks with equal neighbourhoods outside ``A``.

    Partition refinement on the twin classes of ``G - E(A)``: start from one
    class and split it by the neighbourhood of every outside vertex.  Blocks
    are sorted, and ordered by their smallest vertex.
    """
    A = list(A)
    if not A:
        return []
    in_a = set(A)
    cls_of = {v: 0 for v in A}
    classes: list[set[int]] = [set(A)]
    outside: dict[int, list[int]] = {}
    for v in A:
        for x in g.adj[v]:
            if x not in in_a:
                outside.setdefault(x, []).append(v)
    for x, hit in outside.items():
        split: dict[int, list[int]] = {}
        for v in hit:
            split.setdefault(cls_of[v], []).append(v)
        for ci, part in split.items():
            if len(part) == len(classes[ci]):
                continue
            new = set(part)
            classes[ci] -= new
            nci = len(classes)
            classes.append(new)
            for v in part:
                cls_of[v] = nci
    out = [sorted(c) for c in classes if c]
    out.sort(key=lambda b: b[0])
    return out


def module_of_node(t: PartitionTree, a: int, prefix: Sequence[int] | None = None,
                   single_child_partition: bool = True) -> tuple[set[int], list[frozenset[int]]]:
    """Vertex set and k-module partition attached to a node or a child prefix.

    With ``prefix`` (children of ``a``) the set is the union of their vertex
    sets and the partition is ``{X & A : X in f(a)}``; when the prefix has a
    single child and ``single_child_partition`` is set, ``f`` of that child is
    returned instead.
    """
    if prefix is None:
        parts = t.partition(a)
        return set().union(*parts), parts
    for b in prefix:
        if t.parent.get(b) != a:
            raise ValueError(f"node {b} is not a child of {a}")
    if len(prefix) == 1 and single_child_partition:
        parts = t.partition(prefix[0])
        return set().union(*parts), parts
    A: set[int] = set()
    for b in prefix:
        A.update(t.vertices_under(b))
    parts = [frozenset(X & A) for X in t.partition(a)]
    return A, [X for X in parts if X]


def is_module_partition(g: Graph, A: Iterable[int], parts: Iterable[Iterable[int]]) -> bool:
    """Check that every part has one common neighbourhood outside ``A``."""
    A = set(A)
    for part in parts:
        ref = None
        for v in part:
            nb = frozenset(x for x in g.adj[v] if x not in A)
            if ref is None:
                ref = nb
            elif nb != ref:
                return False
    return True


# -- least common ancestors -------------------------------------------------

class StaleNodeError(KeyError):
    pass


class LcaIndex:
    """Euler tour + sparse table over a fixed rooted tree; O(1) queries."""

    def __init__(self, t: PartitionTree):
        euler, depth_seq = [], []
        first: dict[int, int] = {}
        depth = {t.root: 0}
        stack = [(t.root, 0)]
        while stack:
            a, k = stack.pop()
            if k == 0:
                first[a] = len(euler)
            euler.append(a)
            depth_seq.append(depth[a])
            kids = t.children[a]
            if k < len(kids):
                stack.append((a, k + 1))
                b = kids[k]
                depth[b] = depth[a] + 1
                stack.append((b, 0))
        self.first = first
        self.depth = depth
        self.euler = np.asarray(euler, dtype=np.int64)
        d = np.asarray(depth_seq, dtype=np.int64)
        m = len(euler)
        table = [np.arange(m, dtype=np.int64)]
        j = 1
        while (1 << j) <= m:
            prev = table[-1]
            half = 1 << (j - 1)
            left, right = prev[:m - (1 << j) + 1], prev[half:half + m - (1 << j) + 1]
            table.append(np.where(d[left] <= d[right], left, right))
            j += 1
        self._d = d
        self._table = [tab.tolist() for tab in table]
        self._dl = d.tolist()
        self._el = self.euler.tolist()

    def __contains__(self, a: int) -> bool:
        return a in self.first

    def lca(self, a: int, b: int) -> int:
        try:
            i, j = self.first[a], self.first[b]
        except KeyError as exc:
            raise StaleNodeError(f"node {exc.args[0]} is not in the indexed tree") from None
        if i > j:
            i, j = j, i
        k = (j - i + 1).bit_length() - 1
        row = self._table[k]
        x, y = row[i], row[j - (1 << k) + 1]
        return self._el[x] if self._dl[x] <= self._dl[y] else self._el[y]

    def is_strict_descendant(self, s: int, c: int) -> bool:
        return s != c and self.lca(s, c) == c


def lca_build(t: PartitionTree) -> LcaIndex:
    return LcaIndex(t)


def lca_query(idx: LcaIndex, a: int, b: int) -> int:
    return idx.lca(a, b)


# -- splits ------------------------------------------------------------------

def split_partition_tree(t: PartitionTree, c: int, prefix: Sequence[int], side: str) -> PartitionTree:
    """Partition tree of ``G[A]`` (``side="A"``) or ``G - A`` (``side="complement"``).

    ``A`` is the vertex set under the children ``prefix`` of ``c``.  Inputs
    are never mutated; surviving nodes keep their ids.
    """
    kids = t.children[c]
    pset = set(prefix)
    if not pset or not pset <= set(kids):
        raise ValueError("prefix must be a non-empty set of children of c")
    if side == "A":
        return _split_a(t, c, [b for b in kids if b in pset])
    if side == "complement":
        return _split_complement(t, c, pset)
    raise ValueError(f"unknown side {side!r}")


def _split_a(t: PartitionTree, c: int, prefix: list[int]) -> PartitionTree:
    if len(prefix) == 1:
        a1 = prefix[0]
        nt = _copy_tree(t, t.subtree(a1))
        nt.root = a1
        nt.parent[a1] = -1
        nt.up[a1] = [-1] * len(t.blocks[a1])
        return nt
    keep = [c]
    for b in prefix:
        keep.extend(t.subtree(b))
    nt = _copy_tree(t, keep)
    nt.root = c
    nt.parent[c] = -1
    nt.children[c] = list(prefix)
    pset = set(prefix)
    remap, new_blocks = {}, []
    for i, arcs in enumerate(t.blocks[c]):
        arcs = [(b, j) for b, j in arcs if b in pset]
        if arcs:
            remap[i] = len(new_blocks)
            new_blocks.append(arcs)
    nt.blocks[c] = new_blocks
    nt.up[c] = [-1] * len(new_blocks)
    for b in prefix:
        nt.up[b] = [remap[i] for i in t.up[b]]
    return nt


def _split_complement(t: PartitionTree, c: int, pset: set[int]) -> PartitionTree:
    removed = set()
    for b in pset:
        removed.update(t.subtree(b))
    nt = _copy_tree(t, (a for a in t.parent if a not in removed))
    nt.children[c] = [b for b in t.children[c] if b not in pset]
    # Walk from c to the root dropping emptied blocks.  ``chain`` is the child
    # on the walked path and ``chain_old`` maps its new block indices to old.
    a, chain, chain_old = c, None, None
    while a >= 0:
        if chain is not None:
            fwd = {old: new for new, old in enumerate(chain_old)}
        remap, new_blocks = {}, []
        for i, arcs in enumerate(t.blocks[a]):
            if a == c:
                arcs = [(b, j) for b, j in arcs if b not in pset]
            else:
                arcs = [(b, fwd[j]) if b == chain else (b, j)
                        for b, j in arcs if b != chain or j in fwd]
            if arcs:
                remap[i] = len(new_blocks)
                new_blocks.append(arcs)
        nt.blocks[a] = new_blocks
        for b in nt.children[a]:
            if b == chain:
                nt.up[b] = [remap[t.up[b][old]] for old in chain_old]
            elif len(remap) != len(t.blocks[a]):
                nt.up[b] = [remap[i] for i in t.up[b]]
        if len(remap) == len(t.blocks[a]):
            break
        chain, chain_old = a, sorted(remap, key=remap.get)
        a = t.parent[a]
    if nt.parent[nt.root] < 0:
        nt.up[nt.root] = [-1] * len(nt.blocks[nt.root])
    left = nt.children[c]
    if not left:
        cp = nt.parent[c]
        if cp < 0:
            raise ValueError("complement side is empty")
        _detach(nt, c)
        if len(nt.children[cp]) == 1:
            _contract(nt, cp)
    elif len(left) == 1:
        _contract(nt, c)
    return nt


def _detach(nt: PartitionTree, a: int) -> None:
    p = nt.parent[a]
    nt.children[p] = [b for b in nt.children[p] if b != a]
    for d in (nt.parent, nt.children, nt.blocks, nt.up):
        del d[a]
    nt.vertex.pop(a, None)


def _contract(nt: PartitionTree, a: int) -> None:
    """Remove a node with a single child, hooking the child to ``a``'s parent."""
    (b,) = nt.children[a]
    p = nt.parent[a]
    if p < 0:
        nt.root = b
        nt.up[b] = [-1] * len(nt.blocks[b])
    else:
        a_up = nt.up[a]
        nt.up[b] = [a_up[i] for i in nt.up[b]]
        nt.children[p] = [b if x == a else x for x in nt.children[p]]
        a_blocks = nt.blocks[a]
        nt.blocks[p] = [[bj for x, j in arcs for bj in (a_blocks[j] if x == a else ((x, j),))]
                        for arcs in nt.blocks[p]]
    nt.parent[b] = p
    for d in (nt.parent, nt.children, nt.blocks, nt.up):
        del d[a]
