"""All eccentricities and total distances through balanced k-module cuts.

The recursion walks the same centroid decomposition as the labels, but each
side keeps a *gadget* graph: the side's vertices plus at most ``k^2`` fresh
vertices per ancestor cut, joined by weighted edges so that distances inside
the side equal distances in the input graph.  Distances across a cut are
aggregated with range trees; distances inside a small side are computed
directly.  Per-vertex maxima and sums from the levels are folded together.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .graph import INF, Graph, GraphError, distance_rows, induced_subgraph, is_connected
from .ptree import (LcaIndex, PartitionTree, choose_cut, minimal_partition,
                    split_partition_tree, validate_partition_tree)
from .rangetree import Interval, Point, RangeTree, point_eq


class GadgetError(ValueError):
    pass


@dataclass
class Cluster:
    vertices: list[int]
    anchor: int


@dataclass
class CutData:
    """Minimal partition of one side of a cut and the set distances around it.

    ``blocks`` lists ``A_1..A_k`` with the block whose outside neighbourhood
    is empty (if any) moved last; ``k_prime`` counts the blocks with a
    nonempty neighbourhood ``B_i``.  ``dA[i]`` / ``dB[i]`` are the distance
    rows ``d(., A_i)`` / ``d(., B_i)`` in ``H`` for ``i < k_prime``.
    """
    side: list[int]
    blocks: list[list[int]]
    nbrs: list[list[int]]
    k_prime: int
    dA: np.ndarray
    dB: np.ndarray
    weighted_crossings: list[tuple[int, int, int]]


def analyze_cut(H: Graph, side: Sequence[int]) -> CutData:
    side = sorted(side)
    in_side = set(side)
    blocks = minimal_partition(H, side)
    nbrs, crossings = [], []
    for blk in blocks:
        out = set()
        for v in blk:
            row = H.adj[v]
            for i, x in enumerate(row):
                if x not in in_side:
                    out.add(x)
                    if H.wts is not None and H.wts[v][i] != 1:
                        crossings.append((v, x, H.wts[v][i]))
        nbrs.append(sorted(out))
    order = sorted(range(len(blocks)), key=lambda i: not nbrs[i])  # stable: empty B last
    blocks = [blocks[i] for i in order]
    nbrs = [nbrs[i] for i in order]
    kp = sum(1 for b in nbrs if b)
    if kp and H.n:
        dA = np.stack([distance_rows(H, blocks[i], min_only=True) for i in range(kp)])
        dB = np.stack([distance_rows(H, nbrs[i], min_only=True) for i in range(kp)])
    else:
        dA = dB = np.zeros((0, H.n), dtype=np.int64)
    return CutData(side, blocks, nbrs, kp, dA, dB, crossings)


# -- gadgets -------------------------------------------------------------------

@dataclass
class GadgetPair:
    """``H_A`` keeps the cut side, ``H_B`` the rest; both get ``k'^2`` new vertices.

    ``side_ids`` / ``rest_ids`` map the first vertices of ``H_A`` / ``H_B``
    back to ``H``; ``b_ids[i][j]`` and ``a_ids[i][j]`` are the new vertices.
    """
    H_A: Graph
    H_B: Graph
    side_ids: list[int]
    rest_ids: list[int]
    b_ids: list[list[int]]
    a_ids: list[list[int]]
    k_prime: int
    cluster_A: Cluster
    cluster_B: Cluster
    b_weights: dict[tuple[int, int], int]
    a_weights: dict[tuple[int, int], int]


def _with_gadget(H: Graph, keep: list[int], groups: list[list[int]], weights: dict,
                 kp: int) -> tuple[Graph, list[list[int]]]:
    sub, _, old_to_new = induced_subgraph(H, keep)
    adj = sub.adj
    wts = sub.wts if sub.wts is not None else [[1] * len(row) for row in adj]
    base = len(adj)
    ids = [[base + i * kp + j for j in range(kp)] for i in range(kp)]
    for i in range(kp):
        members = [old_to_new[v] for v in groups[i]]
        for j in range(kp):
            x = ids[i][j]
            adj.append(list(members))
            wts.append([1] * len(members))
            for y in members:
                adj[y].append(x)
                wts[y].append(1)
    for (i, j), w in weights.items():
        x, y = ids[i][j], ids[j][i]
        adj[x].append(y)
        wts[x].append(w)
        adj[y].append(x)
        wts[y].append(w)
    return Graph.from_adjacency(adj, wts), ids


def build_gadget_pair(H: Graph, side: Sequence[int], k: int | None = None, anchor: int = -1,
                      cut: CutData | None = None) -> GadgetPair:
    """Distance-preserving gadget graphs for the unweighted cut ``(side, V(H) - side)``."""
    if cut is None:
        cut = analyze_cut(H, side)
    if cut.weighted_crossings:
        u, v, w = cut.weighted_crossings[0]
        raise GadgetError(f"cut is weighted: edge ({u}, {v}) has weight {w}")
    if k is not None and len(cut.blocks) > k:
        raise GadgetError(f"side is a {len(cut.blocks)}-module, more than k={k}")
    kp = cut.k_prime
    in_side = set(cut.side)
    rest = [v for v in range(H.n) if v not in in_side]
    bw, aw = {}, {}
    for i in range(kp):
        for j in range(i + 1, kp):
            bw[(i, j)] = int(cut.dB[i][cut.nbrs[j]].min())
            aw[(i, j)] = int(cut.dA[i][cut.blocks[j]].min())
    H_A, b_ids = _with_gadget(H, cut.side, cut.blocks, bw, kp)
    H_B, a_ids = _with_gadget(H, rest, cut.nbrs, aw, kp)
    return GadgetPair(H_A, H_B, cut.side, rest, b_ids, a_ids, kp,
                      Cluster([x for row in b_ids for x in row], anchor),
                      Cluster([x for row in a_ids for x in row], anchor), bw, aw)


# -- cross-cut aggregation ------------------------------------------------------

@dataclass
class CrossResult:
    """Per-vertex (max, sum, count) of distances to the opposite subset.

    ``max`` is ``None`` when the opposite subset is empty.
    """
    a_max: list[int | None]
    a_sum: list[int]
    a_cnt: list[int]
    b_max: list[int | None]
    b_sum: list[int]
    b_cnt: list[int]


def _boxes(a: Sequence[int], i: int, kp: int) -> list[Interval]:
    box = [point_eq(i)]
    ai = a[i]
    for j in range(kp):
        if j < i:
            box.append(Interval(None, a[j] - ai, hi_open=True))
        elif j > i:
            box.append(Interval(None, a[j] - ai))
    return box


def _far(src: Sequence[int], near: np.ndarray, tgt: Sequence[int], far: np.ndarray, kp: int):
    """For ``u`` in ``src``: max/sum/count over ``v`` in ``tgt`` of
    ``min_i near[i][u] + 1 + far[i][v]``."""
    n_src = len(src)
    if not tgt:
        return [None] * n_src, [0] * n_src, [0] * n_src
    D = far[:, list(tgt)]
    pts = []
    for col, v in enumerate(tgt):
        dv = D[:, col].tolist()
        for i in range(kp):
            g = dv[i]
            pts.append(Point((i, *[g - dv[j] for j in range(kp) if j != i]), g, v))
    tree = RangeTree(pts, dim=kp)
    S = near[:, list(src)]
    memo: dict[tuple[int, ...], list] = {}
    out_max, out_sum, out_cnt = [], [], []
    for col in range(n_src):
        a = S[:, col].tolist()
        key = tuple(x - a[0] for x in a)
        aggs = memo.get(key)
        if aggs is None:
            aggs = [tree.query(_boxes(a, i, kp)) for i in range(kp)]
            memo[key] = aggs
        best, total, cnt = None, 0, 0
        for i, agg in enumerate(aggs):
            if agg.count:
                off = a[i] + 1
                x = off + agg.max_value
                if best is None or x > best:
                    best = x
                total += off * agg.count + agg.total
                cnt += agg.count
        out_max.append(best)
        out_sum.append(total)
        out_cnt.append(cnt)
    return out_max, out_sum, out_cnt


def cross_cut_far(H: Graph, side: Sequence[int], a_sub: Sequence[int], b_sub: Sequence[int],
                  cut: CutData | None = None) -> CrossResult:
    """Max and sum of distances from ``a_sub`` to ``b_sub`` and back.

    ``a_sub`` lies in ``side``, ``b_sub`` outside it; the cut must be
    unweighted and ``H`` connected.
    """
    if cut is None:
        cut = analyze_cut(H, side)
    kp = cut.k_prime
    if kp == 0:
        if a_sub and b_sub:
            raise GraphError("no edge crosses the cut; the graph is disconnected")
        z = lambda s: ([None] * len(s), [0] * len(s), [0] * len(s))
        return CrossResult(*z(a_sub), *z(b_sub))
    am, asum, acnt = _far(a_sub, cut.dA, b_sub, cut.dB, kp)
    bm, bsum, bcnt = _far(b_sub, cut.dB, a_sub, cut.dA, kp)
    return CrossResult(am, asum, acnt, bm, bsum, bcnt)


# -- the recursion ---------------------------------------------------------------

def cut_sides(clusters: Sequence[Cluster], c: int, prefix: Sequence[int], lca: LcaIndex,
              ) -> tuple[list[int], list[int]]:
    """Indices of the clusters that join side ``A`` and of those that stay out.

    A cluster anchored at ``c_j`` goes with ``A`` when some ``lca(c_j, a_i)``
    is a strict descendant of ``c``.
    """
    with_a, rest = [], []
    for idx, cl in enumerate(clusters):
        hit = False
        for a in prefix:
            s = lca.lca(cl.anchor, a)
            if s != c and lca.lca(s, c) == c:
                hit = True
                break
        (with_a if hit else rest).append(idx)
    return with_a, rest


@dataclass
class RecursionStats:
    depth: int = 0
    level_u: dict[int, int] = field(default_factory=dict)
    level_clusters: dict[int, int] = field(default_factory=dict)
    max_cluster_size: int = 0
    cuts: int = 0
    base_cases: int = 0
    max_block_count: int = 0
    threshold: int = 0
    violations: list[str] = field(default_factory=list)
    audited_pairs: int = 0


@dataclass
class FarAggregate:
    ecc: list[int]
    td: list[int]
    stats: RecursionStats


def base_threshold(n: int, k: int, alpha: float) -> int:
    return max(3, math.ceil(alpha * k * k * math.log2(n))) if n > 1 else 3


def solve_all(g: Graph, t: PartitionTree, alpha: float = 1.0, audit: bool = False, seed: int = 0,
              cut_hook: Callable | None = None, check: bool = True) -> FarAggregate:
    """Eccentricity and total distance of every vertex of a connected graph.

    With ``audit`` each cut is checked to be an unweighted k-module cut, the
    cluster ledger is checked, and sampled distances in every gadget graph
    are compared with the input graph; failures land in ``stats.violations``.
    ``cut_hook(H, side, gadget)`` is called for every cut.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if not g.is_unit:
        raise GraphError("solve_all needs an unweighted graph")
    if sorted(t.vertex.values()) != list(range(g.n)):
        raise GraphError("partition tree leaves do not match the graph's vertices")
    if check:
        bad = validate_partition_tree(t, g)
        if bad is not None:
            raise GraphError(f"partition tree does not fit the graph: {bad}")
    if not is_connected(g):
        raise GraphError("graph is disconnected")
    n, k = g.n, t.width
    ecc, td = [0] * n, [0] * n
    stats = RecursionStats(threshold=base_threshold(n, k, alpha))
    lca = LcaIndex(t)
    rng = random.Random(seed)
    # (level, H, H -> original ids (-1 for gadget vertices), U as H ids, tree, clusters)
    stack = [(0, g, list(range(n)), list(range(n)), t, [])]
    while stack:
        r, H, orig, U, tu, clusters = stack.pop()
        stats.depth = max(stats.depth, r + 1)
        stats.level_u[r] = stats.level_u.get(r, 0) + len(U)
        stats.level_clusters[r] = max(stats.level_clusters.get(r, 0), len(clusters))
        for cl in clusters:
            stats.max_cluster_size = max(stats.max_cluster_size, len(cl.vertices))
        if audit:
            _audit_ledger(H, U, clusters, r, k, stats)
            _audit_preserved(g, H, orig, U, rng, stats)
        if len(U) <= stats.threshold:
            stats.base_cases += 1
            D = distance_rows(H, U)[:, U]
            for u, mx, sm in zip(U, D.max(axis=1).tolist(), D.sum(axis=1).tolist()):
                o = orig[u]
                if mx > ecc[o]:
                    ecc[o] = mx
                td[o] += sm
            continue
        stats.cuts += 1
        loc = {orig[u]: u for u in U}
        c, prefix = choose_cut(tu)
        A = sorted(loc[v] for b in prefix for v in tu.vertices_under(b))
        in_a = set(A)
        B = [u for u in U if u not in in_a]
        with_a, rest = cut_sides(clusters, c, prefix, lca)
        side = list(A)
        for idx in with_a:
            side.extend(clusters[idx].vertices)
        cut = analyze_cut(H, side)
        stats.max_block_count = max(stats.max_block_count, len(cut.blocks))
        if audit:
            if len(cut.blocks) > k:
                stats.violations.append(f"level {r}: cut side has {len(cut.blocks)} > {k} blocks")
            if cut.weighted_crossings:
                stats.violations.append(f"level {r}: {len(cut.weighted_crossings)} weighted crossing edges")
        cross = cross_cut_far(H, side, A, B, cut)
        for ids, mxs, sms in ((A, cross.a_max, cross.a_sum), (B, cross.b_max, cross.b_sum)):
            for u, mx, sm in zip(ids, mxs, sms):
                o = orig[u]
                if mx is not None and mx > ecc[o]:
                    ecc[o] = mx
                td[o] += sm
        gp = build_gadget_pair(H, side, None, c, cut)
        if cut_hook is not None:
            cut_hook(H, side, gp)
        if audit:
            _audit_gadget(H, gp, rng, stats)
        pos_a = {v: i for i, v in enumerate(gp.side_ids)}
        pos_b = {v: i for i, v in enumerate(gp.rest_ids)}
        cl_a = [Cluster([pos_a[v] for v in clusters[i].vertices], clusters[i].anchor) for i in with_a]
        cl_b = [Cluster([pos_b[v] for v in clusters[i].vertices], clusters[i].anchor) for i in rest]
        cl_a.append(gp.cluster_A)
        cl_b.append(gp.cluster_B)
        extra = [-1] * (gp.k_prime * gp.k_prime)
        orig_a = [orig[v] for v in gp.side_ids] + extra
        orig_b = [orig[v] for v in gp.rest_ids] + extra
        stack.append((r + 1, gp.H_B, orig_b, [pos_b[u] for u in B],
                      split_partition_tree(tu, c, prefix, "complement"), cl_b))
        stack.append((r + 1, gp.H_A, orig_a, [pos_a[u] for u in A],
                      split_partition_tree(tu, c, prefix, "A"), cl_a))
    return FarAggregate(ecc, td, stats)


def _audit_ledger(H, U, clusters, r, k, stats):
    if len(clusters) > r:
        stats.violations.append(f"level {r}: {len(clusters)} clusters")
    seen = set(U)
    for cl in clusters:
        if len(cl.vertices) > k * k:
            stats.violations.append(f"level {r}: cluster of {len(cl.vertices)} > k^2 vertices")
        if seen & set(cl.vertices):
            stats.violations.append(f"level {r}: clusters overlap")
        seen.update(cl.vertices)
    if len(seen) != H.n:
        stats.violations.append(f"level {r}: gadget vertices outside every cluster")


def _audit_preserved(g, H, orig, U, rng, stats, samples=2):
    for u in rng.sample(U, min(samples, len(U))):
        dh = distance_rows(H, [u])[0]
        dg = distance_rows(g, [orig[u]])[0]
        for v in U:
            if dh[v] != dg[orig[v]]:
                stats.violations.append(f"distance ({orig[u]}, {orig[v]}) not preserved")
                return
        stats.audited_pairs += len(U)


def _audit_gadget(H, gp, rng, stats, samples=2):
    for ids, G2 in ((gp.side_ids, gp.H_A), (gp.rest_ids, gp.H_B)):
        for i in rng.sample(range(len(ids)), min(samples, len(ids))):
            dh = distance_rows(H, [ids[i]])[0][ids]
            d2 = distance_rows(G2, [i])[0][:len(ids)]
            if not np.array_equal(dh, d2):
                stats.violations.append("gadget graph changes a distance")
                return
            stats.audited_pairs += len(ids)


def diameter(agg: FarAggregate) -> int:
    return max(agg.ecc)


def wiener_index(agg: FarAggregate) -> int:
    return sum(agg.td)


def median_set(agg: FarAggregate) -> list[int]:
    best = min(agg.td)
    return [v for v, x in enumerate(agg.td) if x == best]
