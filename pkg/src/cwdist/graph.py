"""Graph containers and shortest-path primitives.

Vertices are dense integers ``0..n-1``.  A graph is *unit* when it carries no
explicit weights; weighted graphs hold one non-negative integer per edge
(zero is a legal weight).
"""
from __future__ import annotations

import heapq
import io
from collections import deque
from typing import Iterable, Sequence, TextIO

import numpy as np

# Distances are Python ints; this sentinel stands for "unreachable".
INF = (1 << 62) - 1


def sat_add(a: int, b: int) -> int:
    """Saturating addition on distances."""
    if a >= INF or b >= INF:
        return INF
    s = a + b
    return INF if s >= INF else s


class GraphError(ValueError):
    pass


class Graph:
    """Simple undirected graph, optionally edge-weighted.

    ``adj[v]`` lists the neighbours of ``v``; when the graph is weighted,
    ``wts[v][i]`` is the weight of edge ``(v, adj[v][i])``.
    """

    __slots__ = ("n", "adj", "wts", "names", "_csr", "_m")

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = (),
                 names: Sequence[str] | None = None, weighted: bool | None = None):
        self.n = n
        self.adj: list[list[int]] = [[] for _ in range(n)]
        edges = list(edges)
        if weighted is None:
            weighted = any(len(e) > 2 and e[2] != 1 for e in edges)
        self.wts: list[list[int]] | None = [[] for _ in range(n)] if weighted else None
        seen = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            w = int(e[2]) if len(e) > 2 else 1
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if w < 0:
                raise GraphError(f"negative weight on edge ({u}, {v})")
            if not weighted and w != 1:
                raise GraphError("non-unit weight in an unweighted graph")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise GraphError(f"parallel edge ({u}, {v})")
            seen.add(key)
            self.adj[u].append(v)
            self.adj[v].append(u)
            if weighted:
                self.wts[u].append(w)
                self.wts[v].append(w)
        self.names = list(names) if names is not None else None
        if self.names is not None and len(self.names) != n:
            raise GraphError("names length does not match n")
        self._csr = None
        self._m = len(seen)

    @classmethod
    def from_adjacency(cls, adj: list[list[int]], wts: list[list[int]] | None = None,
                       names: Sequence[str] | None = None) -> "Graph":
        """Wrap prebuilt symmetric adjacency lists without re-validating them."""
        g = cls.__new__(cls)
        g.n = len(adj)
        g.adj = adj
        g.wts = wts
        g.names = list(names) if names is not None else None
        g._csr = None
        g._m = sum(len(a) for a in adj) // 2
        return g

    @property
    def m(self) -> int:
        return self._m

    @property
    def is_unit(self) -> bool:
        return self.wts is None or all(w == 1 for row in self.wts for w in row)

    def weight(self, u: int, v: int) -> int | None:
        for i, x in enumerate(self.adj[u]):
            if x == v:
                return 1 if self.wts is None else self.wts[u][i]
        return None

    def edges(self) -> list[tuple[int, int, int]]:
        out = []
        for u in range(self.n):
            row = self.adj[u]
            for i, v in enumerate(row):
                if u < v:
                    out.append((u, v, 1 if self.wts is None else self.wts[u][i]))
        return out

    def name(self, v: int) -> str:
        return self.names[v] if self.names is not None else str(v)

    def index_of(self, name: str) -> int:
        if self.names is not None:
            try:
                return self.names.index(name)
            except ValueError:
                pass
        try:
            v = int(name)
        except ValueError:
            raise GraphError(f"unknown vertex {name!r}") from None
        if not 0 <= v < self.n:
            raise GraphError(f"unknown vertex {name!r}")
        return v

    def csr(self):
        """Symmetric CSR matrix of the graph (explicit zeros kept as edges)."""
        if self._csr is None:
            import scipy.sparse as sp
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            indptr[1:] = np.cumsum([len(a) for a in self.adj])
            if indptr[-1]:
                indices = np.fromiter((v for a in self.adj for v in a), dtype=np.int32,
                                      count=int(indptr[-1]))
            else:
                indices = np.zeros(0, dtype=np.int32)
            if self.wts is None:
                data = np.ones(len(indices), dtype=np.float64)
            else:
                data = np.fromiter((w for a in self.wts for w in a), dtype=np.float64,
                                   count=len(indices))
            self._csr = sp.csr_matrix((data, indices, indptr), shape=(self.n, self.n))
        return self._csr

    def __repr__(self) -> str:
        kind = "unit" if self.wts is None else "weighted"
        return f"Graph(n={self.n}, m={self.m}, {kind})"


WeightedGraph = Graph


def sssp(g: Graph, source: int) -> list[int]:
    """Exact single-source distances; unreachable vertices get ``INF``."""
    if not 0 <= source < g.n:
        raise GraphError(f"source {source} out of range")
    return multi_source_dist(g, (source,))


def multi_source_dist(g: Graph, sources: Iterable[int]) -> list[int]:
    """``d(v, S)`` for every vertex; all ``INF`` when ``S`` is empty.

    Plain BFS on unit graphs, binary-heap search otherwise.
    """
    dist = [INF] * g.n
    sources = list(sources)
    if not sources:
        return dist
    adj = g.adj
    if g.wts is None:
        q = deque()
        for s in sources:
            if dist[s]:
                dist[s] = 0
                q.append(s)
        while q:
            u = q.popleft()
            du = dist[u] + 1
            for v in adj[u]:
                if dist[v] > du:
                    dist[v] = du
                    q.append(v)
        return dist
    wts = g.wts
    heap = []
    for s in sources:
        if dist[s]:
            dist[s] = 0
            heap.append((0, s))
    heapq.heapify(heap)
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        row = wts[u]
        for i, v in enumerate(adj[u]):
            nd = d + row[i]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def distance_rows(g: Graph, sources: Sequence[int], min_only: bool = False) -> np.ndarray:
    """Bulk shortest paths through scipy's compiled Dijkstra.

    Returns a ``len(sources) x n`` int64 array (or one row of ``d(v, S)`` when
    ``min_only``), with ``INF`` for unreachable entries.
    """
    from scipy.sparse.csgraph import dijkstra
    if len(sources) == 0:
        return np.full(g.n if min_only else (0, g.n), INF, dtype=np.int64)
    d = dijkstra(g.csr(), directed=True, indices=np.asarray(sources, dtype=np.int64),
                 unweighted=g.wts is None, min_only=min_only)
    out = np.full(d.shape, INF, dtype=np.int64)
    finite = np.isfinite(d)
    out[finite] = d[finite].astype(np.int64)
    return out


def induced_subgraph(g: Graph, vertices: Iterable[int]) -> tuple[Graph, list[int], dict[int, int]]:
    """``G[A]`` with weights preserved.

    Returns the subgraph, the new->old id list and the old->new id map.
    """
    new_to_old = sorted(set(vertices))
    old_to_new = {v: i for i, v in enumerate(new_to_old)}
    adj: list[list[int]] = []
    wts: list[list[int]] | None = [] if g.wts is not None else None
    for v in new_to_old:
        row, wrow = [], []
        for i, x in enumerate(g.adj[v]):
            j = old_to_new.get(x)
            if j is not None:
                row.append(j)
                if wts is not None:
                    wrow.append(g.wts[v][i])
        adj.append(row)
        if wts is not None:
            wts.append(wrow)
    names = [g.names[v] for v in new_to_old] if g.names is not None else None
    return Graph.from_adjacency(adj, wts, names), new_to_old, old_to_new


def is_connected(g: Graph) -> bool:
    if g.n <= 1:
        return True
    return max(multi_source_dist(g, (0,))) < INF


def components(g: Graph) -> list[int]:
    """Component index per vertex."""
    comp = [-1] * g.n
    c = 0
    for s in range(g.n):
        if comp[s] >= 0:
            continue
        comp[s] = c
        stack = [s]
        while stack:
            u = stack.pop()
            for v in g.adj[u]:
                if comp[v] < 0:
                    comp[v] = c
                    stack.append(v)
        c += 1
    return comp


# -- edge-list files ---------------------------------------------------------

def read_edgelist(f: TextIO) -> Graph:
    """Parse ``p <n> <m>`` / ``e <u> <v> [w]`` text; ``c`` lines are comments.

    A comment ``c v <id> <name>`` attaches a name to a vertex.
    """
    n = m = None
    edges = []
    names: dict[int, str] = {}
    for lineno, line in enumerate(f, 1):
        parts = line.split()
        if not parts:
            continue
        try:
            if parts[0] == "c":
                if len(parts) == 4 and parts[1] == "v":
                    names[int(parts[2])] = parts[3]
                continue
            if parts[0] == "p":
                if n is not None:
                    raise GraphError("duplicate header")
                n, m = int(parts[1]), int(parts[2])
            elif parts[0] == "e":
                if n is None:
                    raise GraphError("edge before header")
                e = tuple(int(x) for x in parts[1:4])
                if len(e) < 2:
                    raise GraphError("edge needs two endpoints")
                edges.append(e)
            else:
                raise GraphError(f"unknown record {parts[0]!r}")
        except (IndexError, ValueError) as exc:
            raise GraphError(f"line {lineno}: {exc}") from None
    if n is None:
        raise GraphError("missing 'p <n> <m>' header")
    if m != len(edges):
        raise GraphError(f"header announces {m} edges, found {len(edges)}")
    if any(not 0 <= v < n for v in names):
        raise GraphError("vertex name for an unknown vertex")
    return Graph(n, edges, names=[names.get(v, str(v)) for v in range(n)] if names else None)


def write_edgelist(g: Graph, f: TextIO) -> None:
    f.write(f"p {g.n} {g.m}\n")
    if g.names is not None:
        for v, name in enumerate(g.names):
            f.write(f"c v {v} {name}\n")
    for u, v, w in g.edges():
        f.write(f"e {u} {v}\n" if g.wts is None else f"e {u} {v} {w}\n")


def edgelist_text(g: Graph) -> str:
    buf = io.StringIO()
    write_edgelist(g, buf)
    return buf.getvalue()
