"""Brute-force reference answers.

Nothing here touches the shortest-path helpers, partition trees or range
trees of the main package; only the :class:`Graph` container is shared.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .graph import INF, Graph

APSP_CAP = 2000


class OracleError(ValueError):
    pass


def _weight_matrix(g: Graph) -> np.ndarray:
    big = np.iinfo(np.int64).max // 4
    d = np.full((g.n, g.n), big, dtype=np.int64)
    np.fill_diagonal(d, 0)
    for u in range(g.n):
        row = g.adj[u]
        for i, v in enumerate(row):
            d[u, v] = 1 if g.wts is None else g.wts[u][i]
    return d


def brute_apsp(g: Graph, cap: int = APSP_CAP) -> list[list[int]]:
    """All-pairs distances by Floyd-Warshall; ``INF`` between components."""
    if g.n > cap:
        raise OracleError(f"n={g.n} exceeds the oracle cap of {cap}")
    d = _weight_matrix(g)
    big = np.iinfo(np.int64).max // 4
    for k in range(g.n):
        np.minimum(d, d[:, k:k + 1] + d[k:k + 1, :], out=d)
    d[d >= big] = INF
    return d.tolist()


def reachability(g: Graph) -> np.ndarray:
    """Boolean reachability by repeated squaring of ``I + adjacency``."""
    r = np.eye(g.n, dtype=np.int64)
    for u in range(g.n):
        for v in g.adj[u]:
            r[u, v] = 1
    steps = 1
    while steps < g.n:
        r = ((r @ r) > 0).astype(np.int64)
        steps *= 2
    return r > 0


def brute_ecc_td(g: Graph, cap: int = APSP_CAP) -> tuple[list[int], list[int]]:
    """Per-vertex eccentricity and total distance of a connected graph."""
    d = brute_apsp(g, cap)
    ecc = [max(row) for row in d]
    if any(e >= INF for e in ecc):
        raise OracleError("graph is disconnected")
    return ecc, [sum(row) for row in d]


def scan_range_query(points: Sequence, box: Sequence, kind: str):
    """Linear-scan answer to a box query.

    ``points`` hold ``coords``, ``value`` and ``payload``; each box interval
    has ``lo``/``hi`` (``None`` = unbounded) and ``lo_open``/``hi_open``.
    ``kind`` is ``"max"`` (``(payload, value)`` or ``None``), ``"sum"`` or
    ``"count"``.
    """
    def inside(x, iv):
        if iv.lo is not None and (x <= iv.lo if iv.lo_open else x < iv.lo):
            return False
        if iv.hi is not None and (x >= iv.hi if iv.hi_open else x > iv.hi):
            return False
        return True

    hits = [p for p in points if len(p.coords) == len(box)
            and all(inside(x, iv) for x, iv in zip(p.coords, box))]
    if kind == "count":
        return len(hits)
    if kind == "sum":
        return sum(p.value for p in hits)
    if kind == "max":
        if not hits:
            return None
        best = max(hits, key=lambda p: (p.value, -p.payload))
        return best.payload, best.value
    raise OracleError(f"unknown query kind {kind!r}")
