"""Static layered range tree with max / sum / count box queries.

Each level is a balanced tree over the *distinct* coordinate values of one
dimension, so an equality constraint ``[i, i]`` selects a single canonical
node.  Canonical nodes hand the query to the structure of the next
dimension; the last dimension is a sorted array with prefix sums and a
max segment tree.  Small nodes are scanned directly.  Points with identical
coordinates are merged at build time into one aggregated entry.

Interval endpoints may be open, closed or missing; strictness is enforced
by the searches themselves, never by nudging integer coordinates.
"""
from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

BUCKET = 12


class RangeTreeError(ValueError):
    pass


class Point(NamedTuple):
    coords: tuple[int, ...]
    value: int
    payload: int


@dataclass(frozen=True)
class Interval:
    lo: int | None = None
    hi: int | None = None
    lo_open: bool = False
    hi_open: bool = False

    def contains(self, x: int) -> bool:
        if self.lo is not None and (x <= self.lo if self.lo_open else x < self.lo):
            return False
        if self.hi is not None and (x >= self.hi if self.hi_open else x > self.hi):
            return False
        return True

    def empty(self) -> bool:
        if self.lo is None or self.hi is None:
            return False
        return self.lo > self.hi or (self.lo == self.hi and (self.lo_open or self.hi_open))

    def slice(self, keys: Sequence[int]) -> tuple[int, int]:
        """Index range ``[i, j)`` of sorted ``keys`` inside the interval."""
        if self.lo is None:
            i = 0
        else:
            i = bisect_right(keys, self.lo) if self.lo_open else bisect_left(keys, self.lo)
        if self.hi is None:
            j = len(keys)
        else:
            j = bisect_left(keys, self.hi) if self.hi_open else bisect_right(keys, self.hi)
        return i, j


def closed(lo: int, hi: int) -> Interval:
    return Interval(lo, hi)


def point_eq(x: int) -> Interval:
    return Interval(x, x)


def below(x: int, strict: bool = False) -> Interval:
    return Interval(None, x, hi_open=strict)


ANY = Interval()

Box = Sequence[Interval]


class Aggregate(NamedTuple):
    max_value: int | None
    max_payload: int | None
    total: int
    count: int


# An entry is (coords, max_value, -min_payload_among_max, total, count);
# the max key (value, -payload) orders ties by smallest payload.

class _Bucket:
    __slots__ = ("entries",)

    def __init__(self, entries):
        self.entries = entries

    def query(self, box, dim, acc):
        nd = len(box)
        for e in self.entries:
            coords = e[0]
            for d in range(dim, nd):
                if not box[d].contains(coords[d]):
                    break
            else:
                _add(acc, e[1], e[2], e[3], e[4])


class _Last:
    """Last dimension: sorted keys, prefix sums/counts, max segment tree."""
    __slots__ = ("keys", "psum", "pcnt", "size", "seg")

    def __init__(self, entries, dim):
        entries = sorted(entries, key=lambda e: e[0][dim])
        self.keys = [e[0][dim] for e in entries]
        psum, pcnt = [0], [0]
        for e in entries:
            psum.append(psum[-1] + e[3])
            pcnt.append(pcnt[-1] + e[4])
        self.psum, self.pcnt = psum, pcnt
        size = 1
        while size < len(entries):
            size *= 2
        seg = [None] * (2 * size)
        for i, e in enumerate(entries):
            seg[size + i] = (e[1], e[2])
        for i in range(size - 1, 0, -1):
            a, b = seg[2 * i], seg[2 * i + 1]
            seg[i] = a if b is None or (a is not None and a >= b) else b
        self.size, self.seg = size, seg

    def query(self, box, dim, acc):
        i, j = box[dim].slice(self.keys)
        if i >= j:
            return
        best = None
        seg = self.seg
        lo, hi = i + self.size, j + self.size
        while lo < hi:
            if lo & 1:
                x = seg[lo]
                if best is None or x > best:
                    best = x
                lo += 1
            if hi & 1:
                hi -= 1
                x = seg[hi]
                if best is None or x > best:
                    best = x
            lo >>= 1
            hi >>= 1
        _add(acc, best[0], best[1], self.psum[j] - self.psum[i], self.pcnt[j] - self.pcnt[i])


class _Level:
    """Balanced tree over the distinct keys of dimension ``dim``."""
    __slots__ = ("lo", "hi", "left", "right", "assoc")

    def query(self, box, dim, acc):
        iv = box[dim]
        stack = [self]
        while stack:
            node = stack.pop()
            lo_in = iv.contains(node.lo)
            hi_in = iv.contains(node.hi)
            if lo_in and hi_in:
                node.assoc.query(box, dim + 1, acc)
                continue
            if node.left is None:
                continue
            # disjoint when the whole key range sits on one side of the interval
            if not lo_in and not hi_in:
                if iv.hi is not None and (node.lo > iv.hi or (node.lo == iv.hi and iv.hi_open)):
                    continue
                if iv.lo is not None and (node.hi < iv.lo or (node.hi == iv.lo and iv.lo_open)):
                    continue
            stack.append(node.right)
            stack.append(node.left)


def _add(acc, value, negpay, total, count):
    key = (value, negpay)
    if acc[0] is None or key > acc[0]:
        acc[0] = key
    acc[1] += total
    acc[2] += count


def _build(entries, dim, ndim):
    if len(entries) <= BUCKET:
        return _Bucket(entries)
    if dim == ndim - 1:
        return _Last(entries, dim)
    entries = sorted(entries, key=lambda e: e[0][dim])
    keys = [e[0][dim] for e in entries]
    # group boundaries of equal keys
    starts = [0] + [i for i in range(1, len(keys)) if keys[i] != keys[i - 1]]
    return _build_level(entries, keys, starts, 0, len(starts), dim, ndim)


def _build_level(entries, keys, starts, g0, g1, dim, ndim):
    node = _Level()
    lo_i = starts[g0]
    hi_i = starts[g1] if g1 < len(starts) else len(entries)
    node.lo, node.hi = keys[lo_i], keys[hi_i - 1]
    node.assoc = _build(entries[lo_i:hi_i], dim + 1, ndim)
    if g1 - g0 == 1:
        node.left = node.right = None
        return node
    # split the groups near the median entry
    target = (lo_i + hi_i) // 2
    gm = bisect_right(starts, target, g0 + 1, g1 - 1)
    gm = min(max(gm, g0 + 1), g1 - 1)
    node.left = _build_level(entries, keys, starts, g0, gm, dim, ndim)
    node.right = _build_level(entries, keys, starts, gm, g1, dim, ndim)
    return node


class RangeTree:
    """Static point set answering box queries.

    >>> t = RangeTree([Point((1, 5), 2, 0), Point((2, 3), 7, 1)])
    >>> t.query_sum([closed(1, 2), closed(3, 5)])
    9
    """

    def __init__(self, points: Iterable[Point] = (), dim: int | None = None):
        merged: dict[tuple[int, ...], list] = {}
        for p in points:
            coords = tuple(p.coords)
            if dim is None:
                dim = len(coords)
            elif len(coords) != dim:
                raise RangeTreeError(f"point of dimension {len(coords)} in a {dim}-d tree")
            e = merged.get(coords)
            key = (p.value, -p.payload)
            if e is None:
                merged[coords] = [coords, p.value, -p.payload, p.value, 1]
            else:
                if key > (e[1], e[2]):
                    e[1], e[2] = key
                e[3] += p.value
                e[4] += 1
        self.dim = dim
        self.n_entries = len(merged)
        self._root = None
        if merged:
            if dim < 1:
                raise RangeTreeError("dimension must be at least 1")
            self._root = _build(list(merged.values()), 0, dim)

    def query(self, box: Box) -> Aggregate:
        if self.dim is not None and len(box) != self.dim:
            raise RangeTreeError(f"box of dimension {len(box)} for a {self.dim}-d tree")
        if self._root is None or any(iv.empty() for iv in box):
            return Aggregate(None, None, 0, 0)
        acc = [None, 0, 0]
        self._root.query(box, 0, acc)
        if acc[0] is None:
            return Aggregate(None, None, acc[1], acc[2])
        return Aggregate(acc[0][0], -acc[0][1], acc[1], acc[2])

    def query_max(self, box: Box) -> tuple[int, int] | None:
        """``(payload, value)`` of a maximising point, or ``None``."""
        a = self.query(box)
        return None if a.max_value is None else (a.max_payload, a.max_value)

    def query_sum(self, box: Box) -> int:
        return self.query(box).total

    def query_count(self, box: Box) -> int:
        return self.query(box).count


def build(points: Iterable[Point], dim: int | None = None) -> RangeTree:
    return RangeTree(points, dim)


def query_max(t: RangeTree, box: Box):
    return t.query_max(box)


def query_sum(t: RangeTree, box: Box) -> int:
    return t.query_sum(box)


def query_count(t: RangeTree, box: Box) -> int:
    return t.query_count(box)
