"""Exact distance labels from a centroid decomposition of a partition tree.

Every cut ``(A, V - A)`` of the decomposition is a k-module cut.  A vertex
stores, for each cut on its way down, which side it fell on together with
its distances to the blocks ``X_i`` of the minimal partition of ``A`` and to
their outside neighbourhoods ``Y_i``, all measured in the subgraph that was
current at that cut.  Two labels are enough to recover the distance: every
``d(u, X_i) + 1 + d(Y_i, v)`` is the length of a real path, and at the cut
separating ``u`` from ``v`` (or earlier) one of them is a shortest path.
"""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from typing import BinaryIO, Sequence

from .graph import INF, Graph, GraphError, distance_rows, induced_subgraph, multi_source_dist
from .ptree import PartitionTree, choose_cut, minimal_partition, split_partition_tree, validate_partition_tree

MAGIC = b"CWDL"
VERSION = 1
# Above this many vertices set distances go through scipy instead of plain BFS.
_BULK = 256


class LabelError(ValueError):
    pass


class LabelMismatchError(LabelError):
    pass


@dataclass(frozen=True)
class LevelRecord:
    bit: int
    dX: tuple[int, ...]
    dY: tuple[int, ...]

    @property
    def k_level(self) -> int:
        return len(self.dX)


@dataclass
class DistanceLabel:
    vertex: int
    build_hash: int
    levels: list[LevelRecord] = field(default_factory=list)

    @property
    def stored_distances(self) -> int:
        return sum(2 * lv.k_level for lv in self.levels)

    def bits(self) -> int:
        """Size in bits of the varint encoding of this label's levels."""
        return 8 * len(_encode_levels(self.levels))


@dataclass
class LabelSet:
    """All labels of one build, indexed by vertex."""
    labels: list[DistanceLabel]
    build_hash: int
    k: int
    names: list[str] | None = None

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, v: int) -> DistanceLabel:
        return self.labels[v]

    def index_of(self, name: str) -> int:
        if self.names is not None and name in self.names:
            return self.names.index(name)
        try:
            v = int(name)
        except ValueError:
            raise LabelError(f"unknown vertex {name!r}") from None
        if not 0 <= v < len(self.labels):
            raise LabelError(f"unknown vertex {name!r}")
        return v


def build_hash(g: Graph, t: PartitionTree) -> int:
    h = hashlib.blake2b(digest_size=8)
    h.update(f"{g.n}\n".encode())
    for u, v, w in g.edges():
        h.update(f"{u} {v} {w}\n".encode())
    h.update(t.dump().encode())
    return int.from_bytes(h.digest(), "little")


def _set_distances(g: Graph, sources: list[int]) -> list[int]:
    if g.n > _BULK:
        return distance_rows(g, sources, min_only=True).tolist()
    return multi_source_dist(g, sources)


def build_labels(g: Graph, t: PartitionTree, check: bool = True) -> LabelSet:
    """Labels for every vertex of the unit-weight graph ``g`` (may be disconnected)."""
    if not g.is_unit:
        raise GraphError("distance labels need an unweighted graph")
    if sorted(t.vertex.values()) != list(range(g.n)):
        raise LabelError("partition tree leaves do not match the graph's vertices")
    if check:
        bad = validate_partition_tree(t, g)
        if bad is not None:
            raise LabelError(f"partition tree does not fit the graph: {bad}")
    k = t.width
    bh = build_hash(g, t)
    labels = [DistanceLabel(v, bh) for v in range(g.n)]
    # (current subgraph, local -> original ids, partition tree over original ids)
    stack = [(g, list(range(g.n)), t)]
    while stack:
        h, ids, tu = stack.pop()
        if h.n <= 1:
            continue
        loc = {v: i for i, v in enumerate(ids)}
        c, prefix = choose_cut(tu)
        A_orig = []
        for b in prefix:
            A_orig.extend(tu.vertices_under(b))
        A = [loc[v] for v in A_orig]
        in_a = set(A)
        X = minimal_partition(h, A)
        if len(X) > k:
            raise LabelError(f"cut side has {len(X)} > {k} module blocks")
        dx, dy = [], []
        for block in X:
            Y = sorted({x for v in block for x in h.adj[v] if x not in in_a})
            dx.append(_set_distances(h, block))
            dy.append(_set_distances(h, Y))
        for i in range(h.n):
            labels[ids[i]].levels.append(LevelRecord(
                1 if i in in_a else 0,
                tuple(row[i] for row in dx),
                tuple(row[i] for row in dy)))
        rest = [i for i in range(h.n) if i not in in_a]
        ha, ids_a, _ = induced_subgraph(h, A)
        hb, ids_b, _ = induced_subgraph(h, rest)
        stack.append((ha, [ids[i] for i in ids_a], split_partition_tree(tu, c, prefix, "A")))
        stack.append((hb, [ids[i] for i in ids_b], split_partition_tree(tu, c, prefix, "complement")))
    return LabelSet(labels, bh, k, list(g.names) if g.names is not None else None)


def decode_distance(lu: DistanceLabel, lv: DistanceLabel) -> int:
    """Distance between the labelled vertices, ``INF`` if disconnected."""
    if lu.build_hash != lv.build_hash:
        raise LabelMismatchError("labels come from different builds")
    if lu.vertex == lv.vertex:
        return 0
    best = INF
    for a, b in zip(lu.levels, lv.levels):
        ax, ay, bx, by = a.dX, a.dY, b.dX, b.dY
        for i in range(len(ax)):
            x = ax[i] + by[i] + 1
            if x < best:
                best = x
            y = bx[i] + ay[i] + 1
            if y < best:
                best = y
        if a.bit != b.bit:
            break
    return best


def apsp_via_labels(g: Graph, t: PartitionTree, labels: LabelSet | None = None) -> list[list[int]]:
    """All-pairs distances by decoding every pair of labels."""
    if labels is None:
        labels = build_labels(g, t)
    n = g.n
    out = [[0] * n for _ in range(n)]
    lab = labels.labels
    for u in range(n):
        lu, row = lab[u], out[u]
        for v in range(u + 1, n):
            d = decode_distance(lu, lab[v])
            row[v] = d
            out[v][u] = d
    return out


# -- binary format ------------------------------------------------------------
#
# header: b"CWDL", u32 version, u64 build hash (little endian), then varints
# n, k, a names flag (0/1) and, when set, n length-prefixed UTF-8 names.
# Per vertex: varint level count, then per level a bit byte, varint k_level
# and 2 * k_level varints holding d + 1 (0 encodes INF).

def _put_varint(buf: bytearray, x: int) -> None:
    while True:
        b = x & 0x7F
        x >>= 7
        if x:
            buf.append(b | 0x80)
        else:
            buf.append(b)
            return


class _Reader:
    def __init__(self, data: bytes, pos: int = 0):
        self.data, self.pos = data, pos

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise LabelError("label data is truncated")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def varint(self) -> int:
        x = shift = 0
        data = self.data
        while True:
            if self.pos >= len(data):
                raise LabelError("label data is truncated")
            b = data[self.pos]
            self.pos += 1
            x |= (b & 0x7F) << shift
            if not b & 0x80:
                return x
            shift += 7
            if shift > 70:
                raise LabelError("malformed varint")


def _encode_levels(levels: Sequence[LevelRecord]) -> bytearray:
    buf = bytearray()
    _put_varint(buf, len(levels))
    for lv in levels:
        buf.append(lv.bit)
        _put_varint(buf, lv.k_level)
        for d in lv.dX + lv.dY:
            _put_varint(buf, 0 if d >= INF else d + 1)
    return buf


def serialize_labels(ls: LabelSet) -> bytes:
    buf = bytearray(MAGIC)
    buf += struct.pack("<IQ", VERSION, ls.build_hash)
    _put_varint(buf, len(ls.labels))
    _put_varint(buf, ls.k)
    if ls.names is None:
        buf.append(0)
    else:
        buf.append(1)
        for name in ls.names:
            raw = name.encode()
            _put_varint(buf, len(raw))
            buf += raw
    for lab in ls.labels:
        buf += _encode_levels(lab.levels)
    return bytes(buf)


def deserialize_labels(data: bytes) -> LabelSet:
    if len(data) < 16:
        raise LabelError("label data is truncated")
    if data[:4] != MAGIC:
        raise LabelError("not a label file (bad magic)")
    version, bh = struct.unpack_from("<IQ", data, 4)
    if version != VERSION:
        raise LabelError(f"unsupported label version {version}")
    r = _Reader(data, 16)
    n, k = r.varint(), r.varint()
    flag = r.take(1)[0]
    names = None
    if flag == 1:
        names = [r.take(r.varint()).decode() for _ in range(n)]
    elif flag != 0:
        raise LabelError("malformed names section")
    labels = []
    for v in range(n):
        levels = []
        for _ in range(r.varint()):
            bit = r.take(1)[0]
            kl = r.varint()
            ds = [r.varint() for _ in range(2 * kl)]
            ds = [INF if d == 0 else d - 1 for d in ds]
            levels.append(LevelRecord(bit, tuple(ds[:kl]), tuple(ds[kl:])))
        labels.append(DistanceLabel(v, bh, levels))
    if r.pos != len(data):
        raise LabelError("trailing bytes after the last label")
    return LabelSet(labels, bh, k, names)


def write_labels(ls: LabelSet, f: BinaryIO) -> None:
    f.write(serialize_labels(ls))


def read_labels(f: BinaryIO) -> LabelSet:
    return deserialize_labels(f.read())
