"""Clique-width k-expressions.

Concrete syntax is an S-expression::

    (v <label> <name>)        new vertex
    (u <expr> <expr>)         disjoint union
    (j <i> <j> <expr>)        join label classes i and j
    (r <i> <j> <expr>)        relabel i -> j

Whitespace is free and ``;`` starts a comment.  All traversals are
iterative, so very deep (caterpillar-shaped) expressions are fine.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .graph import Graph, is_connected

VERT, UNION, JOIN, RELAB = "v", "u", "j", "r"


class KExprError(ValueError):
    def __init__(self, msg: str, line: int | None = None, col: int | None = None):
        self.line, self.col = line, col
        where = f" at line {line}, column {col}" if line is not None else ""
        super().__init__(msg + where)


@dataclass(eq=False)
class KNode:
    kind: str
    i: int = 0            # label for VERT; first label for JOIN/RELAB
    j: int = 0
    name: str = ""
    kids: tuple["KNode", ...] = ()
    pos: tuple[int, int] | None = field(default=None, repr=False)


def vert(label: int, name: str) -> KNode:
    return KNode(VERT, label, 0, name)


def union(a: KNode, b: KNode) -> KNode:
    return KNode(UNION, kids=(a, b))


def join(i: int, j: int, e: KNode) -> KNode:
    return KNode(JOIN, i, j, kids=(e,))


def relabel(i: int, j: int, e: KNode) -> KNode:
    return KNode(RELAB, i, j, kids=(e,))


def _postorder(root: KNode):
    stack = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            yield node
        else:
            stack.append((node, True))
            for kid in reversed(node.kids):
                stack.append((kid, False))


@dataclass(eq=False)
class KExpression:
    root: KNode
    width: int
    size: int
    names: list[str]     # vertex names, in left-to-right order of appearance

    @property
    def n(self) -> int:
        return len(self.names)

    def __str__(self) -> str:
        return to_sexpr(self)


def validate(root: KNode, k: int | None = None) -> KExpression:
    """Check the structural rules and return the wrapped expression."""
    labels_of: dict[int, set[int]] = {}
    names: list[str] = []
    seen: set[str] = set()
    size = 0
    width = 0

    def fail(msg, node):
        line, col = node.pos if node.pos else (None, None)
        raise KExprError(msg, line, col)

    for node in _postorder(root):
        size += 1
        if node.kind == VERT:
            if node.i < 1 or (k is not None and node.i > k):
                fail(f"label {node.i} out of range", node)
            if node.name in seen:
                fail(f"duplicate vertex name {node.name!r}", node)
            seen.add(node.name)
            names.append(node.name)
            width = max(width, node.i)
            labels_of[id(node)] = {node.i}
            continue
        for lab in (node.i, node.j) if node.kind in (JOIN, RELAB) else ():
            if lab < 1 or (k is not None and lab > k):
                fail(f"label {lab} out of range", node)
            width = max(width, lab)
        if node.kind == UNION:
            a, b = node.kids
            labels_of[id(node)] = labels_of.pop(id(a)) | labels_of.pop(id(b))
        elif node.kind == JOIN:
            if node.i == node.j:
                fail("join labels must differ", node)
            labels_of[id(node)] = labels_of.pop(id(node.kids[0]))
        elif node.kind == RELAB:
            if node.i == node.j:
                fail("relabel labels must differ", node)
            labs = labels_of.pop(id(node.kids[0]))
            if node.i not in labs:
                fail(f"unnecessary relabel: no vertex carries label {node.i}", node)
            labs.discard(node.i)
            labs.add(node.j)
            labels_of[id(node)] = labs
        else:
            fail(f"unknown node kind {node.kind!r}", node)
    return KExpression(root, width, size, names)


def expression_size(e: KExpression) -> int:
    """Number of operations (all four node kinds)."""
    return sum(1 for _ in _postorder(e.root))


# -- text form ---------------------------------------------------------------

def _tokens(text: str):
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line, col = line + 1, 1
            i += 1
        elif ch.isspace():
            i += 1
            col += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            yield ch, line, col
            i += 1
            col += 1
        else:
            start = i
            while i < n and not text[i].isspace() and text[i] not in "();":
                i += 1
            yield text[start:i], line, col
            col += i - start


_ARITY = {VERT: 2, UNION: 0, JOIN: 2, RELAB: 2}
_KIDS = {VERT: 0, UNION: 2, JOIN: 1, RELAB: 1}


def parse_kexpression(text: str, k: int | None = None) -> KExpression:
    """Parse and validate an S-expression k-expression."""
    # frames: [kind, pos, atoms, kids]
    stack: list[list] = []
    root = None
    toks = _tokens(text)
    for tok, line, col in toks:
        if root is not None:
            raise KExprError("trailing input after expression", line, col)
        if tok == "(":
            try:
                kind, kl, kc = next(toks)
            except StopIteration:
                raise KExprError("unexpected end of input", line, col) from None
            if kind not in _ARITY:
                raise KExprError(f"unknown operator {kind!r}", kl, kc)
            if stack and len(stack[-1][2]) < _ARITY[stack[-1][0]]:
                raise KExprError("expected atom, found '('", line, col)
            stack.append([kind, (line, col), [], []])
        elif tok == ")":
            if not stack:
                raise KExprError("unbalanced ')'", line, col)
            kind, pos, atoms, kids = stack.pop()
            if len(atoms) != _ARITY[kind] or len(kids) != _KIDS[kind]:
                raise KExprError(f"wrong number of arguments for {kind!r}", *pos)
            if kind == VERT:
                try:
                    lab = int(atoms[0])
                except ValueError:
                    raise KExprError(f"bad label {atoms[0]!r}", *pos) from None
                node = KNode(VERT, lab, 0, atoms[1], pos=pos)
            else:
                try:
                    i, j = (int(a) for a in atoms) if atoms else (0, 0)
                except ValueError:
                    raise KExprError(f"bad label in {atoms!r}", *pos) from None
                node = KNode(kind, i, j, kids=tuple(kids), pos=pos)
            if stack:
                stack[-1][3].append(node)
            else:
                root = node
        else:
            if not stack:
                raise KExprError(f"unexpected atom {tok!r}", line, col)
            frame = stack[-1]
            if len(frame[2]) >= _ARITY[frame[0]] or frame[3]:
                raise KExprError(f"unexpected atom {tok!r}", line, col)
            frame[2].append(tok)
    if stack:
        raise KExprError("unexpected end of input, unclosed '('", *stack[-1][1])
    if root is None:
        raise KExprError("empty expression", 1, 1)
    return validate(root, k)


def to_sexpr(e: KExpression | KNode) -> str:
    root = e.root if isinstance(e, KExpression) else e
    out: list[str] = []
    stack: list = [root]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        if item.kind == VERT:
            out.append(f"(v {item.i} {item.name})")
            continue
        head = "(u" if item.kind == UNION else f"({item.kind} {item.i} {item.j}"
        out.append(head)
        stack.append(")")
        for kid in reversed(item.kids):
            stack.append(kid)
            stack.append(" ")
    return "".join(out)


def same_tree(a: KNode, b: KNode) -> bool:
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if (x.kind, x.i, x.j, x.name, len(x.kids)) != (y.kind, y.i, y.j, y.name, len(y.kids)):
            return False
        stack.extend(zip(x.kids, y.kids))
    return True


# -- evaluation --------------------------------------------------------------

@dataclass
class LabeledGraph:
    graph: Graph
    labels: list[int]


def evaluate(e: KExpression) -> LabeledGraph:
    """Build the labelled graph generated by ``e``.

    Vertex ids follow the order of appearance of ``(v ...)`` nodes.
    """
    ids = {name: i for i, name in enumerate(e.names)}
    edges: set[tuple[int, int]] = set()
    state: dict[int, dict[int, list[int]]] = {}
    for node in _postorder(e.root):
        if node.kind == VERT:
            state[id(node)] = {node.i: [ids[node.name]]}
        elif node.kind == UNION:
            a = state.pop(id(node.kids[0]))
            b = state.pop(id(node.kids[1]))
            if sum(map(len, a.values())) < sum(map(len, b.values())):
                a, b = b, a
            for lab, vs in b.items():
                cur = a.get(lab)
                if cur is None:
                    a[lab] = vs
                elif len(cur) >= len(vs):
                    cur.extend(vs)
                else:
                    vs.extend(cur)
                    a[lab] = vs
            state[id(node)] = a
        elif node.kind == JOIN:
            cls = state.pop(id(node.kids[0]))
            for x in cls.get(node.i, ()):
                for y in cls.get(node.j, ()):
                    edges.add((x, y) if x < y else (y, x))
            state[id(node)] = cls
        else:
            cls = state.pop(id(node.kids[0]))
            moved = cls.pop(node.i)
            cur = cls.get(node.j)
            if cur is None:
                cls[node.j] = moved
            elif len(cur) >= len(moved):
                cur.extend(moved)
            else:
                moved.extend(cur)
                cls[node.j] = moved
            state[id(node)] = cls
    labels = [0] * e.n
    for lab, vs in state.pop(id(e.root)).items():
        for v in vs:
            labels[v] = lab
    return LabeledGraph(Graph(e.n, sorted(edges), names=e.names), labels)


# -- random instances --------------------------------------------------------

def random_kexpression(n: int, k: int, seed: int = 0, require_connected: bool = True,
                       kill_prob: float = 0.6, extra_join_prob: float = 0.25,
                       merge_prob: float = 0.15, connect_prob: float = 0.7,
                       max_tries: int = 50) -> KExpression:
    """Random valid expression on ``n`` vertices of width at most ``k``.

    Parts are merged pairwise at random; every merge joins an active label of
    each side, which keeps the output connected.  When ``k >= 3`` label ``k``
    is a sink that is never joined again, keeping label classes (and so the
    edge count) small.
    """
    if n < 1:
        raise KExprError("n must be at least 1")
    if k < 1 or (k < 2 and n > 1):
        raise KExprError("need k >= 2 to build an expression on more than one vertex"
                         if k == 1 else "k must be at least 1")
    if n == 1:
        return validate(vert(1, "v0"))
    rng = random.Random(seed)
    for _ in range(max_tries):
        root = _grow(n, k, rng, require_connected, kill_prob, extra_join_prob,
                     merge_prob, connect_prob)
        e = validate(root)
        if not require_connected or is_connected(evaluate(e).graph):
            return e
    raise KExprError("could not generate a connected expression")


def _grow(n, k, rng, require_connected, kill_prob, extra_join_prob, merge_prob,
          connect_prob) -> KNode:
    sink = k if k >= 3 else None
    active = list(range(1, k if sink else k + 1))
    parts = []
    for t in range(n):
        lab = rng.choice(active)
        parts.append((vert(lab, f"v{t}"), {lab: 1}))
    while len(parts) > 1:
        a = rng.randrange(len(parts))
        b = rng.randrange(len(parts) - 1)
        if b >= a:
            b += 1
        (left, lc), (right, rc) = parts[a], parts[b]
        for idx in sorted((a, b), reverse=True):
            parts[idx] = parts[-1]
            parts.pop()
        if require_connected or rng.random() < connect_prob:
            la = [x for x in lc if x != sink]
            ra = [x for x in rc if x != sink]
            pairs = [(x, y) for x in la for y in ra if x != y]
            if not pairs:
                x = la[0]
                y = rng.choice([z for z in active if z != x])
                right = relabel(x, y, right)
                rc = dict(rc)
                rc[y] = rc.pop(x) + rc.get(y, 0)
                pairs = [(x, y)]
            x, y = rng.choice(pairs)
            node = union(left, right)
            counts = _merge_counts(lc, rc)
            node = join(x, y, node)
        else:
            node = union(left, right)
            counts = _merge_counts(lc, rc)
        live = [x for x in counts if x != sink]
        if len(live) >= 2 and rng.random() < extra_join_prob:
            x, y = rng.sample(live, 2)
            node = join(x, y, node)
        if len(live) >= 2 and rng.random() < merge_prob:
            x, y = rng.sample(live, 2)
            node = relabel(x, y, node)
            counts[y] += counts.pop(x)
            live.remove(x)
        if sink is not None:
            rng.shuffle(live)
            for x in live[1:]:
                if rng.random() < kill_prob:
                    node = relabel(x, sink, node)
                    counts[sink] = counts.get(sink, 0) + counts.pop(x)
        parts.append((node, counts))
    return parts[0][0]


def _merge_counts(a: dict[int, int], b: dict[int, int]) -> dict[int, int]:
    out = dict(a)
    for lab, c in b.items():
        out[lab] = out.get(lab, 0) + c
    return out
