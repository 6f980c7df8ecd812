"""``cwdist`` command-line interface.

Every subcommand reads a k-expression file (``-`` for stdin) unless stated
otherwise.  Exit status is 0 on success, 1 for bad input and 2 when an
internal invariant or audit fails.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from contextlib import contextmanager

from . import __version__
from .ecc import GadgetError, diameter, median_set, solve_all, wiener_index
from .graph import INF, GraphError, write_edgelist
from .kexpr import KExprError, evaluate, expression_size, parse_kexpression, random_kexpression, to_sexpr
from .labeling import (LabelError, apsp_via_labels, build_labels, decode_distance,
                       deserialize_labels, serialize_labels)
from .oracle import OracleError, brute_apsp, brute_ecc_td
from .ptree import build_partition_tree, validate_partition_tree


class InvariantError(RuntimeError):
    pass


INPUT_ERRORS = (KExprError, GraphError, LabelError, OracleError, OSError, UnicodeDecodeError)


class Timer:
    def __init__(self):
        self.timings: dict[str, float] = {}

    @contextmanager
    def phase(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = round(time.perf_counter() - t0, 6)


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as f:
        return f.read()


def _load(path: str, timer: Timer, k: int | None = None):
    with timer.phase("parse"):
        e = parse_kexpression(_read_text(path), k)
    with timer.phase("evaluate"):
        g = evaluate(e).graph
    return e, g


def _tree(e, g, timer: Timer):
    with timer.phase("tree"):
        t = build_partition_tree(e)
        bad = validate_partition_tree(t, g)
    if bad is not None:
        raise InvariantError(f"partition tree invalid: {bad}")
    return t


def _emit(args, result: dict, timer: Timer, text: str) -> None:
    if getattr(args, "json", False):
        doc = {"version": __version__, "command": args.command, "result": result,
               "timings": timer.timings}
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _dist(d: int):
    return None if d >= INF else d


# -- subcommands ---------------------------------------------------------------

def cmd_parse(args, timer: Timer) -> int:
    e, g = _load(args.input, timer, args.k)
    res = {"n": e.n, "m": g.m, "width": e.width, "size": expression_size(e)}
    text = f"n={e.n} m={g.m} width={e.width} size={expression_size(e)}"
    if args.canonical:
        text += "\n" + to_sexpr(e)
    _emit(args, res, timer, text)
    return 0


def cmd_eval(args, timer: Timer) -> int:
    _, g = _load(args.input, timer)
    if args.out == "-":
        write_edgelist(g, sys.stdout)
    else:
        with open(args.out, "w", encoding="utf-8") as f:
            write_edgelist(g, f)
    return 0


def cmd_tree(args, timer: Timer) -> int:
    e, g = _load(args.input, timer)
    t = _tree(e, g, timer)
    res = {"nodes": len(t), "width": t.width, "root": t.root,
           "partitions": {str(a): [sorted(g.name(v) for v in blk) for blk in t.partition(a)]
                          for a in t.nodes()}}
    _emit(args, res, timer, t.dump(g.names))
    return 0


def cmd_label(args, timer: Timer) -> int:
    e, g = _load(args.input, timer)
    t = _tree(e, g, timer)
    with timer.phase("label"):
        ls = build_labels(g, t, check=False)
        data = serialize_labels(ls)
    if args.out == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        with open(args.out, "wb") as f:
            f.write(data)
        levels = max((len(lab.levels) for lab in ls.labels), default=0)
        print(f"wrote {len(ls)} labels ({len(data)} bytes, at most {levels} levels) to {args.out}",
              file=sys.stderr)
    return 0


def cmd_query(args, timer: Timer) -> int:
    with timer.phase("load"):
        if args.labels == "-":
            data = sys.stdin.buffer.read()
        else:
            with open(args.labels, "rb") as f:
                data = f.read()
        ls = deserialize_labels(data)
    u, v = ls.index_of(args.u), ls.index_of(args.v)
    with timer.phase("decode"):
        d = decode_distance(ls[u], ls[v])
    _emit(args, {"u": args.u, "v": args.v, "distance": _dist(d)}, timer,
          "inf" if d >= INF else str(d))
    return 0


def _matrix_text(g, d) -> str:
    names = [g.name(v) for v in range(g.n)]
    lines = ["\t" + "\t".join(names)]
    for v, row in enumerate(d):
        lines.append(names[v] + "\t" + "\t".join("inf" if x >= INF else str(x) for x in row))
    return "\n".join(lines)


def cmd_apsp(args, timer: Timer) -> int:
    e, g = _load(args.input, timer)
    t = _tree(e, g, timer)
    with timer.phase("apsp"):
        d = apsp_via_labels(g, t)
    res = {"names": [g.name(v) for v in range(g.n)], "distances": [[_dist(x) for x in row] for row in d]}
    _emit(args, res, timer, _matrix_text(g, d))
    return 0


def cmd_ecc(args, timer: Timer) -> int:
    if args.alpha <= 0:
        raise GraphError("--alpha must be positive")
    e, g = _load(args.input, timer)
    t = _tree(e, g, timer)
    with timer.phase("solve"):
        agg = solve_all(g, t, alpha=args.alpha, audit=args.audit, seed=args.seed, check=False)
    st = agg.stats
    res = {
        "vertices": [{"vertex": g.name(v), "ecc": agg.ecc[v], "td": agg.td[v]} for v in range(g.n)],
        "diameter": diameter(agg), "wiener": wiener_index(agg),
        "median": [g.name(v) for v in median_set(agg)],
        "stats": {"depth": st.depth, "cuts": st.cuts, "base_cases": st.base_cases,
                  "threshold": st.threshold, "max_block_count": st.max_block_count,
                  "max_cluster_size": st.max_cluster_size},
    }
    if args.audit:
        res["audit"] = {"passed": not st.violations, "violations": st.violations,
                        "audited_pairs": st.audited_pairs}
    lines = ["vertex\tecc\ttd"]
    lines += [f"{g.name(v)}\t{agg.ecc[v]}\t{agg.td[v]}" for v in range(g.n)]
    lines.append(f"diameter {res['diameter']}")
    lines.append(f"wiener {res['wiener']}")
    lines.append("median " + " ".join(res["median"]))
    if args.audit:
        lines.append("audit " + ("passed" if not st.violations else f"FAILED ({len(st.violations)})"))
    _emit(args, res, timer, "\n".join(lines))
    if st.violations:
        for msg in st.violations[:10]:
            print(f"audit: {msg}", file=sys.stderr)
        return 2
    return 0


def cmd_gen(args, timer: Timer) -> int:
    e = random_kexpression(args.n, args.k, seed=args.seed, require_connected=not args.any)
    sys.stdout.write(to_sexpr(e) + "\n")
    return 0


def cmd_oracle(args, timer: Timer) -> int:
    _, g = _load(args.input, timer)
    with timer.phase("oracle"):
        if args.what == "apsp":
            d = brute_apsp(g)
            res = {"names": [g.name(v) for v in range(g.n)],
                   "distances": [[_dist(x) for x in row] for row in d]}
            text = _matrix_text(g, d)
        else:
            ecc, td = brute_ecc_td(g)
            res = {"vertices": [{"vertex": g.name(v), "ecc": ecc[v], "td": td[v]} for v in range(g.n)],
                   "diameter": max(ecc), "wiener": sum(td)}
            text = "\n".join(["vertex\tecc\ttd"] + [f"{g.name(v)}\t{ecc[v]}\t{td[v]}" for v in range(g.n)])
    _emit(args, res, timer, text)
    return 0


def cmd_bench(args, timer: Timer) -> int:
    out = open(args.out, "w", newline="") if args.out != "-" else sys.stdout
    try:
        w = csv.writer(out)
        w.writerow(["n", "k", "m", "ecc_seconds", "depth", "label_seconds", "max_label_bits",
                    "apsp_seconds"])
        for n in args.sizes:
            e = random_kexpression(n, args.k, seed=args.seed)
            g = evaluate(e).graph
            t = build_partition_tree(e)
            t0 = time.perf_counter()
            agg = solve_all(g, t, alpha=args.alpha, check=False)
            t1 = time.perf_counter()
            ls = build_labels(g, t, check=False)
            t2 = time.perf_counter()
            bits = max(lab.bits() for lab in ls.labels)
            apsp_s = ""
            if n <= args.apsp_max:
                t3 = time.perf_counter()
                apsp_via_labels(g, t, ls)
                apsp_s = f"{time.perf_counter() - t3:.4f}"
            w.writerow([n, args.k, g.m, f"{t1 - t0:.4f}", agg.stats.depth, f"{t2 - t1:.4f}", bits, apsp_s])
            out.flush()
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


# -- argument parsing ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cwdist",
        description="Distance labels, eccentricities and total distances for graphs "
                    "given by a clique-width k-expression.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, fn, help_, inp=True, json_=True):
        sp = sub.add_parser(name, help=help_, description=help_)
        if inp:
            sp.add_argument("input", help="k-expression file, '-' for stdin")
        if json_:
            sp.add_argument("--json", action="store_true",
                            help="emit {version, command, result, timings} as JSON")
        sp.set_defaults(func=fn)
        return sp

    sp = add("parse", cmd_parse, "check a k-expression and report n, m, width and size")
    sp.add_argument("-k", type=int, default=None, help="reject labels above K")
    sp.add_argument("--canonical", action="store_true", help="also print the canonical form")

    sp = add("eval", cmd_eval, "write the generated graph as an edge list", json_=False)
    sp.add_argument("--out", "-o", default="-", help="output file, '-' for stdout")

    add("tree", cmd_tree, "print the validated partition tree")

    sp = add("label", cmd_label, "compute distance labels and write them in binary form", json_=False)
    sp.add_argument("--out", "-o", required=True, help="label file, '-' for stdout")

    sp = add("query", cmd_query, "distance between two vertices from a label file", inp=False)
    sp.add_argument("u", help="vertex name or id")
    sp.add_argument("v", help="vertex name or id")
    sp.add_argument("--labels", "-l", required=True, help="label file, '-' for stdin")

    add("apsp", cmd_apsp, "all-pairs distances decoded from labels")

    sp = add("ecc", cmd_ecc, "eccentricities, total distances, diameter, Wiener index, median")
    sp.add_argument("--audit", action="store_true", help="run the runtime cut and distance audits")
    sp.add_argument("--alpha", type=float, default=1.0,
                    help="base case when |U| <= max(3, alpha*k^2*log2 n) (default 1)")
    sp.add_argument("--seed", type=int, default=0, help="seed for audit sampling")

    sp = add("gen", cmd_gen, "print a random k-expression", inp=False, json_=False)
    sp.add_argument("-n", type=int, required=True, help="number of vertices")
    sp.add_argument("-k", type=int, required=True, help="maximum label (width)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--any", action="store_true", help="allow disconnected graphs")

    sp = add("oracle", cmd_oracle, "brute-force reference answers", inp=False)
    sp.add_argument("what", choices=["apsp", "ecc"])
    sp.add_argument("input", help="k-expression file, '-' for stdin")

    sp = add("bench", cmd_bench, "time the algorithms on generated graphs and print CSV",
             inp=False, json_=False)
    sp.add_argument("--sizes", type=int, nargs="+", default=[2000, 4000, 8000, 16000])
    sp.add_argument("-k", type=int, default=4)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--apsp-max", type=int, default=1000,
                    help="skip the all-pairs decode above this n")
    sp.add_argument("--out", "-o", default="-")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    timer = Timer()
    try:
        return args.func(args, timer)
    except INPUT_ERRORS as exc:
        print(f"cwdist {args.command}: {exc}", file=sys.stderr)
        return 1
    except (InvariantError, GadgetError, AssertionError) as exc:
        print(f"cwdist {args.command}: invariant violated: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
