"""Distance problems on graphs of bounded clique-width.

Build a graph from a k-expression, turn the expression into a partition
tree, then compute exact distance labels or all eccentricities and total
distances.
"""
__version__ = "0.1.0"

from .ecc import diameter, median_set, solve_all, wiener_index
from .graph import INF, Graph, sssp
from .kexpr import evaluate, parse_kexpression, random_kexpression
from .labeling import apsp_via_labels, build_labels, decode_distance
from .ptree import build_partition_tree, validate_partition_tree

__all__ = [
    "INF", "Graph", "sssp", "evaluate", "parse_kexpression", "random_kexpression",
    "build_partition_tree", "validate_partition_tree", "build_labels", "decode_distance",
    "apsp_via_labels", "solve_all", "diameter", "wiener_index", "median_set",
]
