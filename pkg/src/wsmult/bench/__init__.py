"""Zero-cost and spanning-tree benchmarks for the work-stealing queues."""

from .graphs import KINDS, Graph, gen_graph
from .harness import BenchConfig, BenchReport, trimmed_mean, zero_cost
from .spantree import UNVISITED, spanning_tree, verify_spanning_tree
from .suite import COLUMNS, Row, full_suite, load_suite, run_suite, write_csv

__all__ = [
    "KINDS", "Graph", "gen_graph", "BenchConfig", "BenchReport", "trimmed_mean", "zero_cost",
    "UNVISITED", "spanning_tree", "verify_spanning_tree", "COLUMNS", "Row", "full_suite", "load_suite",
    "run_suite", "write_csv",
]
