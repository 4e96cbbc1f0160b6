"""Benchmark suites: a JSON file of experiments in, one CSV row per cell out.

A suite file looks like::

    {"algorithms": ["chase-lev", "ws-wmult"], "threads": [1, 2], "reps": 5,
     "seed": 0, "buffer": "segmented",
     "experiments": [
        {"graph": "torus2d", "vertices": 100000, "directed": false},
        {"zero_cost": "put-take", "ops": 1000000}]}

``threads`` may also be ``"hardware"`` (1 up to the CPU count).  Keys set
on an experiment override the suite-level ones.  Every speedup is relative
to single-thread Chase-Lev on the same experiment, which is measured even
when the suite does not list it.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass
from typing import Any, Iterable

from ..algorithms import ALGORITHMS
from .graphs import gen_graph
from .harness import BenchConfig, BenchReport, zero_cost
from .spantree import spanning_tree

COLUMNS = ("graph", "directed", "algorithm", "buffer", "threads", "trimmed_mean_ms",
           "speedup_vs_chaselev_1t", "status")
BASELINE = "chase-lev"


@dataclass
class Row:
    graph: str
    directed: str
    algorithm: str
    buffer: str
    threads: int
    trimmed_mean_ms: float | None
    speedup: float | None
    status: str = "ok"

    def as_list(self) -> list[Any]:
        ms = "" if self.trimmed_mean_ms is None else f"{self.trimmed_mean_ms:.3f}"
        sp = "" if self.speedup is None else f"{self.speedup:.4f}"
        return [self.graph, self.directed, self.algorithm, self.buffer, self.threads, ms, sp, self.status]


def hardware_threads() -> int:
    return os.cpu_count() or 1


def load_suite(path: str) -> dict[str, Any]:
    with open(path) as f:
        suite = json.load(f)
    if not isinstance(suite, dict) or not isinstance(suite.get("experiments"), list):
        raise ValueError(f"{path}: a suite is an object with an 'experiments' list")
    return suite


def _threads(spec: Any) -> list[int]:
    if spec == "hardware":
        return list(range(1, hardware_threads() + 1))
    if isinstance(spec, int):
        return [spec]
    return [int(t) for t in spec]


def run_suite(suite: dict[str, Any] | str, progress: Any = None) -> list[Row]:
    """Run every experiment x algorithm x thread count of ``suite``.

    A cell that raises, or whose spanning tree fails verification, yields
    a flagged row and the suite moves on.
    """
    if isinstance(suite, str):
        suite = load_suite(suite)
    rows: list[Row] = []
    for exp in suite["experiments"]:
        opts = {k: v for k, v in suite.items() if k != "experiments"}
        opts.update(exp)
        rows.extend(_run_experiment(opts, progress))
    return rows


def _run_experiment(opts: dict[str, Any], progress: Any) -> list[Row]:
    algorithms = list(opts.get("algorithms", ALGORITHMS))
    for a in algorithms:
        if a not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {a!r}")
    threads = _threads(opts.get("threads", "hardware"))
    buffer = opts.get("buffer", "segmented")
    base = {"buffer": buffer, "segment_len": int(opts.get("segment_len", 256)),
            "reps": int(opts.get("reps", 5)), "seed": int(opts.get("seed", 0)),
            "profile": opts.get("profile", "seq_cst")}
    if "zero_cost" in opts:
        mode = opts["zero_cost"]
        label, directed = f"zero-cost:{mode}", ""
        base["ops"] = int(opts.get("ops", 1_000_000))
        thieves = int(opts.get("thieves", 1))

        def measure(alg: str, t: int) -> BenchReport:
            return zero_cost(BenchConfig(alg, threads=t, **base), mode, thieves)

        threads = [1]
    else:
        kind = opts["graph"]
        is_directed = bool(opts.get("directed", False))
        g = gen_graph(kind, vertices=opts.get("vertices", 100_000), side=opts.get("side"),
                      edges=opts.get("edges"), directed=is_directed, seed=base["seed"])
        label, directed = kind, str(is_directed).lower()

        def measure(alg: str, t: int) -> BenchReport:
            _, report = spanning_tree(g, t, BenchConfig(alg, threads=t, **base))
            if not report.info["valid"]:
                raise RuntimeError("invalid spanning tree")
            return report

    cells: dict[tuple[str, int], BenchReport | Exception] = {}
    for alg in algorithms:
        for t in threads:
            try:
                cells[alg, t] = measure(alg, t)
            except Exception as exc:  # flagged in the row, the suite goes on
                cells[alg, t] = exc
            if progress is not None:
                progress(f"{label} {directed} {alg} T={t}: {_describe(cells[alg, t])}")
    if (BASELINE, 1) not in cells:
        try:
            cells[BASELINE, 1] = measure(BASELINE, 1)
        except Exception as exc:
            cells[BASELINE, 1] = exc
    baseline = cells[BASELINE, 1]
    rows = []
    for alg in algorithms:
        for t in threads:
            cell = cells[alg, t]
            if isinstance(cell, Exception):
                rows.append(Row(label, directed, alg, buffer, t, None, None, f"error: {cell}"))
                continue
            speedup = cell.normalize(baseline) if isinstance(baseline, BenchReport) else None
            status = "ok" if speedup is not None else "no baseline"
            rows.append(Row(label, directed, alg, buffer, t, cell.trimmed_mean * 1000.0, speedup, status))
    return rows


def _describe(cell: BenchReport | Exception) -> str:
    if isinstance(cell, Exception):
        return f"error: {cell}"
    return f"{cell.trimmed_mean * 1000.0:.1f} ms"


def write_csv(rows: Iterable[Row], out: Any = None) -> str:
    """Write ``rows`` with a header to the file object ``out``; also return the text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow(r.as_list())
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


def full_suite(vertices: int = 100_000, reps: int = 5, seed: int = 0) -> dict[str, Any]:
    """Every graph family, directed and undirected, every algorithm, 1..hardware threads."""
    from .graphs import KINDS

    return {"algorithms": list(ALGORITHMS), "threads": "hardware", "reps": reps, "seed": seed,
            "experiments": [{"graph": k, "vertices": vertices, "directed": d}
                            for k in KINDS for d in (False, True)]}
