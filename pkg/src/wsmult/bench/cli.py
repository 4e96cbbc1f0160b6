"""``bench`` command line: zero-cost, spanning-tree and suite runs."""

from __future__ import annotations

import argparse
import sys

from ..algorithms import ALGORITHMS
from .graphs import KINDS, gen_graph
from .harness import MODES, BenchConfig, zero_cost
from .spantree import spanning_tree
from .suite import full_suite, run_suite, write_csv


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algo", choices=ALGORITHMS, default="ws-wmult")
    p.add_argument("--buffer", choices=("segmented", "doubling"), default="segmented")
    p.add_argument("--segment-len", type=int, default=256)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--profile", choices=("seq_cst", "relaxed"), default="seq_cst")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bench", description="Work-stealing queue benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)

    zc = sub.add_parser("zero-cost", help="puts followed by takes or steals, no task work")
    _common(zc)
    zc.add_argument("--mode", choices=MODES, default="put-take")
    zc.add_argument("--ops", type=int, default=1_000_000)
    zc.add_argument("--thieves", type=int, default=1)

    st = sub.add_parser("spanning-tree", help="parallel spanning tree of a generated graph")
    _common(st)
    st.add_argument("--graph", choices=KINDS, default="torus2d")
    st.add_argument("--vertices", type=int, default=100_000)
    st.add_argument("--edges", type=int, default=None)
    d = st.add_mutually_exclusive_group()
    d.add_argument("--directed", dest="directed", action="store_true")
    d.add_argument("--undirected", dest="directed", action="store_false")
    st.set_defaults(directed=False)
    st.add_argument("--threads", type=int, default=1)

    su = sub.add_parser("suite", help="run a JSON suite file and write CSV")
    su.add_argument("--file", help="suite file; omit for the full spanning-tree suite")
    su.add_argument("--out", default="-", help="CSV path, '-' for stdout")
    su.add_argument("--vertices", type=int, default=100_000, help="graph size for the full suite")
    su.add_argument("--quiet", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "suite":
        suite = args.file if args.file else full_suite(args.vertices)
        log = None if args.quiet else (lambda msg: print(msg, file=sys.stderr, flush=True))
        rows = run_suite(suite, log)
        if args.out == "-":
            write_csv(rows, sys.stdout)
        else:
            with open(args.out, "w", newline="") as f:
                write_csv(rows, f)
        return 0 if all(r.status == "ok" for r in rows) else 1

    cfg = BenchConfig(args.algo, args.buffer, args.segment_len, reps=args.reps, seed=args.seed,
                      profile=args.profile, trim=args.reps >= 3)
    if args.command == "zero-cost":
        cfg.ops = args.ops
        report = zero_cost(cfg, args.mode, args.thieves)
        label = f"{args.mode} {args.algo} ops={args.ops}"
    else:
        g = gen_graph(args.graph, vertices=args.vertices, edges=args.edges, directed=args.directed,
                      seed=args.seed)
        cfg.threads = args.threads
        _, report = spanning_tree(g, args.threads, cfg)
        label = f"{args.graph} directed={args.directed} V={g.n} {args.algo} T={args.threads}"
    runs = " ".join(f"{s * 1000.0:.1f}" for s in report.runs)
    print(f"{label}: runs_ms=[{runs}] trimmed_mean_ms={report.trimmed_mean * 1000.0:.3f} {report.info}")
    if args.command == "spanning-tree" and not report.info["valid"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
