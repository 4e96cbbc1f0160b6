"""Parallel spanning tree on top of the work-stealing queues.

One task is one vertex to expand.  Expanding ``v`` tries to claim each
neighbour ``u`` by CAS on ``parent[u]`` from :data:`UNVISITED` to ``v`` and
puts the neighbours it claimed.  A vertex extracted twice is expanded
twice, which is harmless: its neighbours are already claimed, so the
second expansion claims nothing.

Each thread owns one queue.  A thread whose own queue is empty steals from
a victim drawn uniformly among the other threads.  Threads stop once every
vertex reachable from the root is claimed; that count is computed before
the timed phase.
"""

from __future__ import annotations

import random
import threading
import time
from typing import Any

from ..shmem.core import EMPTY
from ..shmem.native import NativeMemory
from .graphs import Graph
from .harness import BenchConfig, BenchReport, _run_threads

UNVISITED = -1


def verify_spanning_tree(g: Graph, parents: list[int], root: int) -> bool:
    """Is ``parents`` a spanning tree of the part of ``g`` reachable from ``root``?

    Every parent link must be an arc of ``g``, following links from any
    claimed vertex must reach the root without a cycle, and the claimed
    vertices must be exactly the reachable ones.
    """
    n = g.n
    if len(parents) != n or not 0 <= root < n or parents[root] != root:
        return False
    reach = g.reachable(root)
    for v in range(n):
        claimed = parents[v] != UNVISITED
        if claimed != reach[v]:
            return False
        if claimed and v != root:
            u = parents[v]
            if not 0 <= u < n or not g.has_arc(u, v):
                return False
    # 0 unknown, 1 on the current walk, 2 known to reach the root
    mark = [0] * n
    mark[root] = 2
    for v in range(n):
        if parents[v] == UNVISITED or mark[v]:
            continue
        walk = []
        u = v
        while mark[u] == 0:
            mark[u] = 1
            walk.append(u)
            u = parents[u]
        if mark[u] == 1:
            return False
        for w in walk:
            mark[w] = 2
    return True


def spanning_tree(g: Graph, threads: int, cfg: BenchConfig, root: int = 0) -> tuple[list[int], BenchReport]:
    """Run ``cfg.reps`` timed parallel traversals; return the last tree and the report.

    ``info`` holds ``valid`` (every run produced a valid tree), the number
    of claims and of extractions beyond one per claimed vertex (duplicates)
    in the last run.
    """
    if threads < 1:
        raise ValueError("need at least one thread")
    target = sum(g.reachable(root))
    runs = []
    valid = True
    parents: list[int] = []
    info: dict[str, Any] = {}
    for rep in range(cfg.reps):
        seconds, parents, claims, extractions = _traverse(g, threads, cfg, root, target, cfg.seed * 1009 + rep)
        runs.append(seconds)
        valid = valid and verify_spanning_tree(g, parents, root)
        info = {"claims": claims, "extractions": extractions, "duplicates": extractions - claims - 1}
    info["valid"] = valid
    return parents, BenchReport(runs, cfg.trim, info=info)


def _traverse(g: Graph, threads: int, cfg: BenchConfig, root: int, target: int,
              seed: int) -> tuple[float, list[int], int, int]:
    mem = NativeMemory(cfg.profile)
    parent = mem.array(g.n, UNVISITED, "parent")
    queues = [cfg.build(mem, g.n) for _ in range(threads)]
    owners = [q.owner() for q in queues]
    # thieves[i][j]: thread i's handle on thread j's queue
    thieves = [[q.thief() for q in queues] for _ in range(threads)]
    claims = [0] * threads
    extractions = [0] * threads
    adj = g.adj
    need = target - 1  # the root is claimed up front

    parent.write(root, root)
    owners[0].put(root)

    def work(tid: int) -> None:
        rng = random.Random(seed * 7919 + tid)
        own = owners[tid]
        mine = thieves[tid]
        take, put = own.take, own.put
        cas, read = parent.cas, parent.read
        claimed = extracted = 0
        while True:
            v = take()
            if v is EMPTY:
                claims[tid] = claimed
                if sum(claims) >= need:
                    break
                if threads == 1:
                    raise RuntimeError("single-thread traversal ran dry before claiming every reachable vertex")
                victim = rng.randrange(threads - 1)
                if victim >= tid:
                    victim += 1
                v = mine[victim].steal()
                if v is EMPTY:
                    time.sleep(0)
                    continue
            extracted += 1
            for u in adj[v]:
                if read(u) == UNVISITED and cas(u, UNVISITED, v):
                    claimed += 1
                    put(u)
        claims[tid] = claimed
        extractions[tid] = extracted

    t0 = time.perf_counter()
    if threads == 1:
        work(0)
    else:
        _run_threads(work, threads)
    seconds = time.perf_counter() - t0
    return seconds, list(parent.values), sum(claims), sum(extractions)
