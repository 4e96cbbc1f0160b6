"""Drained native stress runs checked by extraction counts.

Histories of a million operations are too large to keep as events, so a
stress run only records, per thread, the tasks it extracted.  That is
enough for the count-based guarantees: coverage, no process extracting
a task twice, at most one take and one steal per task, exactly once.
"""

from __future__ import annotations

import random
import sys
import threading
import time
from collections import Counter
from dataclasses import dataclass, field

from ..algorithms import make
from ..shmem.core import EMPTY
from ..shmem.native import NativeMemory
from .bounds import MODES


@dataclass
class StressResult:
    algorithm: str
    threads: int
    tasks: int
    seed: int
    extracted: list[list[int]]  # index 0 is the owner's takes, then one list per thief
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    @property
    def total(self) -> int:
        return sum(len(x) for x in self.extracted)


def stress_run(algorithm: str, threads: int, tasks: int, seed: int, take_share: float = 0.5,
               switch_interval: float = 1e-4) -> StressResult:
    """One owner and ``threads - 1`` thieves on a fresh queue until drained.

    The owner puts ``1..tasks`` and, after each put, takes with
    probability ``take_share``.  Thieves steal throughout.  Once the last
    put has returned, every thread keeps extracting until it has seen two
    ``EMPTY`` results in a row, so the run ends drained.
    """
    if threads < 2:
        raise ValueError("a stress run needs an owner and at least one thief")
    q = make(NativeMemory(), algorithm, capacity=tasks + 1)
    owner = q.owner()
    hands = [q.thief() for _ in range(threads - 1)]
    extracted: list[list[int]] = [[] for _ in range(threads)]
    done = threading.Event()
    start = threading.Barrier(threads)
    errors: list[BaseException] = []

    def drain(extract, out: list[int]) -> None:
        empties = 0
        while empties < 2:
            x = extract()
            if x is EMPTY:
                empties += 1
            else:
                empties = 0
                out.append(x)

    def run_owner() -> None:
        rng = random.Random(seed)
        out = extracted[0]
        put, take, draw = owner.put, owner.take, rng.random
        start.wait()
        for x in range(1, tasks + 1):
            put(x)
            if draw() < take_share:
                y = take()
                if y is not EMPTY:
                    out.append(y)
        done.set()
        drain(take, out)

    def run_thief(i: int) -> None:
        steal, out = hands[i].steal, extracted[i + 1]
        start.wait()
        while not done.is_set():
            x = steal()
            if x is EMPTY:
                time.sleep(0)  # let the owner refill rather than spin through the slice
            else:
                out.append(x)
        drain(steal, out)

    def guard(fn, *args) -> None:
        try:
            fn(*args)
        except BaseException as exc:  # reported after join
            errors.append(exc)
            done.set()

    old = sys.getswitchinterval()
    sys.setswitchinterval(switch_interval)
    try:
        workers = [threading.Thread(target=guard, args=(run_owner,), daemon=True)]
        workers += [threading.Thread(target=guard, args=(run_thief, i), daemon=True) for i in range(threads - 1)]
        for t in workers:
            t.start()
        for t in workers:
            t.join()
    finally:
        sys.setswitchinterval(old)
    if errors:
        raise errors[0]
    return StressResult(algorithm, threads, tasks, seed, extracted)


def check_stress(result: StressResult, mode: str) -> StressResult:
    """Fill ``result.problems`` with the violations of ``mode`` (see check_multiplicity_bounds)."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    problems = result.problems
    problems.clear()
    n = result.tasks
    seen = bytearray(n + 1)
    for out in result.extracted:
        for x in out:
            if not isinstance(x, int) or not 1 <= x <= n:
                problems.append(f"extracted {x!r}, which was never put")
                continue
            seen[x] = 1
    missing = n - sum(seen)
    if missing:
        problems.append(f"{missing} tasks were never extracted")
    for pid, out in enumerate(result.extracted):
        if len(set(out)) != len(out):
            problems.append(f"p{pid} extracted {len(out) - len(set(out))} tasks more than once")
    if mode in ("bounded", "exact"):
        steals = Counter(x for out in result.extracted[1:] for x in out)
        extra = sum(c - 1 for c in steals.values() if c > 1)
        if extra:
            problems.append(f"{extra} duplicate steals")
    if mode == "exact" and result.total != n:
        problems.append(f"{result.total} extractions of {n} tasks")
    return result
