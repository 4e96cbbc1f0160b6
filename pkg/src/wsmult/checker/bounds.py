"""Extraction-count side conditions and sequential exactness."""

from __future__ import annotations

import random
from collections import defaultdict
from typing import Any, Callable, Iterable, Sequence

from ..history import History, Operation
from ..shmem.core import BOTTOM, EMPTY
from .search import Status, Verdict
from .specs import ExactFifo, MaxRegisterSpec

MODES = ("mult", "weak", "bounded", "exact")


def is_drained(h: History) -> bool:
    """Every process ends with two completed empty extractions invoked after the last put responded."""
    ops = h.operations
    puts = [op for op in ops if op.op == "put"]
    if any(op.pending for op in puts):
        return False
    last_put = max((op.res for op in puts), default=-1)
    for pid in h.pids:
        mine = [op for op in ops if op.pid == pid and op.is_extraction]
        if len(mine) < 2:
            return False
        for op in mine[-2:]:
            if op.pending or op.result is not EMPTY or op.inv < last_put:
                return False
    return True


def check_multiplicity_bounds(h: History, mode: str, fifo: bool = False) -> Verdict:
    """Check how often each task was extracted.

    ``mult``: all extractions of a task are pairwise concurrent.  ``weak``:
    no process extracts a task twice.  ``bounded``: at most one take and
    one steal per task.  ``exact``: at most one extraction per task.  In
    every mode an extracted value must have been put, and when the history
    is drained every put task must have been extracted.  With ``fifo``,
    each process must also receive tasks in increasing put order.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    ops = h.operations
    order: dict[Any, int] = {}
    for op in ops:
        if op.op == "put":
            order.setdefault(op.arg, len(order))
    by_task: dict[Any, list[Operation]] = defaultdict(list)
    problems: list[str] = []
    for op in ops:
        if op.is_extraction and not op.pending and op.result is not EMPTY:
            if op.result is BOTTOM or op.result not in order:
                problems.append(f"{op!r} returned a value never put")
            else:
                by_task[op.result].append(op)

    for task, exts in by_task.items():
        if mode == "mult":
            for i, a in enumerate(exts):
                for b in exts[i + 1:]:
                    if not h.concurrent(a, b):
                        problems.append(f"task {task}: {a!r} and {b!r} are not concurrent")
        elif mode == "weak":
            pids = [op.pid for op in exts]
            for pid in set(pids):
                if pids.count(pid) > 1:
                    problems.append(f"task {task} extracted {pids.count(pid)} times by p{pid}")
        elif mode == "bounded":
            for kind in ("take", "steal"):
                k = sum(op.op == kind for op in exts)
                if k > 1:
                    problems.append(f"task {task} returned by {k} {kind}s")
        elif len(exts) > 1:
            problems.append(f"task {task} extracted {len(exts)} times")

    if fifo:
        last: dict[int, int] = {}
        for op in ops:
            if op.is_extraction and op.result in order and op.result is not EMPTY:
                pos = order[op.result]
                if pos <= last.get(op.pid, -1):
                    problems.append(f"{op!r} is out of put order for p{op.pid}")
                last[op.pid] = pos

    if is_drained(h):
        missing = [t for t in order if t not in by_task]
        if missing:
            problems.append(f"tasks {missing} were never extracted")
    if problems:
        return Verdict(Status.REJECTED, reason="; ".join(problems[:20]))
    return Verdict(Status.ACCEPTED)


def exact_outputs(workload: Iterable[tuple]) -> list[Any]:
    """Outputs of an exact FIFO queue on ``("put", x)``, ``("take",)``, ``("steal", thief)`` steps."""
    spec = ExactFifo()
    state = spec.initial
    out = []
    for step in workload:
        (res, state), = spec.step(state, 0, step[0], step[1] if step[0] == "put" else None)
        out.append(res)
    return out


def run_queue(factory: Callable[[], Any], workload: Iterable[tuple], thieves: int = 1) -> list[Any]:
    """Run a workload single-threaded on a queue built by ``factory``."""
    q = factory()
    owner = q.owner()
    hands = [q.thief() for _ in range(thieves)]
    out = []
    for step in workload:
        if step[0] == "put":
            out.append(owner.put(step[1]))
        elif step[0] == "take":
            out.append(owner.take())
        elif step[0] == "steal":
            out.append(hands[step[1] if len(step) > 1 else 0].steal())
        else:
            raise ValueError(f"unknown workload step {step!r}")
    return out


def random_workload(n: int, seed: int, thieves: int = 1, take_share: float = 0.5,
                    steal_only: bool = False) -> list[tuple]:
    """``n`` random steps; puts carry fresh ids 1, 2, ..."""
    rng = random.Random(seed)
    out: list[tuple] = []
    next_id = 1
    for _ in range(n):
        if rng.random() < 0.5:
            out.append(("put", next_id))
            next_id += 1
        elif steal_only or rng.random() >= take_share:
            out.append(("steal", rng.randrange(thieves)))
        else:
            out.append(("take",))
    return out


def _compare(got: Sequence[Any], want: Sequence[Any], workload: Sequence[tuple]) -> Verdict:
    mismatches = [i for i, (g, w) in enumerate(zip(got, want)) if g is not w and g != w]
    if len(got) != len(want):
        mismatches.append(min(len(got), len(want)))
    if mismatches:
        i = mismatches[0]
        return Verdict(Status.REJECTED,
                       reason=f"{len(mismatches)} mismatches; first at step {i} {workload[i]!r}: "
                              f"got {got[i] if i < len(got) else None!r}, want {want[i] if i < len(want) else None!r}")
    return Verdict(Status.ACCEPTED)


def check_sequentially_exact(factory: Callable[[], Any], workload: Sequence[tuple], thieves: int = 1) -> Verdict:
    """Compare a single-threaded run of a queue with the exact FIFO oracle."""
    return _compare(run_queue(factory, workload, thieves), exact_outputs(workload), workload)


def register_outputs(workload: Iterable[tuple]) -> list[Any]:
    """Exact max-register outputs for ``("write", pid, x)`` / ``("read", pid)`` steps."""
    spec = MaxRegisterSpec()
    state = spec.initial
    out = []
    for step in workload:
        op = "rmax_write" if step[0] == "write" else "rmax_read"
        (res, state), = spec.step(state, step[1], op, step[2] if step[0] == "write" else None)
        out.append(res)
    return out


def check_register_sequentially_exact(handles: Sequence[Any], workload: Sequence[tuple]) -> Verdict:
    """Run a range-max-register workload over per-process ``handles`` against the exact oracle."""
    got = []
    for step in workload:
        if step[0] == "write":
            got.append(handles[step[1]].rmax_write(step[2]))
        else:
            got.append(handles[step[1]].rmax_read())
    return _compare(got, register_outputs(workload), workload)
