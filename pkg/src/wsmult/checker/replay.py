"""Scripted schedule that makes idempotent FIFO hand one task out many times."""

from __future__ import annotations

from typing import Any

from ..algorithms import make
from ..history import History
from ..shmem.sim import Bounds, Call, Execution, Process, Program, SimMemory, Simulation


def _program(algorithm: str, z: int, thieves: int) -> Program:
    mem = SimMemory()
    q = make(mem, algorithm, capacity=max(z + 2, 4), max_retries=8)
    owner = q.owner()
    calls = [Call("put", i) for i in range(1, z + 1)] + [Call("take") for _ in range(z)]
    procs = [Process(owner, calls)]
    for t in range(thieves):
        # round r gives steal k to thief k % thieves
        n = sum(len(range(t, r, thieves)) for r in range(1, z + 1))
        procs.append(Process(q.thief(), [Call("steal") for _ in range(n)]))
    return Program(mem, procs)


def idempotent_counterexample_execution(z: int, algorithm: str = "idempotent-fifo", thieves: int = 1) -> Execution:
    """Run the adversarial schedule and return the whole execution.

    The owner puts ``z`` tasks.  Then, for ``r = z, z-1, ..., 1``: the
    owner starts a take and stops right before its first write; ``r``
    steals run one after another (round robin over the thieves); the
    owner finishes its take.
    """
    if z < 1:
        raise ValueError("z must be positive")
    sim = Simulation(lambda: _program(algorithm, z, thieves), Bounds(processes=thieves + 1, steps=100_000))
    for _ in range(z):
        sim.run_op(0)
    for r in range(z, 0, -1):
        paused = sim.run_until(0, lambda ins: ins is not None and ins.kind.is_write)
        for k in range(r):
            sim.run_op(1 + k % thieves)
        if paused:
            sim.run_op(0)
    return sim.execution()


def replay_idempotent_counterexample(z: int, algorithm: str = "idempotent-fifo", thieves: int = 1) -> History:
    return idempotent_counterexample_execution(z, algorithm, thieves).history


def extraction_counts(h: History) -> dict[Any, dict[str, int]]:
    """Per task, how many takes and steals returned it."""
    out: dict[Any, dict[str, int]] = {}
    for op in h.completed:
        if op.is_extraction and isinstance(op.result, int) and not isinstance(op.result, bool):
            counts = out.setdefault(op.result, {"take": 0, "steal": 0})
            counts[op.op] += 1
    return out
