"""Record histories of programs running on real threads."""

from __future__ import annotations

import itertools
import random
import threading
import time
from dataclasses import dataclass
from typing import Any, Sequence

from ..history import INV, RES, Event, History
from .sim import Call


@dataclass
class NativeProcess:
    handle: Any
    calls: Sequence[Call]


def record(processes: Sequence[NativeProcess], seed: int = 0, jitter: float = 0.0) -> History:
    """Run one thread per process and return the merged history.

    Timestamps come from a single shared counter drawn before each
    invocation and after each response, so the event order respects real
    time.  ``jitter`` (seconds) adds seeded random pauses between
    operations to vary the interleaving.
    """
    clock = itertools.count()
    logs: list[list[Event]] = [[] for _ in processes]
    errors: list[BaseException] = []
    barrier = threading.Barrier(len(processes))

    def worker(pid: int) -> None:
        rng = random.Random(seed * 1_000_003 + pid)
        proc = processes[pid]
        out = logs[pid]
        try:
            barrier.wait()
            for call in proc.calls:
                if jitter:
                    time.sleep(rng.random() * jitter)
                out.append(Event(INV, pid, call.op, call.arg, next(clock)))
                value = call.invoke(proc.handle)
                out.append(Event(RES, pid, call.op, value, next(clock)))
        except BaseException as exc:  # surfaced to the caller after join
            errors.append(exc)

    threads = [threading.Thread(target=worker, args=(pid,), daemon=True) for pid in range(len(processes))]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if errors:
        raise errors[0]
    return History(sorted(itertools.chain.from_iterable(logs), key=lambda ev: ev.timestamp))
