"""Run configuration, timing reports and the zero-cost experiments."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable

from ..algorithms import ALGORITHMS, FIFO_TAKE, make
from ..shmem.core import EMPTY, CapacityError
from ..shmem.native import NativeMemory

TREE_HEADS = ("ws-mult", "b-ws-mult")
MODES = ("put-take", "put-steal")


@dataclass
class BenchConfig:
    algorithm: str = "ws-wmult"
    buffer: str = "segmented"
    segment_len: int = 256
    ops: int = 1_000_000
    threads: int = 1
    reps: int = 5
    seed: int = 0
    trim: bool = True
    profile: str = "seq_cst"
    capacity: int | None = None  # tree register size; None sizes it to the run

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.buffer not in ("segmented", "doubling", "flat"):
            raise ValueError(f"unknown buffer {self.buffer!r}")
        if self.reps < 1:
            raise ValueError("reps must be positive")
        if self.trim and self.reps < 3:
            raise ValueError("trimming needs at least 3 repetitions")

    def build(self, mem: Any, puts: int) -> Any:
        """A fresh queue able to take ``puts`` puts."""
        capacity = self.capacity if self.capacity is not None else puts + 1
        if self.algorithm in TREE_HEADS and puts >= capacity:
            raise CapacityError(f"{self.algorithm} with a register of size {capacity} holds fewer than {puts} puts")
        return make(mem, self.algorithm, capacity=max(capacity, 2), buffer=self.buffer,
                    segment_len=self.segment_len)


def trimmed_mean(xs: list[float], trim: bool = True) -> float:
    """Mean after dropping one fastest and one slowest run."""
    if not xs:
        raise ValueError("no runs")
    if trim:
        if len(xs) < 3:
            raise ValueError("trimming needs at least 3 runs")
        xs = sorted(xs)[1:-1]
    return sum(xs) / len(xs)


@dataclass
class BenchReport:
    runs: list[float]
    trim: bool = True
    speedup: float | None = None
    info: dict[str, Any] = field(default_factory=dict)

    @property
    def trimmed_mean(self) -> float:
        return trimmed_mean(self.runs, self.trim)

    @property
    def kept(self) -> int:
        return len(self.runs) - 2 if self.trim else len(self.runs)

    def normalize(self, baseline: "BenchReport") -> float:
        """Speedup relative to ``baseline`` (single-thread Chase-Lev of the same experiment)."""
        self.speedup = baseline.trimmed_mean / self.trimmed_mean
        return self.speedup


def zero_cost(cfg: BenchConfig, mode: str, thieves: int = 1) -> BenchReport:
    """``cfg.ops`` puts by the owner, then as many takes, or steals by ``thieves`` thieves.

    Only the operations are timed.  ``info`` records the extraction counts
    of the last run and, for put-take, whether the takes returned every
    task in put order.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if thieves < 1:
        raise ValueError("need at least one thief")
    n = cfg.ops
    runs = []
    info: dict[str, Any] = {}
    for _ in range(cfg.reps):
        q = cfg.build(NativeMemory(cfg.profile), n)
        owner = q.owner()
        if mode == "put-take":
            seconds, got = _put_take(owner, n)
            info = {"extractions": sum(x is not EMPTY for x in got)}
            if FIFO_TAKE[cfg.algorithm]:
                info["in_order"] = got == list(range(1, n + 1))
        else:
            hands = [q.thief() for _ in range(thieves)]
            seconds, counts = _put_steal(owner, hands, n)
            info = {"extractions": sum(counts), "per_thief": counts}
        runs.append(seconds)
    return BenchReport(runs, cfg.trim, info=info)


def _put_take(owner: Any, n: int) -> tuple[float, list[Any]]:
    put, take = owner.put, owner.take
    got = [None] * n
    t0 = time.perf_counter()
    for x in range(1, n + 1):
        put(x)
    for i in range(n):
        got[i] = take()
    return time.perf_counter() - t0, got


def _put_steal(owner: Any, hands: list[Any], n: int) -> tuple[float, list[int]]:
    put = owner.put
    counts = [0] * len(hands)
    t0 = time.perf_counter()
    for x in range(1, n + 1):
        put(x)
    if len(hands) == 1:
        steal = hands[0].steal
        k = 0
        while steal() is not EMPTY:
            k += 1
        counts[0] = k
    else:
        def drain(i: int) -> None:
            steal = hands[i].steal
            k = 0
            while steal() is not EMPTY:
                k += 1
            counts[i] = k

        _run_threads(drain, len(hands))
    return time.perf_counter() - t0, counts


def _run_threads(fn: Callable[[int], None], n: int) -> None:
    errors: list[BaseException] = []

    def wrap(i: int) -> None:
        try:
            fn(i)
        except BaseException as exc:  # re-raised in the caller
            errors.append(exc)

    ts = [threading.Thread(target=wrap, args=(i,)) for i in range(n)]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    if errors:
        raise errors[0]
