"""Algorithm ids shared by the checker, the stress tests and the benchmarks."""

from __future__ import annotations

from typing import Any

from .baselines import ChaseLevDeque, IdempotentFifoQueue
from .wsqueue import VARIANTS, make_queue

RELAXED = tuple(VARIANTS)
BASELINES = ("chase-lev", "idempotent-fifo")
ALGORITHMS = RELAXED + BASELINES

#: extraction guarantee of each algorithm, as a multiplicity-bound mode
BOUND_MODE = {
    "ws-mult": "mult",
    "ws-wmult": "weak",
    "b-ws-mult": "bounded",
    "b-ws-wmult": "bounded",
    "exact": "exact",
    "chase-lev": "exact",
    "idempotent-fifo": None,
}

#: whether the owner's take returns the oldest task
FIFO_TAKE = {alg: alg != "chase-lev" for alg in ALGORITHMS}


def make(mem: Any, algorithm: str, *, capacity: int = 1 << 16, buffer: str = "segmented",
         segment_len: int = 256, max_retries: int | None = None) -> Any:
    """Build a queue exposing ``owner()`` and ``thief()`` handles.

    ``capacity`` bounds the tree register of the ``*ws-mult`` variants and
    is the initial array size of the baselines.
    """
    if algorithm == "chase-lev":
        return ChaseLevDeque(mem, 16, max_retries)
    if algorithm == "idempotent-fifo":
        return IdempotentFifoQueue(mem, 16, max_retries)
    return make_queue(mem, algorithm, capacity=capacity, buffer=buffer, segment_len=segment_len,
                      max_retries=max_retries)
