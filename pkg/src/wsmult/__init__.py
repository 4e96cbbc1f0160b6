"""Relaxed FIFO work-stealing queues with a simulator-backed correctness checker."""

from .algorithms import ALGORITHMS, make
from .maxreg import RangeMaxRegister, TreeMaxRegister
from .shmem import BOTTOM, EMPTY
from .wsqueue import WorkStealingQueue, make_queue

__all__ = ["ALGORITHMS", "BOTTOM", "EMPTY", "RangeMaxRegister", "TreeMaxRegister", "WorkStealingQueue",
           "make", "make_queue"]
