"""Relaxed FIFO work-stealing queues: one owner, any number of thieves.

One skeleton covers every variant.  The owner keeps ``tail`` locally;
``Tasks`` always holds two ``BOTTOM`` cells past the last task; the
shared head index lives in a max register.  What changes between the
variants is how the head is read and advanced, and whether extractions
must also win a claim flag:

=============  ==========  =======  ==============================
algorithm      head        claims   guarantee
=============  ==========  =======  ==============================
ws-mult        tree        none     duplicates only if concurrent
ws-wmult       range       none     each process takes a task once
b-ws-mult      tree        steals   at most one steal per task
b-ws-wmult     range       steals   at most one steal per task
exact          range       all      each task extracted once
=============  ==========  =======  ==============================
"""

from __future__ import annotations

from typing import Any

from .maxreg import TreeMaxRegister
from .shmem.core import BOTTOM, EMPTY, CapacityError, RetryCapExceeded
from .taskbuf import DEFAULT_SEGMENT_LEN, SegmentedBuffer, make_buffer

HEADS = ("tree", "range")


class _TreeHead:
    """Head kept in a linearizable tree max register (no local copy)."""

    def __init__(self, mem: Any, capacity: int) -> None:
        self.reg = TreeMaxRegister(mem, capacity, 1, "Head")

    def read(self, handle: Any) -> int:
        return self.reg.max_read()

    def advance(self, handle: Any, v: int) -> None:
        self.reg.max_write(v)

    def reread(self, handle: Any, floor: int) -> int:
        # a restart reads the register again and drops the local increment, so a
        # thief that lost a claim waits for the winner's write instead of skipping ahead
        return self.reg.max_read()


class _RangeHead:
    """Head kept in one plain cell, read and written like a range max register.

    The write skips the refresh read: a caller only advances to ``head+1``
    right after reading ``head``, so the new value always exceeds its local copy.
    """

    def __init__(self, mem: Any) -> None:
        self.cell = mem.cell(1, "Head")

    def read(self, handle: Any) -> int:
        v = self.cell.read()
        if v > handle.head:
            handle.head = v
        return handle.head

    def advance(self, handle: Any, v: int) -> None:
        self.cell.write(v)
        handle.head = v

    def reread(self, handle: Any, floor: int) -> int:
        if floor > handle.head:
            handle.head = floor
        return self.read(handle)


class WorkStealingQueue:
    """Shared state of one queue; use :meth:`owner` once and :meth:`thief` per thief.

    ``bounded`` adds a claim flag per index that a steal must win by Swap;
    ``exact`` makes the owner's take claim it too.  ``capacity`` bounds the
    tree register (at most ``capacity - 1`` puts) and sizes a flat buffer.
    ``max_retries`` caps claim retries, which keeps simulated runs finite.
    """

    def __init__(
        self,
        mem: Any,
        head: str = "range",
        *,
        capacity: int = 1 << 16,
        buffer: str = "segmented",
        segment_len: int = DEFAULT_SEGMENT_LEN,
        bounded: bool = False,
        exact: bool = False,
        bottom_first: bool = False,
        max_retries: int | None = None,
    ) -> None:
        if head == "tree":
            self.head = _TreeHead(mem, capacity)
            self.max_puts: int | None = capacity - 1
        elif head == "range":
            self.head = _RangeHead(mem)
            self.max_puts = None
        else:
            raise ValueError(f"unknown head kind {head!r}")
        self.head_kind = head
        self.tasks = make_buffer(mem, buffer, capacity=capacity + 2, seg_len=segment_len)
        self.bounded = bounded or exact
        self.exact = exact
        # claim flags never move, so a swap can't land on a stale copy
        self.claims = SegmentedBuffer(mem, segment_len, True, prime=False, name="A") if self.bounded else None
        self.bottom_first = bottom_first
        self.max_retries = max_retries
        self._owner: OwnerHandle | None = None

    def owner(self) -> "OwnerHandle":
        if self._owner is not None:
            raise RuntimeError("a queue has exactly one owner handle")
        self._owner = OwnerHandle(self)
        return self._owner

    def thief(self) -> "ThiefHandle":
        return ThiefHandle(self)


def _retry(q: WorkStealingQueue, retries: int) -> int:
    retries += 1
    if q.max_retries is not None and retries > q.max_retries:
        raise RetryCapExceeded(f"claim retried {retries} times")
    return retries


def _steal(q: WorkStealingQueue, handle: Any) -> Any:
    head = q.head.read(handle)
    x = q.tasks.read(head)
    if x is BOTTOM:
        return EMPTY
    if q.claims is None:
        q.head.advance(handle, head + 1)
        return x
    retries = 0
    while not q.claims.swap(head, False):
        retries = _retry(q, retries)
        head = q.head.reread(handle, head + 1)
        x = q.tasks.read(head)
        if x is BOTTOM:
            return EMPTY
    q.head.advance(handle, head + 1)
    return x


class OwnerHandle:
    __slots__ = ("q", "tail", "head")

    def __init__(self, q: WorkStealingQueue) -> None:
        self.q = q
        self.tail = 0
        self.head = 1

    def put(self, x: int) -> bool:
        q = self.q
        if q.max_puts is not None and self.tail >= q.max_puts:
            raise CapacityError(f"queue holds at most {q.max_puts} puts")
        self.tail += 1
        tail = self.tail
        if q.claims is not None:
            q.claims.reserve(tail)
        if q.bottom_first:
            q.tasks.write(tail + 2, BOTTOM)
            q.tasks.write(tail, x)
        else:
            q.tasks.write(tail, x)
            q.tasks.write(tail + 2, BOTTOM)
        return True

    def take(self) -> Any:
        q = self.q
        head = q.head.read(self)
        if not q.exact:
            if head > self.tail:
                return EMPTY
            x = q.tasks.read_owned(head)
            q.head.advance(self, head + 1)
            return x
        retries = 0
        while head <= self.tail:
            x = q.tasks.read_owned(head)
            if q.claims.swap(head, False):
                q.head.advance(self, head + 1)
                return x
            retries = _retry(q, retries)
            head = q.head.reread(self, head + 1)
        return EMPTY

    def snapshot(self) -> tuple:
        q = self.q
        claims = q.claims.owner_state() if q.claims is not None else ()
        return (self.tail, self.head, q.tasks.owner_state(), claims)

    def restore(self, snap: tuple) -> None:
        self.tail, self.head, tasks, claims = snap
        self.q.tasks.restore_owner_state(tasks)
        if self.q.claims is not None:
            self.q.claims.restore_owner_state(claims)


class ThiefHandle:
    __slots__ = ("q", "head")

    def __init__(self, q: WorkStealingQueue) -> None:
        self.q = q
        self.head = 1

    def steal(self) -> Any:
        return _steal(self.q, self)

    def snapshot(self) -> tuple:
        return (self.head,)

    def restore(self, snap: tuple) -> None:
        (self.head,) = snap


VARIANTS: dict[str, dict[str, Any]] = {
    "ws-mult": dict(head="tree"),
    "ws-wmult": dict(head="range"),
    "b-ws-mult": dict(head="tree", bounded=True),
    "b-ws-wmult": dict(head="range", bounded=True),
    "exact": dict(head="range", bounded=True, exact=True),
}


def make_queue(mem: Any, algorithm: str, **kwargs: Any) -> WorkStealingQueue:
    try:
        opts = VARIANTS[algorithm]
    except KeyError:
        raise ValueError(f"unknown work-stealing variant {algorithm!r}") from None
    return WorkStealingQueue(mem, **{**opts, **kwargs})
