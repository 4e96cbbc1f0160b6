"""Comparison queues: the Chase-Lev deque and idempotent FIFO work-stealing."""

from __future__ import annotations

from typing import Any

from .shmem.core import BOTTOM, EMPTY, RetryCapExceeded
from .taskbuf import DoublingBuffer


def _retry(max_retries: int | None, retries: int) -> int:
    retries += 1
    if max_retries is not None and retries > max_retries:
        raise RetryCapExceeded(f"CAS retried {retries} times")
    return retries


class ChaseLevDeque:
    """Owner works LIFO at the bottom; thieves CAS ``top`` to take from the top.

    The circular array doubles when full; the owner copies the live range
    into the new array before publishing it in ``array``.
    """

    def __init__(self, mem: Any, capacity: int = 16, max_retries: int | None = None) -> None:
        if capacity < 2 or capacity & (capacity - 1):
            raise ValueError("capacity must be a power of two >= 2")
        self.mem = mem
        self.top = mem.cell(0, "top")
        self.bottom = mem.cell(0, "bottom")
        self._arrays: dict[int, Any] = {}
        self.array = mem.cell(self._circular(capacity), "array")
        self.initial_capacity = capacity
        self.max_retries = max_retries
        self._owner: ChaseLevOwner | None = None

    def _circular(self, size: int) -> Any:
        arr = self._arrays.get(size)
        if arr is None:
            arr = self._arrays[size] = self.mem.array(size, BOTTOM, f"cl.{size}")
        return arr

    def owner(self) -> "ChaseLevOwner":
        if self._owner is not None:
            raise RuntimeError("a deque has exactly one owner handle")
        self._owner = ChaseLevOwner(self)
        return self._owner

    def thief(self) -> "ChaseLevThief":
        return ChaseLevThief(self)


class ChaseLevOwner:
    __slots__ = ("d", "b", "size")

    def __init__(self, d: ChaseLevDeque) -> None:
        self.d = d
        self.b = 0  # owner's copy of bottom; only the owner writes it
        self.size = d.initial_capacity

    def put(self, x: int) -> bool:
        d = self.d
        b = self.b
        t = d.top.read()
        arr = d._circular(self.size)
        if b - t >= self.size - 1:
            new = d._circular(self.size * 2)
            for i in range(t, b):
                new.write(i % (self.size * 2), arr.read(i % self.size))
            d.array.write(new)
            self.size *= 2
            arr = new
        arr.write(b % self.size, x)
        self.b = b + 1
        d.bottom.write(b + 1)
        return True

    def take(self) -> Any:
        d = self.d
        b = self.b - 1
        d.bottom.write(b)
        t = d.top.read()
        if b < t:
            d.bottom.write(t)
            self.b = t
            return EMPTY
        x = d._circular(self.size).read(b % self.size)
        if b > t:
            self.b = b
            return x
        if not d.top.cas(t, t + 1):
            x = EMPTY
        d.bottom.write(t + 1)
        self.b = t + 1
        return x

    def snapshot(self) -> tuple:
        return (self.b, self.size)

    def restore(self, snap: tuple) -> None:
        self.b, self.size = snap


class ChaseLevThief:
    __slots__ = ("d",)

    def __init__(self, d: ChaseLevDeque) -> None:
        self.d = d

    def steal(self) -> Any:
        d = self.d
        retries = 0
        while True:
            t = d.top.read()
            b = d.bottom.read()
            if t >= b:
                return EMPTY
            arr = d.array.read()
            x = arr.read(t % len(arr))
            if d.top.cas(t, t + 1):
                return x
            retries = _retry(d.max_retries, retries)

    def snapshot(self) -> tuple:
        return ()

    def restore(self, snap: tuple) -> None:
        pass


class IdempotentFifoQueue:
    """FIFO work stealing that may hand a task out more than once.

    Shared ``tasks``, ``head`` and ``tail``.  The owner's take reads the
    head task and only afterwards stores ``head + 1`` with a plain write,
    so a concurrent run of steals can be undone by that write.  Steals
    advance ``head`` by CAS.  Indices are absolute; ``tasks`` doubles.
    """

    def __init__(self, mem: Any, capacity: int = 16, max_retries: int | None = None) -> None:
        self.head = mem.cell(0, "head")
        self.tail = mem.cell(0, "tail")
        self.tasks = DoublingBuffer(mem, max(capacity, 2), BOTTOM, prime=False, name="tasks")
        self.max_retries = max_retries
        self._owner: IdempotentFifoOwner | None = None

    def owner(self) -> "IdempotentFifoOwner":
        if self._owner is not None:
            raise RuntimeError("a queue has exactly one owner handle")
        self._owner = IdempotentFifoOwner(self)
        return self._owner

    def thief(self) -> "IdempotentFifoThief":
        return IdempotentFifoThief(self)


class IdempotentFifoOwner:
    __slots__ = ("q", "t")

    def __init__(self, q: IdempotentFifoQueue) -> None:
        self.q = q
        self.t = 0  # owner's copy of tail

    def put(self, x: int) -> bool:
        q = self.q
        q.tasks.write(self.t + 1, x)
        self.t += 1
        q.tail.write(self.t)
        return True

    def take(self) -> Any:
        q = self.q
        h = q.head.read()
        if h == self.t:
            return EMPTY
        x = q.tasks.read_owned(h + 1)
        q.head.write(h + 1)
        return x

    def snapshot(self) -> tuple:
        return (self.t, self.q.tasks.owner_state())

    def restore(self, snap: tuple) -> None:
        self.t, tasks = snap
        self.q.tasks.restore_owner_state(tasks)


class IdempotentFifoThief:
    __slots__ = ("q",)

    def __init__(self, q: IdempotentFifoQueue) -> None:
        self.q = q

    def steal(self) -> Any:
        q = self.q
        retries = 0
        while True:
            h = q.head.read()
            t = q.tail.read()
            if h >= t:
                return EMPTY
            x = q.tasks.read(h + 1)
            if q.head.cas(h, h + 1):
                return x
            retries = _retry(q.max_retries, retries)

    def snapshot(self) -> tuple:
        return ()

    def restore(self, snap: tuple) -> None:
        pass
