"""Unbounded emulations of the infinite ``Tasks`` array of a deque.

All buffers are addressed by a flat index ``i >= 1``.  Only the owner
writes task values or grows a buffer; thieves only read (and swap claim
flags).  The owner's knowledge of the buffer layout is local state that
the simulator snapshots with the rest of the owner's locals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

from .shmem.core import BOTTOM, UNINIT, CapacityError

DEFAULT_SEGMENT_LEN = 256


class FlatBuffer:
    """A fixed-size array; writing past the end is a capacity error."""

    def __init__(self, mem: Any, capacity: int, init: Any = UNINIT, prime: bool = True, name: str = "Tasks") -> None:
        self.capacity = capacity
        self.cells = mem.array(capacity, init, name)
        if prime:
            for j in range(min(2, capacity)):
                self.cells.write(j, BOTTOM)

    def _check(self, i: int) -> int:
        if not 1 <= i <= self.capacity:
            raise CapacityError(f"index {i} outside 1..{self.capacity}")
        return i - 1

    def read(self, i: int) -> Any:
        return self.cells.read(self._check(i))

    read_owned = read

    def write(self, i: int, value: Any) -> None:
        self.cells.write(self._check(i), value)

    def swap(self, i: int, value: Any) -> Any:
        return self.cells.swap(self._check(i), value)

    def reserve(self, i: int) -> None:
        self._check(i)

    def owner_state(self) -> tuple:
        return ()

    def restore_owner_state(self, state: tuple) -> None:
        pass


@dataclass(frozen=True, order=True)
class BufferIndex:
    """Position in a segmented buffer: segment ordinal, then 1-based offset."""

    ordinal: int
    offset: int
    seg_len: int = field(default=DEFAULT_SEGMENT_LEN, compare=False)

    def increment(self) -> "BufferIndex":
        if self.offset == self.seg_len:
            return BufferIndex(self.ordinal + 1, 1, self.seg_len)
        return BufferIndex(self.ordinal, self.offset + 1, self.seg_len)

    def flat(self) -> int:
        return self.ordinal * self.seg_len + self.offset

    @classmethod
    def from_flat(cls, i: int, seg_len: int = DEFAULT_SEGMENT_LEN) -> "BufferIndex":
        if i < 1:
            raise ValueError("flat indices start at 1")
        ordinal, off = divmod(i - 1, seg_len)
        return cls(ordinal, off + 1, seg_len)


def compare(a: BufferIndex, b: BufferIndex) -> int:
    """-1, 0 or 1 as ``a`` is before, equal to or after ``b``."""
    return (a > b) - (a < b)


class SegmentedBuffer:
    """Fixed-length segments published through a directory of link cells.

    Growth happens inside the owner's write: the new segment's first two
    cells are set to ``BOTTOM`` (when ``prime``) and only then is its link
    written, so a reader that finds the link never sees a half-built
    segment.  A read is two shared reads (link, then cell) and a write
    that grows is a constant number of extra writes.
    """

    def __init__(
        self,
        mem: Any,
        seg_len: int = DEFAULT_SEGMENT_LEN,
        init: Any = UNINIT,
        prime: bool = True,
        max_segments: int = 1 << 16,
        name: str = "Tasks",
        on_allocate: Callable[[int], None] | None = None,
    ) -> None:
        if seg_len < 2:
            raise ValueError("segment length must be at least 2")
        self.mem = mem
        self.seg_len = seg_len
        self.init = init
        self.prime = prime
        self.name = name
        self.on_allocate = on_allocate
        self.links = mem.array(max_segments, UNINIT, f"{name}.links")
        # segment arrays by ordinal; allocation is deterministic so simulator replays reuse them
        self._arrays: list[Any] = []
        self._linked = 0
        self._grow_to(0)

    @property
    def segments(self) -> int:
        """Number of segments linked so far (owner's view)."""
        return self._linked

    def _array(self, ordinal: int) -> Any:
        while len(self._arrays) <= ordinal:
            self._arrays.append(self.mem.array(self.seg_len, self.init, f"{self.name}.s{len(self._arrays)}"))
        return self._arrays[ordinal]

    def _grow_to(self, ordinal: int) -> None:
        if ordinal >= len(self.links):
            raise CapacityError(f"segment directory full ({len(self.links)} segments)")
        while self._linked <= ordinal:
            seg = self._array(self._linked)
            if self.prime:
                seg.write(0, BOTTOM)
                seg.write(1, BOTTOM)
            self.links.write(self._linked, seg)
            self._linked += 1
            if self.on_allocate is not None:
                self.on_allocate(self._linked - 1)

    def read(self, i: int) -> Any:
        ordinal, off = divmod(i - 1, self.seg_len)
        return self.links.read(ordinal).read(off)

    def read_owned(self, i: int) -> Any:
        ordinal, off = divmod(i - 1, self.seg_len)
        return self._arrays[ordinal].read(off)

    def write(self, i: int, value: Any) -> None:
        ordinal, off = divmod(i - 1, self.seg_len)
        if ordinal >= self._linked:
            self._grow_to(ordinal)
        self._arrays[ordinal].write(off, value)

    def swap(self, i: int, value: Any) -> Any:
        ordinal, off = divmod(i - 1, self.seg_len)
        return self.links.read(ordinal).swap(off, value)

    def reserve(self, i: int) -> None:
        ordinal = (i - 1) // self.seg_len
        if ordinal >= self._linked:
            self._grow_to(ordinal)

    def owner_state(self) -> tuple:
        return (self._linked,)

    def restore_owner_state(self, state: tuple) -> None:
        (self._linked,) = state

    # tuple-index interface
    def index(self, i: int) -> BufferIndex:
        return BufferIndex.from_flat(i, self.seg_len)

    def read_at(self, idx: BufferIndex) -> Any:
        return self.read(idx.flat())

    def write_at(self, idx: BufferIndex, value: Any) -> None:
        self.write(idx.flat(), value)


class DoublingBuffer:
    """An array that is copied into one twice as long when it fills.

    The owner builds and fills the new array, then publishes it by writing
    the ``current`` cell; a thief reads ``current`` before each access.
    """

    def __init__(self, mem: Any, capacity: int = 16, init: Any = UNINIT, prime: bool = True, name: str = "Tasks") -> None:
        if capacity < 2:
            raise ValueError("initial capacity must be at least 2")
        self.mem = mem
        self.init = init
        self.name = name
        self._arrays: dict[int, Any] = {}
        self.current = mem.cell(UNINIT, f"{name}.current")
        self._cap = capacity
        arr = self._array(capacity)
        if prime:
            arr.write(0, BOTTOM)
            arr.write(1, BOTTOM)
        self.current.write(arr)
        self.initial_capacity = capacity

    def _array(self, cap: int) -> Any:
        arr = self._arrays.get(cap)
        if arr is None:
            arr = self._arrays[cap] = self.mem.array(cap, self.init, f"{self.name}.{cap}")
        return arr

    @property
    def capacity(self) -> int:
        return self._cap

    @property
    def growths(self) -> int:
        return (self._cap // self.initial_capacity).bit_length() - 1

    def _grow(self, i: int) -> None:
        cap = self._cap
        while cap < i:
            cap *= 2
        old = self._arrays[self._cap]
        new = self._array(cap)
        for j in range(self._cap):
            new.write(j, old.read(j))
        self.current.write(new)
        self._cap = cap

    def read(self, i: int) -> Any:
        return self.current.read().read(i - 1)

    def read_owned(self, i: int) -> Any:
        return self._arrays[self._cap].read(i - 1)

    def write(self, i: int, value: Any) -> None:
        if i > self._cap:
            self._grow(i)
        self._arrays[self._cap].write(i - 1, value)

    def swap(self, i: int, value: Any) -> Any:
        return self.current.read().swap(i - 1, value)

    def reserve(self, i: int) -> None:
        if i > self._cap:
            self._grow(i)

    def owner_state(self) -> tuple:
        return (self._cap,)

    def restore_owner_state(self, state: tuple) -> None:
        (self._cap,) = state


BUFFERS = ("flat", "segmented", "doubling")


def make_buffer(mem: Any, kind: str, *, capacity: int = 1 << 12, seg_len: int = DEFAULT_SEGMENT_LEN,
                init: Any = UNINIT, prime: bool = True, name: str = "Tasks") -> Any:
    if kind == "flat":
        return FlatBuffer(mem, capacity, init, prime, name)
    if kind == "segmented":
        return SegmentedBuffer(mem, seg_len, init, prime, name=name)
    if kind == "doubling":
        return DoublingBuffer(mem, min(capacity, 16), init, prime, name)
    raise ValueError(f"unknown buffer kind {kind!r}")
