"""Native backend: cells are plain Python objects shared by real threads.

CPython offers no user-level hardware atomics, so read-modify-write
instructions are made atomic with a lock.  The ``seq_cst`` profile also
takes the lock on plain reads and writes, which keeps every access totally
ordered even on interpreters without a global lock.  The ``relaxed``
profile leaves reads and writes bare and is meant for benchmarks only.
"""

from __future__ import annotations

import threading
from typing import Any

from .core import BOTTOM, InstructionCount

PROFILES = ("seq_cst", "relaxed")


class NativeCell:
    __slots__ = ("value", "_lock", "name")

    def __init__(self, value: Any = BOTTOM, name: str | None = None) -> None:
        self.value = value
        self._lock = threading.Lock()
        self.name = name

    def read(self) -> Any:
        return self.value

    def write(self, value: Any) -> None:
        self.value = value

    def swap(self, value: Any) -> Any:
        with self._lock:
            old = self.value
            self.value = value
        return old

    def cas(self, expected: Any, new: Any) -> bool:
        with self._lock:
            if self.value == expected:
                self.value = new
                return True
        return False

    def __repr__(self) -> str:
        return f"NativeCell({self.name or ''}={self.value!r})"


class SeqCstCell(NativeCell):
    __slots__ = ()

    def read(self) -> Any:
        with self._lock:
            return self.value

    def write(self, value: Any) -> None:
        with self._lock:
            self.value = value


class NativeArray:
    """Fixed-length array of cells sharing one lock for read-modify-writes."""

    __slots__ = ("values", "_lock", "name")

    def __init__(self, n: int, init: Any = BOTTOM, name: str | None = None) -> None:
        self.values = [init] * n
        self._lock = threading.Lock()
        self.name = name

    def __len__(self) -> int:
        return len(self.values)

    def read(self, i: int) -> Any:
        return self.values[i]

    def write(self, i: int, value: Any) -> None:
        self.values[i] = value

    def swap(self, i: int, value: Any) -> Any:
        with self._lock:
            old = self.values[i]
            self.values[i] = value
        return old

    def cas(self, i: int, expected: Any, new: Any) -> bool:
        with self._lock:
            if self.values[i] == expected:
                self.values[i] = new
                return True
        return False


class SeqCstArray(NativeArray):
    __slots__ = ()

    def read(self, i: int) -> Any:
        with self._lock:
            return self.values[i]

    def write(self, i: int, value: Any) -> None:
        with self._lock:
            self.values[i] = value


class CountingCell(SeqCstCell):
    __slots__ = ("_counter",)

    def __init__(self, counter: InstructionCount, value: Any = BOTTOM, name: str | None = None) -> None:
        super().__init__(value, name)
        self._counter = counter

    def read(self) -> Any:
        self._counter.reads += 1
        return self.value

    def write(self, value: Any) -> None:
        self._counter.writes += 1
        self.value = value

    def swap(self, value: Any) -> Any:
        self._counter.swaps += 1
        return super().swap(value)

    def cas(self, expected: Any, new: Any) -> bool:
        self._counter.cases += 1
        return super().cas(expected, new)


class CountingArray(NativeArray):
    __slots__ = ("_counter",)

    def __init__(self, counter: InstructionCount, n: int, init: Any = BOTTOM, name: str | None = None) -> None:
        super().__init__(n, init, name)
        self._counter = counter

    def read(self, i: int) -> Any:
        self._counter.reads += 1
        return self.values[i]

    def write(self, i: int, value: Any) -> None:
        self._counter.writes += 1
        self.values[i] = value

    def swap(self, i: int, value: Any) -> Any:
        self._counter.swaps += 1
        return super().swap(i, value)

    def cas(self, i: int, expected: Any, new: Any) -> bool:
        self._counter.cases += 1
        return super().cas(i, expected, new)


class NativeMemory:
    """Factory for cells backed by real shared objects.

    With ``count=True`` every access bumps :attr:`counter`; this is meant for
    single-threaded step-complexity measurements.
    """

    simulated = False

    def __init__(self, profile: str = "seq_cst", count: bool = False) -> None:
        if profile not in PROFILES:
            raise ValueError(f"unknown memory profile {profile!r}")
        self.profile = profile
        self.counter = InstructionCount() if count else None

    def cell(self, init: Any = BOTTOM, name: str | None = None) -> NativeCell:
        if self.counter is not None:
            return CountingCell(self.counter, init, name)
        if self.profile == "seq_cst":
            return SeqCstCell(init, name)
        return NativeCell(init, name)

    def array(self, n: int, init: Any = BOTTOM, name: str | None = None) -> NativeArray:
        if self.counter is not None:
            return CountingArray(self.counter, n, init, name)
        if self.profile == "seq_cst":
            return SeqCstArray(n, init, name)
        return NativeArray(n, init, name)

    def reset_counter(self) -> InstructionCount:
        """Return the counts accumulated so far and start a fresh tally."""
        if self.counter is None:
            raise RuntimeError("memory was created without count=True")
        old = InstructionCount(**vars(self.counter))
        self.counter.reads = self.counter.writes = self.counter.swaps = self.counter.cases = 0
        return old
