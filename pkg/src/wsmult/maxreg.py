"""Max registers used to publish the head index of a deque.

:class:`TreeMaxRegister` is a bounded, linearizable max register built
from single-bit read/write cells arranged as a binary tree of switches.
:class:`RangeMaxRegister` is the relaxed variant whose reads may return
any value between the caller's last known value and the true maximum.
"""

from __future__ import annotations

from typing import Any

from .shmem.core import CapacityError


def tree_height(m: int) -> int:
    """Height of the switch tree for values ``1..m``: ``ceil(log2 m)``."""
    if m < 1:
        raise ValueError("capacity must be positive")
    return (m - 1).bit_length()


class TreeMaxRegister:
    """Wait-free max register over ``1..m`` using only reads and writes.

    The register stores ``t = value - 1`` in a complete binary tree of
    ``2**h - 1`` switch bits kept in heap order (root 0, children ``2k+1``
    and ``2k+2``).  Bit ``k`` set means the maximum lies in the right
    subtree of node ``k``.  Bits only ever go from 0 to 1.
    """

    def __init__(self, mem: Any, m: int, init: int = 1, name: str = "Head") -> None:
        self.m = m
        self.h = tree_height(m)
        self.bits = mem.array(max((1 << self.h) - 1, 1), 0, name)
        if init != 1:
            self.max_write(init)

    def max_read(self) -> int:
        read = self.bits.read
        node = 0
        t = 0
        for level in range(self.h - 1, -1, -1):
            if read(node):
                t |= 1 << level
                node = 2 * node + 2
            else:
                node = 2 * node + 1
        return t + 1

    def max_write(self, v: int) -> None:
        """Make the register at least ``v``: reads down the path, then writes back up."""
        if not 1 <= v <= self.m:
            raise CapacityError(f"value {v} outside 1..{self.m}")
        bits = self.bits
        read = bits.read
        t = v - 1
        node = 0
        pending: list[int] = []
        for level in range(self.h - 1, -1, -1):
            b = read(node)
            if (t >> level) & 1:
                if not b:
                    pending.append(node)
                node = 2 * node + 2
            else:
                if b:
                    return  # a larger value is already present
                node = 2 * node + 1
        for node in reversed(pending):
            bits.write(node, 1)

    # a tree register keeps no per-process state
    def snapshot(self) -> tuple:
        return ()

    def restore(self, snap: tuple) -> None:
        pass


class RangeMaxRegister:
    """Shared part of a range max register: one cell ``R`` initialized to 1."""

    def __init__(self, mem: Any, name: str = "R") -> None:
        self.R = mem.cell(1, name)

    def handle(self) -> "RangeHandle":
        return RangeHandle(self)


class RangeHandle:
    """Per-process access to a :class:`RangeMaxRegister`; owns the local ``r``."""

    __slots__ = ("reg", "r")

    def __init__(self, reg: RangeMaxRegister) -> None:
        self.reg = reg
        self.r = 1

    def rmax_write(self, x: int, refresh: bool = True) -> bool:
        if refresh:
            self.r = max(self.r, self.reg.R.read())
        if x > self.r:
            self.r = x
            self.reg.R.write(x)
        return True

    def rmax_read(self) -> int:
        self.r = max(self.r, self.reg.R.read())
        return self.r

    def snapshot(self) -> tuple:
        return (self.r,)

    def restore(self, snap: tuple) -> None:
        (self.r,) = snap
