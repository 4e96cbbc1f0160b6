"""Sequential and set-sequential specifications used as checking oracles.

A spec is a (possibly nondeterministic) state machine over hashable
states.  :meth:`step` maps a state and one call to every allowed
``(result, next state)`` pair.  Set-sequential specs also implement
:meth:`step_set`, which handles a concurrency class of calls that take
effect together.
"""

from __future__ import annotations

from typing import Any, Hashable, Sequence

from ..shmem.core import EMPTY

Call = tuple[int, str, Any]  # (pid, op, arg)


class SpecMachine:
    set_sequential = False
    initial: Hashable = ()

    def step(self, state: Hashable, pid: int, op: str, arg: Any) -> list[tuple[Any, Hashable]]:
        raise NotImplementedError

    def step_set(self, state: Hashable, calls: Sequence[Call]) -> list[tuple[tuple, Hashable]]:
        """Default: only singleton classes are allowed."""
        if len(calls) != 1:
            return []
        pid, op, arg = calls[0]
        return [((res,), nxt) for res, nxt in self.step(state, pid, op, arg)]


def _unknown(op: str) -> ValueError:
    return ValueError(f"operation {op!r} not in this specification")


class ExactFifo(SpecMachine):
    """Exact FIFO work stealing: take and steal both remove the oldest task."""

    initial: tuple = ()

    def step(self, state: tuple, pid: int, op: str, arg: Any) -> list[tuple[Any, tuple]]:
        if op == "put":
            return [(True, state + (arg,))]
        if op in ("take", "steal"):
            return [(state[0], state[1:])] if state else [(EMPTY, state)]
        raise _unknown(op)


class MultiplicityFifo(SpecMachine):
    """FIFO work stealing with multiplicity (set-sequential).

    A put is alone in its class.  A class of one take and/or any number
    of steals, all by distinct processes, removes the head task and every
    member returns it.  On the empty queue a single take or steal returns
    ``EMPTY``.
    """

    set_sequential = True
    initial: tuple = ()

    def step(self, state: tuple, pid: int, op: str, arg: Any) -> list[tuple[Any, tuple]]:
        return [(res[0], nxt) for res, nxt in self.step_set(state, [(pid, op, arg)])]

    def step_set(self, state: tuple, calls: Sequence[Call]) -> list[tuple[tuple, tuple]]:
        ops = [op for _, op, _ in calls]
        for op in ops:
            if op not in ("put", "take", "steal"):
                raise _unknown(op)
        if "put" in ops:
            return [((True,), state + (calls[0][2],))] if len(calls) == 1 else []
        if ops.count("take") > 1 or len({pid for pid, _, _ in calls}) != len(calls):
            return []
        if state:
            return [((state[0],) * len(calls), state[1:])]
        if len(calls) == 1:
            return [((EMPTY,), state)]
        return []


class WeakMultiplicityFifo(SpecMachine):
    """FIFO work stealing with weak multiplicity for ``n`` processes (pid 0 owns).

    Every process sees a suffix of the sequence of put tasks.  The state
    is ``(puts, positions)`` where process ``p``'s string is
    ``puts[positions[p]:]``; the shortest string belongs to the largest
    position ``M``.  An extraction by ``p`` may return any ``puts[j]`` with
    ``positions[p] <= j <= M`` and then starts ``p``'s string after ``j``.
    When the shortest string is empty it may also return ``EMPTY``,
    emptying ``p``'s string.
    """

    def __init__(self, n: int) -> None:
        self.n = n
        self.initial = ((), (0,) * n)

    def step(self, state: tuple, pid: int, op: str, arg: Any) -> list[tuple[Any, tuple]]:
        puts, pos = state
        if op == "put":
            if pid != 0:
                return []
            return [(True, (puts + (arg,), pos))]
        if op not in ("take", "steal"):
            raise _unknown(op)
        if (op == "take") != (pid == 0):
            return []
        top = max(pos)
        out = []
        for j in range(pos[pid], min(top, len(puts) - 1) + 1):
            out.append((puts[j], (puts, pos[:pid] + (j + 1,) + pos[pid + 1:])))
        if top == len(puts):
            out.append((EMPTY, (puts, pos[:pid] + (len(puts),) + pos[pid + 1:])))
        return out


class MaxRegisterSpec(SpecMachine):
    """Exact max register over naturals, initially ``init``."""

    def __init__(self, init: int = 1) -> None:
        self.initial = init

    def step(self, state: int, pid: int, op: str, arg: Any) -> list[tuple[Any, int]]:
        if op in ("max_write", "rmax_write"):
            return [(None if op == "max_write" else True, max(state, arg))]
        if op in ("max_read", "rmax_read"):
            return [(state, state)]
        raise _unknown(op)


class RangeMaxRegisterSpec(SpecMachine):
    """Range max register for ``n`` processes: a read may lag the true maximum.

    The state is each process's private value.  A read by ``i`` returns any
    value between its own and the largest, and adopts it.
    """

    def __init__(self, n: int) -> None:
        self.n = n
        self.initial = (1,) * n

    def step(self, state: tuple, pid: int, op: str, arg: Any) -> list[tuple[Any, tuple]]:
        if op == "rmax_write":
            if arg > state[pid]:
                return [(True, state[:pid] + (arg,) + state[pid + 1:])]
            return [(True, state)]
        if op == "rmax_read":
            return [(x, state[:pid] + (x,) + state[pid + 1:]) for x in range(state[pid], max(state) + 1)]
        raise _unknown(op)
