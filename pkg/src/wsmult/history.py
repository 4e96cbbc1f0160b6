"""Concurrent histories: invocation/response events and the operations they form."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Any, Iterable, Sequence

from .shmem.core import format_value, parse_value

INV = "inv"
RES = "res"

#: operations that remove a task from a deque
EXTRACTIONS = frozenset({"take", "steal"})


class MalformedHistory(ValueError):
    pass


@dataclass(frozen=True)
class Event:
    """An invocation (``value`` = argument) or response (``value`` = result).

    Serialized as ``event,pid,op,arg_or_result,timestamp``.
    """

    kind: str
    pid: int
    op: str
    value: Any = None
    timestamp: int | None = None

    def to_line(self) -> str:
        ts = "" if self.timestamp is None else str(self.timestamp)
        return f"{self.kind},{self.pid},{self.op},{format_value(self.value)},{ts}"

    @classmethod
    def from_line(cls, line: str) -> "Event":
        kind, pid, op, value, ts = line.strip().split(",")
        if kind not in (INV, RES):
            raise MalformedHistory(f"bad event kind {kind!r}")
        return cls(kind, int(pid), op, parse_value(value), int(ts) if ts else None)


def inv(pid: int, op: str, arg: Any = None) -> Event:
    return Event(INV, pid, op, arg)


def res(pid: int, op: str, result: Any) -> Event:
    return Event(RES, pid, op, result)


@dataclass(frozen=True)
class Operation:
    index: int
    pid: int
    op: str
    arg: Any
    result: Any
    inv: int
    res: int | None
    seq: int  # position among the ops of the same process

    @property
    def pending(self) -> bool:
        return self.res is None

    @property
    def is_extraction(self) -> bool:
        return self.op in EXTRACTIONS

    def __repr__(self) -> str:
        arg = "" if self.arg is None else repr(self.arg)
        out = "?" if self.pending else repr(self.result)
        return f"p{self.pid}:{self.op}({arg})->{out}"


class History:
    """An immutable, well-formed sequence of events."""

    def __init__(self, events: Iterable[Event]) -> None:
        self.events: tuple[Event, ...] = tuple(events)
        self._validate()

    def _validate(self) -> None:
        open_ops: dict[int, Event] = {}
        for ev in self.events:
            if ev.kind == INV:
                if ev.pid in open_ops:
                    raise MalformedHistory(f"p{ev.pid} invoked {ev.op} while {open_ops[ev.pid].op} is pending")
                open_ops[ev.pid] = ev
            elif ev.kind == RES:
                started = open_ops.pop(ev.pid, None)
                if started is None or started.op != ev.op:
                    raise MalformedHistory(f"response {ev.op} of p{ev.pid} has no matching invocation")
            else:
                raise MalformedHistory(f"bad event kind {ev.kind!r}")

    @cached_property
    def operations(self) -> tuple[Operation, ...]:
        ops: list[dict[str, Any]] = []
        open_ops: dict[int, dict[str, Any]] = {}
        per_pid: dict[int, int] = {}
        for pos, ev in enumerate(self.events):
            if ev.kind == INV:
                rec = {"pid": ev.pid, "op": ev.op, "arg": ev.value, "result": None,
                       "inv": pos, "res": None, "seq": per_pid.get(ev.pid, 0)}
                per_pid[ev.pid] = rec["seq"] + 1
                ops.append(rec)
                open_ops[ev.pid] = rec
            else:
                rec = open_ops.pop(ev.pid)
                rec["result"] = ev.value
                rec["res"] = pos
        return tuple(Operation(index=i, **rec) for i, rec in enumerate(ops))

    @property
    def completed(self) -> tuple[Operation, ...]:
        return tuple(op for op in self.operations if not op.pending)

    @property
    def pids(self) -> list[int]:
        return sorted({ev.pid for ev in self.events})

    def precedes(self, a: Operation, b: Operation) -> bool:
        return a.res is not None and a.res < b.inv

    def concurrent(self, a: Operation, b: Operation) -> bool:
        return not self.precedes(a, b) and not self.precedes(b, a)

    def is_sequential(self) -> bool:
        ops = self.completed
        return all(self.precedes(a, b) or self.precedes(b, a)
                   for i, a in enumerate(ops) for b in ops[i + 1:])

    def to_text(self) -> str:
        return "".join(ev.to_line() + "\n" for ev in self.events)

    @classmethod
    def from_text(cls, text: str) -> "History":
        return cls(Event.from_line(line) for line in text.splitlines() if line.strip() and not line.startswith("#"))

    @classmethod
    def sequential(cls, calls: Sequence[tuple]) -> "History":
        """Build a history from ``(pid, op, arg, result)`` tuples run one after another."""
        events: list[Event] = []
        for pid, op, arg, result in calls:
            events.append(inv(pid, op, arg))
            events.append(res(pid, op, result))
        return cls(events)

    def __len__(self) -> int:
        return len(self.events)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, History) and self.events == other.events

    def __hash__(self) -> int:
        return hash(self.events)

    def __repr__(self) -> str:
        return f"History({list(self.operations)!r})"
