"""Backend-independent pieces of the shared-memory layer."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, NamedTuple


class _Sentinel:
    __slots__ = ("_name",)

    def __init__(self, name: str) -> None:
        self._name = name

    def __repr__(self) -> str:
        return self._name

    def __reduce__(self) -> str:
        return self._name


#: Cell content meaning "no task stored here yet".
BOTTOM: Any = _Sentinel("BOTTOM")
#: Result of an extraction that found nothing.  Never a valid task id.
EMPTY: Any = _Sentinel("EMPTY")
#: Content of a cell nobody has written.  Reading it in the simulator is a bug.
UNINIT: Any = _Sentinel("UNINIT")


class Kind(enum.Enum):
    READ = "read"
    WRITE = "write"
    SWAP = "swap"
    CAS = "cas"

    @property
    def is_write(self) -> bool:
        return self is not Kind.READ


class Instruction(NamedTuple):
    kind: Kind
    cell: int
    arg: Any = None
    arg2: Any = None


class ShmemError(Exception):
    """Base class for errors raised by the shared-memory layer."""


class BoundExceeded(ShmemError):
    """Exploration ran past its step bound (not a semantic failure)."""


class RetryCapExceeded(BoundExceeded):
    """A retry loop hit its configured cap under the simulator."""


class ProgramError(ShmemError):
    """The program under exploration raised or broke a memory contract."""


class UninitializedRead(ProgramError):
    """A simulated process read a cell that was never written."""


class CapacityError(ValueError):
    """A bounded structure was asked to hold more than it can."""


@dataclass(frozen=True)
class AccessRecord:
    """One logged atomic instruction.

    Serialized as ``step,pid,kind,cell,arg,result``.
    """

    step: int
    pid: int
    kind: Kind
    cell: str
    arg: Any
    result: Any

    def to_line(self) -> str:
        return ",".join(
            [str(self.step), str(self.pid), self.kind.value, self.cell,
             format_value(self.arg), format_value(self.result)]
        )

    @classmethod
    def from_line(cls, line: str) -> "AccessRecord":
        step, pid, kind, cell, arg, result = line.strip().split(",")
        return cls(int(step), int(pid), Kind(kind), cell, parse_value(arg), parse_value(result))


@dataclass
class InstructionCount:
    reads: int = 0
    writes: int = 0
    swaps: int = 0
    cases: int = 0

    @property
    def total(self) -> int:
        return self.reads + self.writes + self.swaps + self.cases

    def add(self, kind: Kind, n: int = 1) -> None:
        if kind is Kind.READ:
            self.reads += n
        elif kind is Kind.WRITE:
            self.writes += n
        elif kind is Kind.SWAP:
            self.swaps += n
        else:
            self.cases += n


_NAMED = {"BOTTOM": BOTTOM, "EMPTY": EMPTY, "UNINIT": UNINIT, "true": True, "false": False, "": None}


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, (int, _Sentinel)):
        return repr(value)
    if isinstance(value, tuple):
        return "|".join(format_value(v) for v in value)
    return type(value).__name__


def parse_value(text: str) -> Any:
    text = text.strip()
    if text in _NAMED:
        return _NAMED[text]
    if "|" in text:
        return tuple(parse_value(t) for t in text.split("|"))
    try:
        return int(text)
    except ValueError:
        return text
