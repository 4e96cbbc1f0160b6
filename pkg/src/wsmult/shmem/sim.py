"""Simulated backend: a deterministic step machine over shared cells.

Each process runs its operations inside a greenlet.  Every shared access
suspends the greenlet and hands an :class:`Instruction` to the scheduler,
which applies it to an immutable memory snapshot.  A process is resumed
by restoring its handle's local variables and replaying the results it
has already observed in the current operation, so a machine state is a
plain hashable value and the explorer can branch or memoize freely.
"""

from __future__ import annotations

import bisect

from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, NamedTuple, Sequence

import greenlet

from ..history import INV, RES, Event, History
from .core import (
    BOTTOM,
    UNINIT,
    AccessRecord,
    BoundExceeded,
    Instruction,
    InstructionCount,
    Kind,
    ProgramError,
    UninitializedRead,
)


class _ProcGreenlet(greenlet.greenlet):
    pass


class _Done(NamedTuple):
    value: Any


def _same(a: Any, b: Any) -> bool:
    return type(a) is type(b) and a == b


class SimCell:
    __slots__ = ("mem", "id")

    def __init__(self, mem: "SimMemory", cid: int) -> None:
        self.mem = mem
        self.id = cid

    def read(self) -> Any:
        return self.mem.access(Kind.READ, self.id)

    def write(self, value: Any) -> None:
        self.mem.access(Kind.WRITE, self.id, value)

    def swap(self, value: Any) -> Any:
        return self.mem.access(Kind.SWAP, self.id, value)

    def cas(self, expected: Any, new: Any) -> bool:
        return self.mem.access(Kind.CAS, self.id, expected, new)

    @property
    def name(self) -> str:
        return self.mem.name(self.id)

    def __repr__(self) -> str:
        return f"SimCell({self.name})"


class SimArray:
    __slots__ = ("mem", "base", "n", "name")

    def __init__(self, mem: "SimMemory", base: int, n: int, name: str) -> None:
        self.mem = mem
        self.base = base
        self.n = n
        self.name = name

    def __len__(self) -> int:
        return self.n

    def _cid(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(f"{self.name}[{i}] out of range")
        return self.base + i

    def read(self, i: int) -> Any:
        return self.mem.access(Kind.READ, self._cid(i))

    def write(self, i: int, value: Any) -> None:
        self.mem.access(Kind.WRITE, self._cid(i), value)

    def swap(self, i: int, value: Any) -> Any:
        return self.mem.access(Kind.SWAP, self._cid(i), value)

    def cas(self, i: int, expected: Any, new: Any) -> bool:
        return self.mem.access(Kind.CAS, self._cid(i), expected, new)

    def __repr__(self) -> str:
        return f"SimArray({self.name}, n={self.n})"


class SimMemory:
    """Cell allocator for the simulator.

    Outside a simulated process, accesses run immediately against
    :attr:`values` (used for setup and single-threaded runs).  Inside one,
    they are yielded to the scheduler.
    """

    simulated = True

    def __init__(self, count: bool = False) -> None:
        self.inits: list[Any] = []
        self.values: list[Any] = []
        self._bases: list[int] = []
        self._labels: list[tuple[str, bool]] = []
        self.counter = InstructionCount() if count else None

    def _alloc(self, n: int, init: Any, name: str | None) -> int:
        base = len(self.inits)
        self.inits.extend([init] * n)
        self.values.extend([init] * n)
        self._bases.append(base)
        self._labels.append((name or f"a{base}", n == 1 and name is not None))
        return base

    def name(self, cid: int) -> str:
        k = bisect.bisect_right(self._bases, cid) - 1
        label, scalar = self._labels[k]
        return label if scalar else f"{label}[{cid - self._bases[k]}]"

    def cell(self, init: Any = BOTTOM, name: str | None = None) -> SimCell:
        return SimCell(self, self._alloc(1, init, name))

    def array(self, n: int, init: Any = BOTTOM, name: str | None = None) -> SimArray:
        base = self._alloc(n, init, name)
        return SimArray(self, base, n, name or f"a{base}")

    def access(self, kind: Kind, cid: int, arg: Any = None, arg2: Any = None) -> Any:
        g = greenlet.getcurrent()
        if type(g) is _ProcGreenlet:
            return g.parent.switch(Instruction(kind, cid, arg, arg2))
        if self.counter is not None:
            self.counter.add(kind)
        result, new = apply(self.values[cid], Instruction(kind, cid, arg, arg2), self)
        self.values[cid] = new
        return result

    def reset_counter(self) -> InstructionCount:
        if self.counter is None:
            raise RuntimeError("memory was created without count=True")
        old = InstructionCount(**vars(self.counter))
        self.counter.reads = self.counter.writes = self.counter.swaps = self.counter.cases = 0
        return old

    def snapshot(self) -> tuple:
        """Sparse view of :attr:`values`: sorted ``(cell, value)`` pairs differing from init."""
        return tuple((c, v) for c, v in enumerate(self.values) if not _same(v, self.inits[c]))


def apply(current: Any, ins: Instruction, mem: SimMemory | None = None) -> tuple[Any, Any]:
    """Return ``(result, new value)`` of one instruction on a cell holding ``current``."""
    kind = ins.kind
    if kind is Kind.WRITE:
        return None, ins.arg
    if current is UNINIT:
        name = mem.name(ins.cell) if mem is not None else f"#{ins.cell}"
        raise UninitializedRead(f"{kind.value} of uninitialized cell {name}")
    if kind is Kind.READ:
        return current, current
    if kind is Kind.SWAP:
        return current, ins.arg
    if current == ins.arg:
        return True, ins.arg2
    return False, current


# Programs ---------------------------------------------------------------


@dataclass(frozen=True)
class Call:
    """One operation of a process: ``handle.<op>(arg)`` unless ``fn`` is given."""

    op: str
    arg: Any = None
    fn: Callable[[Any], Any] | None = field(default=None, compare=False)

    def invoke(self, handle: Any) -> Any:
        if self.fn is not None:
            return self.fn(handle)
        method = getattr(handle, self.op)
        return method() if self.arg is None else method(self.arg)


class Stateless:
    """Handle for programs whose processes keep no local state."""

    def snapshot(self) -> tuple:
        return ()

    def restore(self, snap: tuple) -> None:
        pass


@dataclass
class Process:
    handle: Any
    calls: Sequence[Call]


@dataclass
class Program:
    memory: SimMemory
    processes: list[Process]


@dataclass(frozen=True)
class Bounds:
    processes: int = 4
    steps: int = 400  # per maximal execution
    op_steps: int = 200  # per operation


class ProcState(NamedTuple):
    opidx: int
    snap: Any
    obs: tuple
    results: tuple
    invs: tuple


class State(NamedTuple):
    mem: tuple  # sparse ((cell, value), ...) sorted by cell
    procs: tuple


class Step(NamedTuple):
    state: State
    events: tuple
    record: AccessRecord | None
    completed: bool  # an operation responded in this step


class Machine:
    """Pure transition function over :class:`State` values for one program."""

    def __init__(self, setup: Callable[[], Program], bounds: Bounds = Bounds()) -> None:
        self.program = setup()
        self.mem = self.program.memory
        self.bounds = bounds
        if len(self.program.processes) > bounds.processes:
            raise BoundExceeded(f"{len(self.program.processes)} processes exceed bound {bounds.processes}")
        self._cache: dict[tuple, tuple] = {}
        procs = tuple(ProcState(0, p.handle.snapshot(), (), (), ()) for p in self.program.processes)
        self.initial = State(self.mem.snapshot(), procs)

    @property
    def nprocs(self) -> int:
        return len(self.program.processes)

    def call(self, pid: int, opidx: int) -> Call:
        return self.program.processes[pid].calls[opidx]

    def finished(self, state: State, pid: int) -> bool:
        return state.procs[pid].opidx >= len(self.program.processes[pid].calls)

    def enabled(self, state: State) -> list[int]:
        return [p for p in range(self.nprocs) if not self.finished(state, p)]

    def pending(self, pid: int, ps: ProcState) -> tuple:
        """``('req', Instruction)`` or ``('ret', value, new snapshot)`` for a process."""
        key = (pid, ps.opidx, ps.snap, ps.obs)
        out = self._cache.get(key)
        if out is None:
            out = self._materialize(pid, ps)
            self._cache[key] = out
        return out

    def _materialize(self, pid: int, ps: ProcState) -> tuple:
        proc = self.program.processes[pid]
        call = proc.calls[ps.opidx]
        handle = proc.handle
        handle.restore(ps.snap)
        g = _ProcGreenlet(lambda: _Done(call.invoke(handle)))
        try:
            out = g.switch()
            for value in ps.obs:
                if isinstance(out, _Done):
                    raise ProgramError(f"p{pid} {call.op} is not deterministic under replay")
                out = g.switch(value)
        except (BoundExceeded, ProgramError):
            raise
        except Exception as exc:
            raise ProgramError(f"p{pid} {call.op}({call.arg}) raised {exc!r}") from exc
        if isinstance(out, _Done):
            return ("ret", out.value, handle.snapshot())
        if len(ps.obs) >= self.bounds.op_steps:
            raise BoundExceeded(f"p{pid} {call.op} exceeded {self.bounds.op_steps} steps")
        return ("req", out)

    def lookup(self, mem: tuple, cid: int) -> Any:
        for c, v in mem:
            if c == cid:
                return v
        return self.mem.inits[cid]

    def execute(self, mem: tuple, ins: Instruction) -> tuple[Any, tuple]:
        cid = ins.cell
        result, new = apply(self.lookup(mem, cid), ins, self.mem)
        if ins.kind is Kind.READ:
            return result, mem
        cells = dict(mem)
        if _same(new, self.mem.inits[cid]):
            cells.pop(cid, None)
        else:
            cells[cid] = new
        return result, tuple(sorted(cells.items()))

    def step(self, state: State, pid: int, stepno: int = 0) -> Step:
        ps = state.procs[pid]
        if self.finished(state, pid):
            raise ValueError(f"p{pid} has no operation left")
        call = self.call(pid, ps.opidx)
        events: list[Event] = []
        invs = ps.invs
        if not ps.obs:
            invs = invs + (tuple(len(p.results) for p in state.procs),)
            events.append(Event(INV, pid, call.op, call.arg, stepno))
        out = self.pending(pid, ps)
        mem = state.mem
        record = None
        if out[0] == "req":
            ins = out[1]
            result, mem = self.execute(mem, ins)
            record = AccessRecord(stepno, pid, ins.kind, self.mem.name(ins.cell),
                                  ins.arg if ins.kind is not Kind.CAS else (ins.arg, ins.arg2), result)
            ps = ps._replace(obs=ps.obs + (result,), invs=invs)
            out = self.pending(pid, ps)
        else:
            ps = ps._replace(invs=invs)
        completed = out[0] == "ret"
        if completed:
            events.append(Event(RES, pid, call.op, out[1], stepno))
            ps = ProcState(ps.opidx + 1, out[2], (), ps.results + (out[1],), ps.invs)
        procs = state.procs[:pid] + (ps,) + state.procs[pid + 1:]
        return Step(State(mem, procs), tuple(events), record, completed)

    def step_light(self, state: State, pid: int) -> tuple[State, bool, bool, Any, int]:
        """:meth:`step` without history bookkeeping, for states whose ``results`` and ``invs`` are empty.

        Returns ``(next state, invoked, completed, response value, instructions
        of the operation so far)``.
        """
        ps = state.procs[pid]
        invoked = not ps.obs
        out = self.pending(pid, ps)
        mem = state.mem
        obs = ps.obs
        if out[0] == "req":
            result, mem = self.execute(mem, out[1])
            obs = obs + (result,)
            ps = ProcState(ps.opidx, ps.snap, obs, (), ())
            out = self.pending(pid, ps)
        if out[0] == "ret":
            ps = ProcState(ps.opidx + 1, out[2], (), (), ())
            procs = state.procs[:pid] + (ps,) + state.procs[pid + 1:]
            return State(mem, procs), invoked, True, out[1], len(obs)
        procs = state.procs[:pid] + (ps,) + state.procs[pid + 1:]
        return State(mem, procs), invoked, False, None, len(obs)


@dataclass
class Execution:
    """One maximal (or scripted) run: its history, access log and schedule."""

    history: History
    log: list[AccessRecord]
    schedule: tuple[int, ...]
    op_counts: list[tuple[int, str, InstructionCount]]  # (pid, op, count) per completed op

    def log_text(self) -> str:
        return "".join(r.to_line() + "\n" for r in self.log)


class Simulation:
    """A live run driven one step at a time by an explicit scheduler."""

    def __init__(self, setup: Callable[[], Program] | Machine, bounds: Bounds = Bounds()) -> None:
        self.machine = setup if isinstance(setup, Machine) else Machine(setup, bounds)
        self.state = self.machine.initial
        self.events: list[Event] = []
        self.log: list[AccessRecord] = []
        self.schedule: list[int] = []
        self._open: dict[int, InstructionCount] = {}
        self.op_counts: list[tuple[int, str, InstructionCount]] = []

    def pending(self, pid: int) -> Instruction | None:
        """The next instruction of ``pid`` (None if its next step only returns)."""
        if self.machine.finished(self.state, pid):
            return None
        out = self.machine.pending(pid, self.state.procs[pid])
        return out[1] if out[0] == "req" else None

    def finished(self, pid: int | None = None) -> bool:
        if pid is None:
            return not self.machine.enabled(self.state)
        return self.machine.finished(self.state, pid)

    def in_op(self, pid: int) -> bool:
        return bool(self.state.procs[pid].obs)

    def step(self, pid: int) -> Step:
        st = self.machine.step(self.state, pid, len(self.schedule))
        self.state = st.state
        self.schedule.append(pid)
        self.events.extend(st.events)
        count = self._open.setdefault(pid, InstructionCount())
        if st.record is not None:
            self.log.append(st.record)
            count.add(st.record.kind)
        if st.completed:
            self.op_counts.append((pid, st.events[-1].op, self._open.pop(pid)))
        if len(self.schedule) > self.machine.bounds.steps:
            raise BoundExceeded(f"execution exceeded {self.machine.bounds.steps} steps")
        return st

    def run_op(self, pid: int) -> Any:
        """Run ``pid`` alone until its current (or next) operation responds."""
        while True:
            st = self.step(pid)
            if st.completed:
                return self.state.procs[pid].results[-1]

    def run_until(self, pid: int, pred: Callable[[Instruction | None], bool]) -> bool:
        """Step ``pid`` within one operation until ``pred`` holds for its next instruction.

        The instruction is not executed.  Returns False if the operation
        completed (or ``pid`` had none left) before ``pred`` held.
        """
        while not self.finished(pid):
            if pred(self.pending(pid)):
                return True
            if self.step(pid).completed:
                return False
        return False

    def run(self, pid: int) -> None:
        while not self.finished(pid):
            self.step(pid)

    def history(self) -> History:
        return History(self.events)

    def execution(self) -> Execution:
        return Execution(self.history(), list(self.log), tuple(self.schedule), list(self.op_counts))


def run_schedule(setup: Callable[[], Program], schedule: Sequence[int], bounds: Bounds = Bounds()) -> Execution:
    """Replay a schedule; a step of a finished process is an error."""
    sim = Simulation(setup, bounds)
    for pid in schedule:
        sim.step(pid)
    return sim.execution()


def run_sequential(setup: Callable[[], Program], bounds: Bounds = Bounds()) -> Execution:
    """Run every process to completion in pid order."""
    sim = Simulation(setup, bounds)
    for pid in range(sim.machine.nprocs):
        sim.run(pid)
    return sim.execution()


def explore(setup: Callable[[], Program], bounds: Bounds = Bounds()) -> Iterator[Execution]:
    """Enumerate every maximal interleaving depth-first, lowest pid first."""
    machine = Machine(setup, bounds)
    events: list[Event] = []
    log: list[AccessRecord] = []
    schedule: list[int] = []
    counts: list[tuple[int, str, InstructionCount]] = []
    open_counts: list[InstructionCount] = [InstructionCount() for _ in range(machine.nprocs)]

    def rec(state: State) -> Iterator[Execution]:
        enabled = machine.enabled(state)
        if not enabled:
            yield Execution(History(events), list(log), tuple(schedule), list(counts))
            return
        if len(schedule) >= bounds.steps:
            raise BoundExceeded(f"execution exceeded {bounds.steps} steps")
        for pid in enabled:
            st = machine.step(state, pid, len(schedule))
            saved = open_counts[pid]
            open_counts[pid] = InstructionCount(**vars(saved))
            if st.record is not None:
                open_counts[pid].add(st.record.kind)
                log.append(st.record)
            events.extend(st.events)
            schedule.append(pid)
            if st.completed:
                counts.append((pid, st.events[-1].op, open_counts[pid]))
                open_counts[pid] = InstructionCount()
            yield from rec(st.state)
            if st.completed:
                counts.pop()
            open_counts[pid] = saved
            schedule.pop()
            del events[len(events) - len(st.events):]
            if st.record is not None:
                log.pop()

    yield from rec(machine.initial)


@dataclass
class Exploration:
    """Distinct histories reachable by a program, found by memoized search."""

    histories: list[History]
    states: int
    max_steps: dict[str, int]  # most instructions any completed op of that name executed


def explore_histories(setup: Callable[[], Program], bounds: Bounds = Bounds()) -> Exploration:
    """Collect every distinct history of a program without enumerating all interleavings.

    A machine state holds memory, each process's locals and in-flight
    observations, and for each completed or running operation the results
    and the count vector of completed operations at its invocation.  Two
    schedules reaching the same state therefore have the same precedence
    order and results so far, and the same futures, so each state is
    expanded once.
    """
    machine = Machine(setup, bounds)
    seen: set[State] = set()
    finals: set[tuple] = set()
    histories: list[History] = []
    max_steps: dict[str, int] = {}
    events: list[Event] = []

    def rec(state: State, depth: int) -> None:
        if state in seen:
            return
        seen.add(state)
        enabled = machine.enabled(state)
        if not enabled:
            key = tuple((p.results, p.invs) for p in state.procs)
            if key not in finals:
                finals.add(key)
                histories.append(History(events))
            return
        if depth >= bounds.steps:
            raise BoundExceeded(f"execution exceeded {bounds.steps} steps")
        for pid in enabled:
            ps = state.procs[pid]
            st = machine.step(state, pid, depth)
            if st.completed:
                op = st.events[-1].op
                n = len(ps.obs) + (st.record is not None)
                if n > max_steps.get(op, -1):
                    max_steps[op] = n
            events.extend(st.events)
            rec(st.state, depth + 1)
            del events[len(events) - len(st.events):]

    rec(machine.initial, 0)
    return Exploration(histories, len(seen), max_steps)
