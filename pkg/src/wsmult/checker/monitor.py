"""Check every interleaving of a program while exploring it.

Instead of storing each history and searching it afterwards, the explorer
carries a monitor: the set of spec configurations reachable by some
(set-)linearization of the events seen so far.  A configuration is a spec
state plus, for each process with an operation in flight, whether that
operation has already been linearized and with which result.  Operations
are linearized lazily: when an operation responds, the monitor first
closes the set under linearizing any in-flight operations (one at a time,
or in classes of pairwise-concurrent operations for set-linearizability)
and then keeps only configurations where the responding operation got
its actual result.  An empty set means the history so far has no valid
linearization.

Histories are no longer part of the search state, only the monitor set,
so schedules that differ only in event order merge as soon as their
monitors agree.  This decides the same property as
:func:`~wsmult.checker.search.check_set_linearizable` applied to every
explored history.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Callable

from ..history import INV, RES, Event, History
from ..shmem.core import BoundExceeded, RetryCapExceeded
from ..shmem.sim import Bounds, Machine, Program, State
from .specs import SpecMachine

_IDLE = None


class _Pending:
    def __repr__(self) -> str:
        return "PENDING"


PENDING = _Pending()


def _eq(a: Any, b: Any) -> bool:
    return a is b or (type(a) is type(b) and a == b)


class Monitor:
    """Online linearizability monitor over a spec machine.

    Monitor sets are kept closed under linearizing in-flight operations,
    which makes them canonical: two prefixes with the same set of possible
    continuations get equal sets.  ``calls`` maps each process with an
    operation in flight to its ``(op, arg)``.
    """

    def __init__(self, spec: SpecMachine, nprocs: int, sets: bool) -> None:
        self.spec = spec
        self.sets = sets
        self.initial = frozenset({(spec.initial, (_IDLE,) * nprocs)})
        self._inv_cache: dict[tuple, frozenset] = {}
        self._res_cache: dict[tuple, frozenset] = {}

    def invoke(self, configs: frozenset, pid: int, calls: dict[int, tuple[str, Any]]) -> frozenset:
        some = next(iter(configs), None)
        busy = [q for q, st in enumerate(some[1]) if st is not _IDLE or q == pid] if some else []
        key = (configs, pid, tuple(calls[q] for q in busy))
        out = self._inv_cache.get(key)
        if out is None:
            raw = {(s, st[:pid] + (PENDING,) + st[pid + 1:]) for s, st in configs}
            out = self._inv_cache[key] = frozenset(self._closure(raw, calls))
        return out

    def _closure(self, configs: set, calls: dict[int, tuple[str, Any]]) -> set:
        out = set(configs)
        todo = list(configs)
        step_set = self.spec.step_set
        step = self.spec.step
        while todo:
            state, status = todo.pop()
            waiting = [p for p, s in enumerate(status) if s is PENDING]
            sizes = range(1, len(waiting) + 1) if self.sets else (1,)
            for k in sizes:
                for group in combinations(waiting, k):
                    if self.sets:
                        moves = step_set(state, [(p, *calls[p]) for p in group])
                    else:
                        p = group[0]
                        moves = [((r,), n) for r, n in step(state, p, *calls[p])]
                    for results, nxt in moves:
                        st = list(status)
                        for p, r in zip(group, results):
                            st[p] = (r,)
                        cfg = (nxt, tuple(st))
                        if cfg not in out:
                            out.add(cfg)
                            todo.append(cfg)
        return out

    def respond(self, configs: frozenset, pid: int, result: Any) -> frozenset:
        """Keep configurations where ``pid``'s operation was linearized with ``result``.

        The input is closed, so the output is too.
        """
        key = (configs, pid, result, type(result))
        out = self._res_cache.get(key)
        if out is None:
            keep = set()
            for state, status in configs:
                got = status[pid]
                if got is not PENDING and got is not _IDLE and _eq(got[0], result):
                    keep.add((state, status[:pid] + (_IDLE,) + status[pid + 1:]))
            out = self._res_cache[key] = frozenset(keep)
        return out


@dataclass
class MonitoredExploration:
    states: int = 0
    complete_runs: int = 0  # terminal states reached
    pruned: int = 0  # branches cut at the retry cap
    violations: list[History] = field(default_factory=list)
    max_steps: dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations


def explore_monitored(setup: Callable[[], Program], spec: SpecMachine, sets: bool,
                      bounds: Bounds = Bounds(), max_violations: int = 1,
                      prune_retries: bool = False) -> MonitoredExploration:
    """Explore all interleavings, checking (set-)linearizability on the fly.

    A search state is the machine state (memory, locals, in-flight
    observations) plus the monitor set; each is expanded once.  Stops
    after ``max_violations`` violating histories, each a prefix whose
    monitor became empty.

    With ``prune_retries`` a step that hits the retry cap ends its branch
    instead of failing the run.  This is for claim loops whose failed
    iterations change no shared memory: extra spins can be dropped from a
    schedule without changing its history, so every history is still
    reached as long as the cap exceeds the number of distinct values the
    loop can observe.
    """
    machine = Machine(setup, bounds)
    monitor = Monitor(spec, machine.nprocs, sets)
    result = MonitoredExploration()
    seen: set[tuple] = set()
    trail: list[tuple] = []  # (pid, invoked, completed, value, depth) per step, for violation reports
    nprocs = machine.nprocs
    ncalls = [len(p.calls) for p in machine.program.processes]
    max_steps = result.max_steps

    def report() -> History:
        events = []
        for pid, invoked, completed, value, depth in trail:
            call = machine.call(pid, opidx[pid])
            if invoked:
                events.append(Event(INV, pid, call.op, call.arg, depth))
            if completed:
                events.append(Event(RES, pid, call.op, value, depth))
                opidx[pid] += 1
        return History(events)

    def rec(state: State, configs: frozenset, depth: int) -> bool:
        key = (state, configs)
        if key in seen:
            return True
        seen.add(key)
        procs = state.procs
        enabled = [p for p in range(nprocs) if procs[p].opidx < ncalls[p]]
        if not enabled:
            result.complete_runs += 1
            return True
        if depth >= bounds.steps:
            raise BoundExceeded(f"execution exceeded {bounds.steps} steps")
        calls = {p: (c.op, c.arg) for p in enabled for c in [machine.call(p, procs[p].opidx)]}
        for pid in enabled:
            try:
                nxt, invoked, completed, value, n = machine.step_light(state, pid)
            except RetryCapExceeded:
                if not prune_retries:
                    raise
                result.pruned += 1
                continue
            cfg = configs
            if invoked:
                cfg = monitor.invoke(cfg, pid, calls)
            if completed:
                cfg = monitor.respond(cfg, pid, value)
                op = calls[pid][0]
                if n > max_steps.get(op, -1):
                    max_steps[op] = n
            trail.append((pid, invoked, completed, value, depth))
            if not cfg:
                opidx[:] = [0] * nprocs
                result.violations.append(report())
                if len(result.violations) >= max_violations:
                    return False
            elif not rec(nxt, cfg, depth + 1):
                return False
            trail.pop()
        return True

    opidx = [0] * nprocs
    rec(machine.initial, monitor.initial, 0)
    result.states = len(seen)
    return result
