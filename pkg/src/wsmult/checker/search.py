"""Linearizability and set-linearizability search over a history.

The search builds the linearization front to back.  At each point the
candidates are, per process, the earliest operation not yet placed whose
real-time predecessors are all placed; they are pairwise concurrent.  A
linearizability step places one candidate, a set-linearizability step a
nonempty subset of them.  Each placement must agree with the spec and
with the recorded results; pending operations accept any result and may
be left out.  Visited ``(placed set, spec state)`` pairs are memoized.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Hashable

from ..history import History, Operation
from .specs import SpecMachine

DEFAULT_BUDGET = 10_000_000


class Status(enum.Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    INCONCLUSIVE = "inconclusive"


@dataclass
class Verdict:
    status: Status
    witness: list[tuple[Operation, ...]] = field(default_factory=list)
    reason: str = ""
    nodes: int = 0

    @property
    def accepted(self) -> bool:
        return self.status is Status.ACCEPTED

    def __bool__(self) -> bool:
        return self.accepted

    def __repr__(self) -> str:
        classes = " ; ".join("{" + ", ".join(map(repr, c)) + "}" for c in self.witness)
        return f"Verdict({self.status.value}, nodes={self.nodes}, {self.reason or classes})"


class _Budget(Exception):
    pass


def _results_match(ops: tuple[Operation, ...], results: tuple) -> bool:
    for op, res in zip(ops, results):
        if not op.pending and not _eq(op.result, res):
            return False
    return True


def _eq(a: Any, b: Any) -> bool:
    return a is b or (type(a) is type(b) and a == b)


def _search(h: History, spec: SpecMachine, sets: bool, budget: int) -> Verdict:
    ops = h.operations
    n = len(ops)
    if n == 0:
        return Verdict(Status.ACCEPTED)
    by_pid: dict[int, list[int]] = {}
    for op in ops:
        by_pid.setdefault(op.pid, []).append(op.index)
    chains = list(by_pid.values())
    preds = [0] * n
    for b in ops:
        for a in ops:
            if a.res is not None and a.res < b.inv:
                preds[b.index] |= 1 << a.index
    required = 0
    for op in ops:
        if not op.pending:
            required |= 1 << op.index
    ptr0 = tuple(0 for _ in chains)

    seen: set[tuple[int, Hashable]] = set()
    path: list[tuple[Operation, ...]] = []
    best: list[list[tuple[Operation, ...]]] = [[]]
    nodes = 0

    def rec(done: int, ptr: tuple, state: Hashable) -> bool:
        nonlocal nodes
        if done & required == required:
            return True
        key = (done, state)
        if key in seen:
            return False
        seen.add(key)
        nodes += 1
        if nodes > budget:
            raise _Budget
        if len(path) > len(best[0]):
            best[0] = list(path)
        cands = []
        for c, chain in enumerate(chains):
            k = ptr[c]
            if k < len(chain) and preds[chain[k]] & done == preds[chain[k]]:
                cands.append(c)
        sizes = range(1, len(cands) + 1) if sets else (1,)
        for size in sizes:
            for group in combinations(cands, size):
                members = tuple(ops[chains[c][ptr[c]]] for c in group)
                calls = [(op.pid, op.op, op.arg) for op in members]
                if sets:
                    moves = spec.step_set(state, calls)
                else:
                    moves = [((r,), s) for r, s in spec.step(state, *calls[0])]
                for results, nxt in moves:
                    if not _results_match(members, results):
                        continue
                    nd = done
                    np = list(ptr)
                    for c, op in zip(group, members):
                        nd |= 1 << op.index
                        np[c] += 1
                    path.append(members)
                    if rec(nd, tuple(np), nxt):
                        return True
                    path.pop()
        return False

    try:
        ok = rec(0, ptr0, spec.initial)
    except _Budget:
        return Verdict(Status.INCONCLUSIVE, best[0], f"search budget of {budget} nodes exhausted", nodes)
    if ok:
        return Verdict(Status.ACCEPTED, list(path), nodes=nodes)
    placed = {op.index for c in best[0] for op in c}
    stuck = [op for op in ops if op.index not in placed and not op.pending]
    return Verdict(Status.REJECTED, best[0], f"cannot place any of {stuck} after the witness prefix", nodes)


def check_linearizable(h: History, spec: SpecMachine, budget: int = DEFAULT_BUDGET) -> Verdict:
    """Is there a sequential order of ``h``'s operations, respecting real time, that ``spec`` accepts?"""
    return _search(h, spec, False, budget)


def check_set_linearizable(h: History, spec: SpecMachine, budget: int = DEFAULT_BUDGET) -> Verdict:
    """Like :func:`check_linearizable`, but pairwise-concurrent operations may share a step."""
    return _search(h, spec, True, budget)
