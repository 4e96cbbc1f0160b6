"""Exhaustive checking of small owner/thief programs on the simulator."""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator

from ..algorithms import make
from ..history import History
from ..shmem.core import BoundExceeded, ProgramError
from ..shmem.sim import Bounds, Call, Process, Program, SimMemory, explore_histories
from .bounds import check_multiplicity_bounds
from .search import DEFAULT_BUDGET, Status, Verdict, check_linearizable, check_set_linearizable
from .monitor import explore_monitored
from .specs import ExactFifo, MultiplicityFifo, SpecMachine, WeakMultiplicityFifo


def owner_programs(max_puts: int = 3, max_takes: int = 3) -> list[tuple[str, ...]]:
    """Every put/take sequence with at most ``max_puts`` puts and ``max_takes`` takes."""
    out = []
    for p in range(max_puts + 1):
        for t in range(max_takes + 1):
            for where in itertools.combinations(range(p + t), p):
                out.append(tuple("put" if i in where else "take" for i in range(p + t)))
    return out


def programs(thieves: int, max_puts: int = 3, max_takes: int = 3, max_steals: int = 3,
             symmetric: bool = False) -> Iterator[tuple[tuple[str, ...], tuple[int, ...]]]:
    """``(owner ops, steals per thief)`` for every owner program and 1..max_steals steals per thief.

    Thieves are interchangeable: renaming them maps the runs of one steal
    assignment onto those of any permutation of it, and the specs treat
    thieves alike.  With ``symmetric`` only nondecreasing steal tuples
    are produced, one per permutation class.
    """
    for owner in owner_programs(max_puts, max_takes):
        for steals in itertools.product(range(1, max_steals + 1), repeat=thieves):
            if symmetric and list(steals) != sorted(steals):
                continue
            yield owner, steals


def make_setup(algorithm: str, owner_ops: tuple[str, ...], steals: tuple[int, ...],
               **opts: Any) -> Callable[[], Program]:
    """Simulator program: the owner runs ``owner_ops`` (puts of 1, 2, ...); thief i runs ``steals[i]`` steals."""
    puts = owner_ops.count("put")
    opts.setdefault("capacity", max(puts + 1, 2))
    opts.setdefault("buffer", "flat")
    opts.setdefault("max_retries", 6)

    def setup() -> Program:
        mem = SimMemory()
        q = make(mem, algorithm, **opts)
        ids = itertools.count(1)
        calls = [Call("put", next(ids)) if op == "put" else Call("take") for op in owner_ops]
        procs = [Process(q.owner(), calls)]
        procs += [Process(q.thief(), [Call("steal")] * k) for k in steals]
        return Program(mem, procs)

    return setup


def spec_for(kind: str, nprocs: int) -> tuple[SpecMachine, Callable[..., Verdict]]:
    if kind == "multiplicity":
        return MultiplicityFifo(), check_set_linearizable
    if kind == "weak":
        return WeakMultiplicityFifo(nprocs), check_linearizable
    if kind == "exact":
        return ExactFifo(), check_linearizable
    raise ValueError(f"unknown spec kind {kind!r}")


def _key(h: History) -> tuple:
    return tuple((ev.kind, ev.pid, ev.op, ev.value) for ev in h.events)


@dataclass
class CorpusReport:
    algorithm: str
    spec: str
    programs: int = 0
    histories: int = 0  # distinct histories, or terminal search states for the monitor
    states: int = 0
    accepted: int = 0
    rejected: int = 0
    inconclusive: int = 0
    bound_errors: int = 0
    program_errors: int = 0
    bound_violations: int = 0
    pruned: int = 0
    max_ops: int = 0
    max_steps: dict[str, int] = field(default_factory=dict)
    failures: list[tuple[Any, Any]] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return (self.rejected == self.inconclusive == self.bound_errors == self.program_errors
                == self.bound_violations == 0 and self.histories > 0)

    def summary(self) -> str:
        return (f"{self.algorithm} vs {self.spec}: {self.programs} programs, {self.histories} histories, "
                f"{self.states} states, accepted={self.accepted} rejected={self.rejected} "
                f"inconclusive={self.inconclusive} bound_errors={self.bound_errors} "
                f"program_errors={self.program_errors} bound_violations={self.bound_violations} "
                f"pruned={self.pruned} max_steps={self.max_steps} in {self.seconds:.1f}s")


def check_corpus(algorithm: str, spec: str, thieves: int, *, method: str = "monitor", max_puts: int = 3,
                 max_takes: int = 3, max_steals: int = 3, symmetric: bool = False, prune_retries: bool = False,
                 bound_mode: str | None = None,
                 budget: int = DEFAULT_BUDGET, bounds: Bounds = Bounds(), max_failures: int = 5,
                 progress: Callable[[str], None] | None = None, **opts: Any) -> CorpusReport:
    """Explore every program of the corpus and check all of its histories.

    ``method="histories"`` collects each distinct history and runs the
    search checker on it (and, with ``bound_mode``, the multiplicity-bound
    check).  ``method="monitor"`` checks histories during exploration; a
    violation it reports is confirmed by the search checker before it is
    counted as a rejection.  ``symmetric`` skips steal assignments that
    are permutations of one already checked (see :func:`programs`).
    ``prune_retries`` is passed to the monitor (see
    :func:`~wsmult.checker.monitor.explore_monitored`).
    """
    if method not in ("monitor", "histories"):
        raise ValueError(f"unknown method {method!r}")
    report = CorpusReport(algorithm, spec)
    start = time.perf_counter()
    cache: dict[tuple, Status] = {}
    machine, check = spec_for(spec, 1 + thieves)
    for owner_ops, steals in programs(thieves, max_puts, max_takes, max_steals, symmetric):
        report.programs += 1
        label = (owner_ops, steals)
        setup = make_setup(algorithm, owner_ops, steals, **opts)
        try:
            if method == "monitor":
                _monitor_program(report, label, setup, machine, check, budget, bounds, max_failures,
                                 prune_retries)
            else:
                _explicit_program(report, label, setup, machine, check, budget, bounds, max_failures,
                                  cache, bound_mode)
        except BoundExceeded as exc:
            report.bound_errors += 1
            report.failures.append((label, exc))
        except ProgramError as exc:
            report.program_errors += 1
            report.failures.append((label, exc))
        if progress is not None:
            progress(f"{label} states={report.states} t={time.perf_counter() - start:.1f}s")
    report.seconds = time.perf_counter() - start
    return report


def _merge_steps(report: CorpusReport, max_steps: dict[str, int]) -> None:
    for op, n in max_steps.items():
        report.max_steps[op] = max(report.max_steps.get(op, 0), n)


def _monitor_program(report: CorpusReport, label: Any, setup: Callable[[], Program], machine: SpecMachine,
                     check: Callable[..., Verdict], budget: int, bounds: Bounds, max_failures: int,
                     prune_retries: bool = False) -> None:
    ex = explore_monitored(setup, machine, check is check_set_linearizable, bounds, prune_retries=prune_retries)
    report.pruned += ex.pruned
    report.states += ex.states
    report.histories += ex.complete_runs
    _merge_steps(report, ex.max_steps)
    if ex.ok:
        report.accepted += 1
        return
    verdict = check(ex.violations[0], machine, budget)
    if verdict.status is Status.ACCEPTED:
        # the two checkers disagree; surface it rather than pick one
        report.inconclusive += 1
        verdict = Verdict(Status.INCONCLUSIVE, reason=f"monitor rejected but search accepted {ex.violations[0]!r}")
    elif verdict.status is Status.REJECTED:
        report.rejected += 1
    else:
        report.inconclusive += 1
    if len(report.failures) < max_failures:
        report.failures.append((label, verdict))


def _explicit_program(report: CorpusReport, label: Any, setup: Callable[[], Program], machine: SpecMachine,
                      check: Callable[..., Verdict], budget: int, bounds: Bounds, max_failures: int,
                      cache: dict[tuple, Status], bound_mode: str | None) -> None:
    ex = explore_histories(setup, bounds)
    report.states += ex.states
    _merge_steps(report, ex.max_steps)
    for h in ex.histories:
        report.histories += 1
        report.max_ops = max(report.max_ops, len(h.operations))
        key = _key(h)
        status = cache.get(key)
        if status is None:
            verdict = check(h, machine, budget)
            status = cache[key] = verdict.status
            if status is not Status.ACCEPTED and len(report.failures) < max_failures:
                report.failures.append((label, verdict))
        if status is Status.ACCEPTED:
            report.accepted += 1
        elif status is Status.REJECTED:
            report.rejected += 1
        else:
            report.inconclusive += 1
        if bound_mode is not None:
            bv = check_multiplicity_bounds(h, bound_mode, fifo=True)
            if not bv.accepted:
                report.bound_violations += 1
                if len(report.failures) < max_failures:
                    report.failures.append((label, bv))
