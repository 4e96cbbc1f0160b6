"""Correctness checking for histories of work-stealing queues and max registers."""

from ..history import Event, History, MalformedHistory, Operation, inv, res
from .bounds import (
    check_multiplicity_bounds,
    check_register_sequentially_exact,
    check_sequentially_exact,
    exact_outputs,
    is_drained,
    random_workload,
    run_queue,
)
from .corpus import CorpusReport, check_corpus, make_setup, owner_programs, programs, spec_for
from .monitor import Monitor, MonitoredExploration, explore_monitored
from .replay import extraction_counts, idempotent_counterexample_execution, replay_idempotent_counterexample
from .search import DEFAULT_BUDGET, Status, Verdict, check_linearizable, check_set_linearizable
from .specs import (
    ExactFifo,
    MaxRegisterSpec,
    MultiplicityFifo,
    RangeMaxRegisterSpec,
    SpecMachine,
    WeakMultiplicityFifo,
)

__all__ = [
    "Event", "History", "MalformedHistory", "Operation", "inv", "res",
    "check_multiplicity_bounds", "check_register_sequentially_exact", "check_sequentially_exact",
    "exact_outputs", "is_drained", "random_workload", "run_queue",
    "CorpusReport", "check_corpus", "make_setup", "owner_programs", "programs", "spec_for",
    "Monitor", "MonitoredExploration", "explore_monitored",
    "extraction_counts", "idempotent_counterexample_execution", "replay_idempotent_counterexample",
    "DEFAULT_BUDGET", "Status", "Verdict", "check_linearizable", "check_set_linearizable",
    "ExactFifo", "MaxRegisterSpec", "MultiplicityFifo", "RangeMaxRegisterSpec", "SpecMachine",
    "WeakMultiplicityFifo",
]
