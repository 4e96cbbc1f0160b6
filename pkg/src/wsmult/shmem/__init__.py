"""Shared-memory substrate with a native and a simulated backend."""

from .core import (
    BOTTOM,
    EMPTY,
    UNINIT,
    AccessRecord,
    BoundExceeded,
    CapacityError,
    Instruction,
    InstructionCount,
    Kind,
    ProgramError,
    RetryCapExceeded,
    ShmemError,
    UninitializedRead,
)
from .native import NativeArray, NativeCell, NativeMemory
from .record import NativeProcess, record
from .sim import (
    Bounds,
    Call,
    Execution,
    Exploration,
    Machine,
    Process,
    Program,
    SimArray,
    SimCell,
    SimMemory,
    Simulation,
    Stateless,
    explore,
    explore_histories,
    run_schedule,
    run_sequential,
)

__all__ = [
    "BOTTOM", "EMPTY", "UNINIT", "AccessRecord", "BoundExceeded", "CapacityError", "Instruction",
    "InstructionCount", "Kind", "ProgramError", "RetryCapExceeded", "ShmemError", "UninitializedRead",
    "NativeArray", "NativeCell", "NativeMemory", "NativeProcess", "record", "Bounds", "Call",
    "Execution", "Exploration", "Machine", "Process", "Program", "SimArray", "SimCell", "SimMemory",
    "Simulation", "Stateless", "explore", "explore_histories", "run_schedule", "run_sequential",
]
