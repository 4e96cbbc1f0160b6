from __future__ import annotations

import random
from collections import Counter

import pytest

from wsmult.baselines import ChaseLevDeque, IdempotentFifoQueue
from wsmult.checker import (
    ExactFifo,
    check_linearizable,
    check_multiplicity_bounds,
    check_sequentially_exact,
    extraction_counts,
    random_workload,
    replay_idempotent_counterexample,
)
from wsmult.shmem import EMPTY, Bounds, Call, NativeMemory, NativeProcess, Process, Program, SimMemory, explore_histories, record


def test_chase_lev_sequential():
    d = ChaseLevDeque(NativeMemory(), 4)
    o, t = d.owner(), d.thief()
    for x in range(1, 6):
        o.put(x)
    assert sorted(t.steal() for _ in range(5)) == [1, 2, 3, 4, 5]
    assert t.steal() is EMPTY
    o.put(9)
    assert o.take() == 9 and o.take() is EMPTY


def test_chase_lev_owner_is_lifo_thief_fifo():
    d = ChaseLevDeque(NativeMemory(), 2)
    o, t = d.owner(), d.thief()
    for x in range(1, 40):
        o.put(x)
    assert t.steal() == 1
    assert o.take() == 39
    assert t.steal() == 2


def test_chase_lev_capacity_must_be_power_of_two():
    with pytest.raises(ValueError):
        ChaseLevDeque(NativeMemory(), 6)


@pytest.mark.parametrize("seed", range(5))
def test_chase_lev_stress_multiset(seed):
    d = ChaseLevDeque(NativeMemory(), 16)
    n = 3000
    owner_ops = []
    rng = random.Random(seed)
    for x in range(1, n + 1):
        owner_ops.append(Call("put", x))
        if rng.random() < 0.4:
            owner_ops.append(Call("take"))
    owner_ops += [Call("take")] * 50
    procs = [NativeProcess(d.owner(), owner_ops)]
    procs += [NativeProcess(d.thief(), [Call("steal")] * 1500) for _ in range(3)]
    h = record(procs, seed=seed)
    got = Counter(op.result for op in h.operations if op.is_extraction and op.result is not EMPTY)
    assert all(c == 1 for c in got.values())
    # whatever the thieves left behind is still in the deque
    leftover = []
    o = d._owner
    while (x := o.take()) is not EMPTY:
        leftover.append(x)
    assert sorted(list(got) + leftover) == list(range(1, n + 1))


def test_chase_lev_all_small_interleavings_exact():
    def setup():
        mem = SimMemory()
        d = ChaseLevDeque(mem, 2, max_retries=4)
        return Program(mem, [Process(d.owner(), [Call("put", 1), Call("put", 2), Call("take"), Call("take")]),
                             Process(d.thief(), [Call("steal"), Call("steal")])])

    ex = explore_histories(setup, Bounds(steps=200))
    for h in ex.histories:
        assert check_multiplicity_bounds(h, "exact").accepted, h.to_text()


def test_idempotent_sequential_fifo():
    work = random_workload(3000, 1, thieves=2)
    assert check_sequentially_exact(lambda: IdempotentFifoQueue(NativeMemory()), work, thieves=2).accepted


def test_idempotent_at_least_once_under_stress():
    q = IdempotentFifoQueue(NativeMemory())
    n = 2000
    owner_ops = [Call("put", x) for x in range(1, n + 1)] + [Call("take")] * (n // 2 + 2)
    procs = [NativeProcess(q.owner(), owner_ops)]
    procs += [NativeProcess(q.thief(), [Call("steal")] * (n // 2 + 2)) for _ in range(2)]
    h = record(procs, seed=4)
    got = {op.result for op in h.operations if op.is_extraction and op.result is not EMPTY}
    # early EMPTY answers can leave tasks behind; those must still be in the queue
    o = q._owner
    while (x := o.take()) is not EMPTY:
        got.add(x)
    assert got == set(range(1, n + 1))


@pytest.mark.parametrize("z", [1, 2, 3, 4, 6])
def test_replay_duplicates(z):
    h = replay_idempotent_counterexample(z)
    counts = extraction_counts(h)
    for i in range(z):
        assert counts[i + 1] == {"take": 1, "steal": i + 1}
    assert sum(c["take"] + c["steal"] for c in counts.values()) == z + z * (z + 1) // 2


def test_replay_z4_total_fourteen():
    counts = extraction_counts(replay_idempotent_counterexample(4))
    assert sum(c["take"] + c["steal"] for c in counts.values()) == 14


def test_idempotent_history_is_not_exact():
    h = replay_idempotent_counterexample(2)
    assert not check_linearizable(h, ExactFifo()).accepted
