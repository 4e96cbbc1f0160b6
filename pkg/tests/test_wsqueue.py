from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wsmult import ALGORITHMS, make
from wsmult.algorithms import BOUND_MODE, RELAXED
from wsmult.checker import (
    MultiplicityFifo,
    WeakMultiplicityFifo,
    check_linearizable,
    check_multiplicity_bounds,
    check_sequentially_exact,
    check_set_linearizable,
    random_workload,
)
from wsmult.shmem import (
    BOTTOM,
    EMPTY,
    Bounds,
    Call,
    CapacityError,
    Kind,
    NativeMemory,
    NativeProcess,
    Process,
    Program,
    RetryCapExceeded,
    SimMemory,
    Simulation,
    explore,
    explore_histories,
    record,
)
from wsmult.wsqueue import WorkStealingQueue, make_queue


def _flat(mem, algorithm, **kw):
    kw.setdefault("capacity", 16)
    kw.setdefault("buffer", "flat")
    return make_queue(mem, algorithm, **kw)


@pytest.mark.parametrize("algorithm", RELAXED)
def test_put_layout(algorithm):
    mem = SimMemory()
    q = _flat(mem, algorithm)
    o = q.owner()
    assert [q.tasks.read(i) for i in (1, 2)] == [BOTTOM, BOTTOM]
    assert o.put(7) is True
    assert o.tail == 1 and q.tasks.read(1) == 7 and q.tasks.read(3) is BOTTOM
    o.put(8)
    assert [q.tasks.read(i) for i in (1, 2, 3, 4)] == [7, 8, BOTTOM, BOTTOM]


@pytest.mark.parametrize("algorithm", RELAXED)
@pytest.mark.parametrize("buffer", ["flat", "segmented"])
def test_put_never_reads(algorithm, buffer):
    mem = NativeMemory(count=True)
    q = make_queue(mem, algorithm, capacity=600, buffer=buffer, segment_len=4)
    o = q.owner()
    for x in range(1, 500):
        mem.reset_counter()
        o.put(x)
        c = mem.reset_counter()
        assert c.reads == 0 and c.swaps == 0 and c.cases == 0


@pytest.mark.parametrize("algorithm", RELAXED)
def test_sequential_take_and_steal(algorithm):
    q = _flat(NativeMemory(), algorithm)
    o, t = q.owner(), q.thief()
    assert o.take() is EMPTY
    assert t.steal() is EMPTY
    o.put(7)
    assert o.take() == 7
    assert o.take() is EMPTY
    o.put(8)
    o.put(9)
    assert t.steal() == 8
    assert o.take() == 9
    assert t.steal() is EMPTY and o.take() is EMPTY


def test_take_advances_tree_head():
    q = _flat(NativeMemory(), "ws-mult")
    o = q.owner()
    o.put(7)
    assert q.head.reg.max_read() == 1
    assert o.take() == 7
    assert q.head.reg.max_read() == 2


def test_wmult_take_advances_head_cell_and_local():
    q = _flat(NativeMemory(), "ws-wmult")
    o = q.owner()
    o.put(7)
    o.take()
    assert q.head.cell.read() == 2 and o.head == 2


def test_tree_capacity_limits_puts():
    q = make_queue(NativeMemory(), "ws-mult", capacity=4)
    o = q.owner()
    for x in (1, 2, 3):
        o.put(x)
    with pytest.raises(CapacityError):
        o.put(4)
    assert [o.take() for _ in range(4)] == [1, 2, 3, EMPTY]


def _scripted(algorithm, owner_calls, thief_calls, **kw):
    def setup():
        mem = SimMemory()
        q = _flat(mem, algorithm, **kw)
        procs = [Process(q.owner(), owner_calls)] + [Process(q.thief(), calls) for calls in thief_calls]
        return Program(mem, procs)

    return Simulation(setup)


@pytest.mark.parametrize("algorithm", ["ws-mult", "ws-wmult"])
def test_take_and_steal_both_return_same_task(algorithm):
    sim = _scripted(algorithm, [Call("put", 1), Call("take")], [[Call("steal")]])
    sim.run_op(0)
    # both read the head before either advances it
    sim.run_until(0, lambda ins: ins is not None and ins.kind is Kind.WRITE)
    sim.run_until(1, lambda ins: ins is not None and ins.kind is Kind.WRITE)
    sim.run_op(0)
    sim.run_op(1)
    h = sim.history()
    results = [op.result for op in h.operations if op.is_extraction]
    assert results == [1, 1]
    assert check_set_linearizable(h, MultiplicityFifo()).accepted
    assert check_linearizable(h, WeakMultiplicityFifo(2)).accepted


def test_wmult_stale_head_thief():
    # thief reads Head=1, owner's take then completes, thief still returns task 1
    sim = _scripted("ws-wmult", [Call("put", 1), Call("take")], [[Call("steal"), Call("steal")]])
    sim.run_op(0)
    sim.step(1)  # thief: Head.read() -> 1
    sim.run_op(0)  # take -> 1, Head = 2
    assert sim.run_op(1) == 1
    assert sim.run_op(1) is EMPTY
    h = sim.history()
    assert check_linearizable(h, WeakMultiplicityFifo(2)).accepted
    assert check_multiplicity_bounds(h, "weak").accepted


@pytest.mark.parametrize("algorithm", ["b-ws-mult", "b-ws-wmult"])
def test_bounded_steal(algorithm):
    q = _flat(NativeMemory(), algorithm)
    o, t1, t2 = q.owner(), q.thief(), q.thief()
    o.put(7)
    assert t1.steal() == 7
    assert q.claims.read(1) is False
    assert t2.steal() is EMPTY
    assert t1.steal() is EMPTY


@pytest.mark.parametrize("algorithm", ["b-ws-mult", "b-ws-wmult"])
def test_bounded_take_and_steal_may_share_a_task(algorithm):
    sim = _scripted(algorithm, [Call("put", 1), Call("take")], [[Call("steal")]], max_retries=4)
    sim.run_op(0)
    sim.run_until(0, lambda ins: ins is not None and ins.kind is Kind.WRITE)
    sim.run_op(1)
    sim.run_op(0)
    h = sim.history()
    assert [op.result for op in h.operations if op.is_extraction] == [1, 1]
    assert check_multiplicity_bounds(h, "bounded").accepted


def test_bounded_steals_never_share_a_task_in_any_interleaving():
    def setup():
        mem = SimMemory()
        q = _flat(mem, "b-ws-wmult", max_retries=4)
        return Program(mem, [Process(q.owner(), [Call("put", 1), Call("put", 2)]),
                             Process(q.thief(), [Call("steal"), Call("steal")]),
                             Process(q.thief(), [Call("steal"), Call("steal")])])

    ex = explore_histories(setup, Bounds(steps=200))
    assert ex.histories
    for h in ex.histories:
        assert check_multiplicity_bounds(h, "bounded").accepted, h.to_text()


def test_exact_contended_single_winner():
    for ex in explore(lambda: _program_exact()):
        got = [op.result for op in ex.history.operations if op.is_extraction and op.result is not EMPTY]
        assert sorted(got) == [1]


def _program_exact():
    mem = SimMemory()
    q = _flat(mem, "exact", max_retries=4)
    owner = q.owner()
    owner.put(1)  # before the run
    return Program(mem, [Process(owner, [Call("take")]), Process(q.thief(), [Call("steal")])])


def test_retry_cap_is_a_bound_error():
    q = _flat(NativeMemory(), "b-ws-wmult", max_retries=0)
    o, t = q.owner(), q.thief()
    o.put(1)
    o.put(2)
    q.claims.swap(1, False)  # someone else already won index 1
    with pytest.raises(RetryCapExceeded):
        t.steal()


@pytest.mark.parametrize("algorithm", RELAXED)
@pytest.mark.parametrize("seed", range(5))
def test_sequentially_exact(algorithm, seed):
    work = random_workload(2000, seed, thieves=3)
    assert check_sequentially_exact(lambda: make(NativeMemory(), algorithm), work, thieves=3).accepted
    steal_only = random_workload(2000, seed, thieves=2, steal_only=True)
    assert check_sequentially_exact(lambda: make(NativeMemory(), algorithm), steal_only, thieves=2).accepted


def test_ten_puts_twelve_takes():
    work = [("put", x) for x in range(1, 11)] + [("take",)] * 12
    for algorithm in RELAXED:
        assert check_sequentially_exact(lambda: make(NativeMemory(), algorithm), work).accepted


@pytest.mark.parametrize("algorithm", ["ws-wmult", "b-ws-wmult", "exact"])
def test_wmult_constant_steps(algorithm):
    mem = NativeMemory(count=True)
    q = make(mem, algorithm)
    o, t = q.owner(), q.thief()
    worst = 0
    for x in range(1, 3000):
        for op in (lambda: o.put(x), o.take, t.steal, lambda: o.put(x), t.steal):
            mem.reset_counter()
            op()
            worst = max(worst, mem.reset_counter().total)
    assert worst <= 8


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(ALGORITHMS), st.integers(0, 2**32), st.integers(1, 3))
def test_native_recorded_histories_respect_bounds(algorithm, seed, thieves):
    mem = NativeMemory()
    q = make(mem, algorithm, capacity=64)
    n = 20
    owner = [Call("put", x) for x in range(1, n + 1)] + [Call("take")] * (n // 2) + [Call("take")] * 2
    procs = [NativeProcess(q.owner(), owner)]
    procs += [NativeProcess(q.thief(), [Call("steal")] * (n // 2 + 2)) for _ in range(thieves)]
    h = record(procs, seed=seed, jitter=0.0002)
    mode = BOUND_MODE[algorithm]
    if mode is not None:
        assert check_multiplicity_bounds(h, mode, fifo=algorithm != "chase-lev").accepted


def test_owner_handle_is_unique():
    q = WorkStealingQueue(NativeMemory())
    q.owner()
    with pytest.raises(RuntimeError):
        q.owner()


def test_bottom_first_put_order():
    mem = SimMemory()
    q = _flat(mem, "ws-wmult", bottom_first=True)
    log = []
    real = mem.access

    def spy(kind, cid, arg=None, arg2=None):
        log.append((kind, mem.name(cid), arg))
        return real(kind, cid, arg, arg2)

    mem.access = spy
    q.owner().put(5)
    assert log == [(Kind.WRITE, "Tasks[2]", BOTTOM), (Kind.WRITE, "Tasks[0]", 5)]
