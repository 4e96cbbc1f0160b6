from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wsmult.history import History
from wsmult.shmem import (
    BOTTOM,
    UNINIT,
    AccessRecord,
    Bounds,
    BoundExceeded,
    Call,
    InstructionCount,
    Kind,
    NativeMemory,
    NativeProcess,
    Process,
    Program,
    ProgramError,
    SimMemory,
    Simulation,
    Stateless,
    UninitializedRead,
    explore,
    explore_histories,
    record,
    run_schedule,
    run_sequential,
)


def _writer_program(values_per_proc):
    """Each process writes its values, one step each, to a shared cell."""

    def setup():
        mem = SimMemory()
        c = mem.cell(BOTTOM, "c")
        procs = []
        for vals in values_per_proc:
            calls = [Call("write", v, fn=lambda h, v=v: c.write(v)) for v in vals]
            procs.append(Process(Stateless(), calls))
        return Program(mem, procs)

    return setup


@pytest.mark.parametrize("mem", [SimMemory(), NativeMemory(), NativeMemory("relaxed"), NativeMemory(count=True)])
def test_cell_semantics(mem):
    c = mem.cell(BOTTOM, "c")
    assert c.read() is BOTTOM
    c.write(7)
    assert c.read() == 7
    b = mem.cell(True, "b")
    assert b.swap(False) is True
    assert b.read() is False
    n = mem.cell(3, "n")
    assert n.cas(3, 4) is True and n.read() == 4
    assert n.cas(2, 5) is False and n.read() == 4
    a = mem.array(3, 0, "a")
    a.write(1, 9)
    assert [a.read(i) for i in range(3)] == [0, 9, 0]
    assert a.swap(1, 2) == 9 and a.cas(2, 0, 1) and a.read(2) == 1


def test_two_writers_then_read():
    def setup():
        mem = SimMemory()
        c = mem.cell(BOTTOM, "c")
        p0 = Process(Stateless(), [Call("w5", fn=lambda h: c.write(5)), Call("r", fn=lambda h: c.read())])
        p1 = Process(Stateless(), [Call("w9", fn=lambda h: c.write(9))])
        return Program(mem, [p0, p1])

    ex = run_schedule(setup, [0, 1, 0])
    assert ex.history.operations[-1].result == 9
    # oracle: replay the log and track the last written value
    last = BOTTOM
    for rec in ex.log:
        if rec.kind is Kind.WRITE:
            last = rec.arg
        elif rec.kind is Kind.READ:
            assert rec.result == last


@pytest.mark.parametrize("counts, expected", [((1, 1), 2), ((2, 2), 6), ((3, 2), 10), ((2, 2, 1), 30)])
def test_explore_counts_interleavings(counts, expected):
    setup = _writer_program([list(range(k)) for k in counts])
    runs = list(explore(setup))
    assert len(runs) == expected == math.factorial(sum(counts)) // math.prod(math.factorial(k) for k in counts)
    logs = {ex.log_text() for ex in runs}
    assert len(logs) == expected


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=2, max_size=2).filter(lambda c: sum(c) <= 6))
def test_explore_multinomial_property(counts):
    setup = _writer_program([list(range(k)) for k in counts])
    n = sum(1 for _ in explore(setup))
    assert n == math.factorial(sum(counts)) // math.prod(math.factorial(k) for k in counts)


@settings(max_examples=30, deadline=None)
@given(st.data())
def test_replay_is_deterministic(data):
    setup = _writer_program([[1, 2, 3], [4, 5]])
    runs = list(explore(setup))
    ex = data.draw(st.sampled_from(runs))
    again = run_schedule(setup, ex.schedule)
    assert again.log_text() == ex.log_text()
    assert again.history == ex.history


def test_access_log_round_trip():
    ex = run_sequential(_writer_program([[1, 2], [3]]))
    text = ex.log_text()
    parsed = [AccessRecord.from_line(line) for line in text.splitlines()]
    assert parsed == ex.log
    assert text.splitlines()[0] == "0,0,write,c,1,"


def test_instruction_counts_sum_to_log():
    ex = run_sequential(_writer_program([[1, 2], [3]]))
    total = sum(c.total for _, _, c in ex.op_counts)
    assert total == len(ex.log)
    assert all(c.writes == 1 and c.reads == 0 for _, _, c in ex.op_counts)


def test_bound_exceeded_is_distinct_from_program_error():
    def spin():
        mem = SimMemory()
        c = mem.cell(0, "c")

        def forever(h):
            while True:
                c.read()

        return Program(mem, [Process(Stateless(), [Call("spin", fn=forever)])])

    with pytest.raises(BoundExceeded):
        list(explore(spin, Bounds(steps=50, op_steps=20)))

    def broken():
        mem = SimMemory()
        c = mem.cell(0, "c")
        return Program(mem, [Process(Stateless(), [Call("boom", fn=lambda h: c.read() / 0)])])

    with pytest.raises(ProgramError) as info:
        list(explore(broken))
    assert not isinstance(info.value, BoundExceeded)


def test_uninitialized_read_is_reported():
    def setup():
        mem = SimMemory()
        a = mem.array(2, UNINIT, "T")
        return Program(mem, [Process(Stateless(), [Call("r", fn=lambda h: a.read(1))])])

    with pytest.raises(UninitializedRead, match=r"T\[1\]"):
        run_sequential(setup)


def test_sim_and_native_agree_on_sequential_program():
    def body(c, out):
        c.write(3)
        out.append(c.swap(4))
        out.append(c.cas(4, 6))
        out.append(c.read())

    sim_out, native_out = [], []
    mem = SimMemory()
    body(mem.cell(0, "c"), sim_out)
    body(NativeMemory().cell(0, "c"), native_out)
    assert sim_out == native_out == [3, True, 6]


def test_explore_histories_matches_explore():
    setup = _writer_program([[1, 2], [3, 4]])
    distinct = {ex.history for ex in explore(setup)}
    found = explore_histories(setup)
    assert set(found.histories) == distinct


def test_record_respects_real_time():
    mem = NativeMemory()
    c = mem.cell(0, "c")
    procs = [NativeProcess(Stateless(), [Call("w", i, fn=lambda h, i=i: c.write(i)) for i in range(20)])
             for _ in range(3)]
    h = record(procs, seed=1, jitter=0.0005)
    assert isinstance(h, History)
    assert len(h.operations) == 60
    stamps = [ev.timestamp for ev in h.events]
    assert stamps == sorted(stamps)
    for a in h.operations:
        for b in h.operations:
            if h.precedes(a, b):
                assert a.res < b.inv


def test_counting_memory():
    mem = NativeMemory(count=True)
    c = mem.cell(0)
    c.read()
    c.write(1)
    c.swap(2)
    c.cas(2, 3)
    got = mem.reset_counter()
    assert (got.reads, got.writes, got.swaps, got.cases, got.total) == (1, 1, 1, 1, 4)
    assert mem.counter.total == 0
    sim = SimMemory(count=True)
    sim.cell(0).read()
    assert sim.reset_counter() == InstructionCount(reads=1)


def test_simulation_run_until_stops_before_instruction():
    def setup():
        mem = SimMemory()
        c = mem.cell(0, "c")

        def op(h):
            c.read()
            c.write(1)
            return c.read()

        return Program(mem, [Process(Stateless(), [Call("op", fn=op)])])

    sim = Simulation(setup)
    assert sim.run_until(0, lambda ins: ins is not None and ins.kind.is_write)
    assert sim.pending(0).kind is Kind.WRITE
    assert sim.run_op(0) == 1
    assert not sim.run_until(0, lambda ins: False)
