from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wsmult.checker import (
    ExactFifo,
    History,
    MalformedHistory,
    Monitor,
    MultiplicityFifo,
    Status,
    WeakMultiplicityFifo,
    check_corpus,
    check_linearizable,
    check_multiplicity_bounds,
    check_set_linearizable,
    explore_monitored,
    inv,
    is_drained,
    make_setup,
    owner_programs,
    programs,
    res,
)
from wsmult.shmem import EMPTY, BoundExceeded, explore_histories

DEF1 = (MultiplicityFifo(), check_set_linearizable)


def def2(n=2):
    return WeakMultiplicityFifo(n), check_linearizable


def accepts(h, which):
    spec, check = which
    return check(h, spec).status is Status.ACCEPTED


def rejects(h, which):
    spec, check = which
    return check(h, spec).status is Status.REJECTED


TAKE_STEAL_OVERLAP = History([
    inv(0, "put", 1), res(0, "put", True),
    inv(0, "take"), inv(1, "steal"), res(0, "take", 1), res(1, "steal", 1),
])

TAKE_THEN_STEAL_SAME = History.sequential([(0, "put", 1, True), (0, "take", None, 1), (1, "steal", None, 1)])


def test_concurrent_take_and_steal_share_a_task():
    assert accepts(TAKE_STEAL_OVERLAP, DEF1)
    assert accepts(TAKE_STEAL_OVERLAP, def2())
    assert not accepts(TAKE_STEAL_OVERLAP, (ExactFifo(), check_linearizable))


def test_sequential_puts_and_empty_history():
    h = History.sequential([(0, "put", 1, True), (0, "put", 2, True)])
    for which in (DEF1, def2(), (ExactFifo(), check_linearizable)):
        assert accepts(h, which)
        assert accepts(History([]), which)


def test_sequential_repeat_distinguishes_the_two_definitions():
    assert rejects(TAKE_THEN_STEAL_SAME, DEF1)
    assert accepts(TAKE_THEN_STEAL_SAME, def2())


def test_steal_empty_before_any_put():
    h = History.sequential([(1, "steal", None, EMPTY), (0, "put", 1, True), (0, "take", None, 1)])
    assert accepts(h, DEF1) and accepts(h, def2())


KNOWN_BAD = [
    # value never put
    History.sequential([(0, "put", 1, True), (1, "steal", None, 2)]),
    # later task first
    History.sequential([(0, "put", 1, True), (0, "put", 2, True), (0, "take", None, 2)]),
    # empty while a task is certainly present
    History.sequential([(0, "put", 1, True), (1, "steal", None, EMPTY)]),
    # same process extracts a task twice
    History.sequential([(0, "put", 1, True), (1, "steal", None, 1), (1, "steal", None, 1)]),
]


@pytest.mark.parametrize("h", KNOWN_BAD)
def test_known_bad_histories_rejected(h):
    assert rejects(h, DEF1)
    assert rejects(h, def2())


def test_weak_owner_string_can_skip_ahead():
    # a thief got 2, the owner may still take 1 (its string still starts at 1)
    h = History.sequential([(0, "put", 1, True), (0, "put", 2, True), (1, "steal", None, 1),
                            (2, "steal", None, 2), (0, "take", None, 1)])
    assert accepts(h, def2(3))
    assert rejects(h, DEF1)


def _exact_histories():
    out = []
    for owner in owner_programs(2, 2):
        for steals in ((1,), (2,)):
            setup = make_setup("exact", owner, steals)
            out.extend(explore_histories(setup).histories)
    return out


def test_exact_histories_satisfy_both_definitions():
    hs = _exact_histories()
    assert len(hs) > 50
    for h in hs:
        assert accepts(h, (ExactFifo(), check_linearizable)), h.to_text()
        assert accepts(h, DEF1), h.to_text()
        assert accepts(h, def2()), h.to_text()


def test_bound_modes():
    assert check_multiplicity_bounds(TAKE_STEAL_OVERLAP, "mult").accepted
    assert check_multiplicity_bounds(TAKE_STEAL_OVERLAP, "bounded").accepted
    assert not check_multiplicity_bounds(TAKE_STEAL_OVERLAP, "exact").accepted
    assert not check_multiplicity_bounds(TAKE_THEN_STEAL_SAME, "mult").accepted
    assert check_multiplicity_bounds(TAKE_THEN_STEAL_SAME, "weak").accepted
    twice = History.sequential([(0, "put", 1, True), (1, "steal", None, 1), (2, "steal", None, 1)])
    assert check_multiplicity_bounds(twice, "weak").accepted
    assert not check_multiplicity_bounds(twice, "bounded").accepted
    with pytest.raises(ValueError):
        check_multiplicity_bounds(twice, "sometimes")


def test_bounds_fifo_order_and_drained_loss():
    out_of_order = History.sequential([(0, "put", 1, True), (0, "put", 2, True), (1, "steal", None, 2),
                                       (1, "steal", None, 1)])
    assert not check_multiplicity_bounds(out_of_order, "exact", fifo=True).accepted
    assert check_multiplicity_bounds(out_of_order, "exact").accepted
    lost = History.sequential([(0, "put", 1, True), (0, "put", 2, True), (0, "take", None, 1),
                               (0, "take", None, EMPTY), (0, "take", None, EMPTY)])
    assert is_drained(lost)
    assert not check_multiplicity_bounds(lost, "exact").accepted


def test_linearizable_histories_satisfy_their_bounds():
    # anything set-linearizable for the multiplicity spec must meet the pairwise-concurrency bound
    for owner in owner_programs(2, 2):
        for steals in ((1,), (2,)):
            for h in explore_histories(make_setup("ws-mult", owner, steals)).histories:
                if accepts(h, DEF1):
                    assert check_multiplicity_bounds(h, "mult").accepted, h.to_text()


def test_mutant_is_caught_by_the_strong_definition():
    report = check_corpus("ws-wmult", "multiplicity", 1, method="histories", max_puts=2, max_takes=2,
                          max_steals=2, max_failures=1)
    assert report.rejected > 0
    assert report.failures and report.failures[0][1].status is Status.REJECTED


def test_weak_mutant_caught_by_exact_spec():
    report = check_corpus("ws-wmult", "exact", 1, max_puts=1, max_takes=1, max_steals=1)
    assert report.rejected > 0


SMALL = [(o, s) for o, s in programs(1, 2, 2, 2)]


@pytest.mark.parametrize("algorithm, kind", [("ws-mult", "multiplicity"), ("ws-wmult", "weak"),
                                             ("ws-wmult", "multiplicity"), ("b-ws-wmult", "weak")])
def test_monitor_agrees_with_search_on_small_corpus(algorithm, kind):
    machine, check = (DEF1 if kind == "multiplicity" else def2())
    for owner, steals in SMALL:
        setup = make_setup(algorithm, owner, steals)
        explicit = all(check(h, machine).accepted for h in explore_histories(setup).histories)
        monitored = explore_monitored(setup, machine, check is check_set_linearizable).ok
        assert explicit == monitored, (owner, steals)


def test_monitor_violation_is_a_real_counterexample():
    setup = make_setup("ws-wmult", ("put", "put", "take", "take"), (2,))
    ex = explore_monitored(setup, MultiplicityFifo(), True)
    assert not ex.ok
    assert rejects(ex.violations[0], DEF1)


def test_monitor_pending_extractions_only_shrink_on_response():
    mon = Monitor(MultiplicityFifo(), 2, sets=True)
    s = mon.initial
    s = mon.invoke(s, 0, {0: ("put", 1)})
    s = mon.respond(s, 0, True)
    both = {0: ("take", None), 1: ("steal", None)}
    s1 = mon.invoke(s, 0, both)
    s2 = mon.invoke(s1, 1, both)
    assert s2 and mon.respond(s2, 0, 1)
    assert not mon.respond(s2, 0, 2)


def test_owner_program_count():
    assert len(owner_programs()) == 69
    assert sum(1 for _ in programs(1)) == 207
    assert sum(1 for _ in programs(2)) == 621


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.sampled_from(["put", "take", "steal"]),
                          st.one_of(st.none(), st.integers(1, 9)), st.one_of(st.just(EMPTY), st.integers(1, 9),
                                                                               st.booleans())),
                max_size=12))
def test_history_text_round_trip(calls):
    h = History.sequential(calls)
    assert History.from_text(h.to_text()) == h


def test_malformed_history():
    with pytest.raises(MalformedHistory):
        History([inv(0, "take"), inv(0, "take")])
    with pytest.raises(MalformedHistory):
        History([res(0, "take", 1)])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from(["put", "take", "steal"]), max_size=10))
def test_sequential_exact_runs_accepted_everywhere(ops):
    # oracle: a plain list acting as the FIFO queue
    queue, calls, ids = [], [], itertools.count(1)
    for op in ops:
        if op == "put":
            x = next(ids)
            queue.append(x)
            calls.append((0, "put", x, True))
        else:
            calls.append((0 if op == "take" else 1, op, None, queue.pop(0) if queue else EMPTY))
    h = History.sequential(calls)
    assert accepts(h, (ExactFifo(), check_linearizable))
    assert accepts(h, DEF1)
    assert accepts(h, def2())


@pytest.mark.parametrize("algorithm, kind", [("ws-mult", "multiplicity"), ("ws-wmult", "weak"),
                                             ("b-ws-mult", "multiplicity")])
def test_mirrored_steal_assignments_are_equivalent(algorithm, kind):
    machine, check = (DEF1 if kind == "multiplicity" else def2(3))
    for owner in [("put", "take"), ("put", "put", "take"), ("take", "put")]:
        runs = []
        for steals in ((1, 2), (2, 1)):
            ex = explore_monitored(make_setup(algorithm, owner, steals), machine, check is check_set_linearizable,
                                   prune_retries=True)
            runs.append((ex.states, ex.complete_runs, ex.pruned, ex.ok))
        assert runs[0] == runs[1], (owner, runs)


@pytest.mark.parametrize("owner", [("put", "take"), ("put", "put", "take", "take")])
def test_bounded_tree_head_thief_waits_for_the_claim_winner(owner):
    # a thief that loses the claim on a task must not answer EMPTY while the
    # winner's steal is still in flight and the owner can still take the task
    ex = explore_monitored(make_setup("b-ws-mult", owner, (1, 1)), *_monitor_args(DEF1), prune_retries=True)
    assert ex.ok, ex.violations
    assert ex.pruned > 0  # the loser really spins


def test_retry_cap_is_an_error_without_pruning():
    with pytest.raises(BoundExceeded):
        explore_monitored(make_setup("b-ws-mult", ("put", "take"), (1, 1)), *_monitor_args(DEF1))


def _monitor_args(pair):
    machine, check = pair
    return machine, check is check_set_linearizable


def test_symmetric_corpus_is_the_sorted_steal_tuples():
    full = list(programs(2))
    reduced = list(programs(2, symmetric=True))
    assert len(reduced) == 69 * 6
    assert {(o, tuple(sorted(s))) for o, s in full} == set(reduced)
