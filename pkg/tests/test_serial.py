import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parplan.errors import UsageError
from parplan.model import PlanningTask, StepPlan
from parplan.serial import (check_exists, check_forall, check_relaxed, exists_fixpoint, invalidation_graph,
                            oracle_serializable, validate_plan)

from helpers import perm_oracle, random_confluent_sample, t1, t2


def test_t1_first_step_is_exists_but_not_forall():
    t = t1()
    s0 = t.init
    assert not check_forall(t, s0, ["a1", "a2"])
    res = check_exists(t, s0, ["a1", "a2"])
    assert res.ok and res.witness == [0, 1]
    # a2 overwrites x1 that a1 reads, so a1 has to go first
    assert invalidation_graph(t, [0, 1]) == {0: set(), 1: {0}}


def test_t2_counterexample():
    t = t2()
    g = invalidation_graph(t, [0, 1])
    assert g == {0: {1}, 1: set()}
    assert not check_relaxed(t, t.init, [0, 1]).ok
    assert not check_exists(t, t.init, [0, 1]).ok
    assert not oracle_serializable(t, t.init, [0, 1], "relaxed")


def test_relaxed_allows_preconditions_produced_inside_the_step():
    t = t1()
    res = check_relaxed(t, t.init, [0, 1, 2, 3])
    assert res.ok and res.witness == [0, 1, 2, 3]
    assert not check_exists(t, t.init, [0, 1, 2, 3]).ok


def test_cycle_reports_non_ready_actions():
    t = PlanningTask.from_symbols(
        [("x", ("0", "1")), ("y", ("0", "1"))], {"x": "0", "y": "0"}, {},
        [("a", {"x": "0"}, {"y": "1"}), ("b", {"y": "0"}, {"x": "1"})])
    res = check_exists(t, t.init, [0, 1])
    assert not res.ok and res.non_ready == {0, 1}
    assert exists_fixpoint(t, t.init, [0, 1]).non_ready == {0, 1}


def test_nonconfluent_sets_are_rejected_everywhere():
    t = PlanningTask.from_symbols([("x", ("0", "1", "2"))], {"x": "0"}, {},
                                  [("a", {}, {"x": "1"}), ("b", {}, {"x": "2"})])
    for check in (check_exists, exists_fixpoint, check_relaxed):
        assert not check(t, t.init, [0, 1]).ok
    assert not check_forall(t, t.init, [0, 1])


def test_empty_set_is_serializable():
    t = t1()
    assert check_forall(t, t.init, [])
    assert check_exists(t, t.init, []).witness == []


def test_oracle_limit():
    t = t1()
    with pytest.raises(UsageError):
        oracle_serializable(t, t.init, [0], "bogus")


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_checkers_match_permutation_oracle(seed):
    rng = np.random.default_rng(seed)
    task, s, acts = random_confluent_sample(rng)
    f = check_forall(task, s, acts)
    e = check_exists(task, s, acts)
    fp = exists_fixpoint(task, s, acts)
    r = check_relaxed(task, s, acts)
    assert f == perm_oracle(task, s, acts, "forall")
    assert e.ok == perm_oracle(task, s, acts, "exists") == fp.ok
    assert r.ok == perm_oracle(task, s, acts, "relaxed")
    assert (not f or e.ok) and (not e.ok or r.ok)
    for res in (e, fp, r):
        if res.ok:
            # witness is a full ordering that actually runs
            assert sorted(res.witness) == acts
            cur = s
            for a in res.witness:
                act = task.actions[a]
                assert all(cur[x] == v for x, v in act.pre.items())
                cur = tuple(act.post.get(i, v) for i, v in enumerate(cur))


def test_validate_plan_reports():
    t = t1()
    ok = validate_plan(t, StepPlan([("a1", "a2"), ("a3", "a4")], "exists"))
    assert ok.valid and ok.line() == "VALID steps=2 actions=4"
    assert ok.sequential == ["a1", "a2", "a3", "a4"]
    bad = validate_plan(t, StepPlan([("a1", "a2"), ("a3", "a4")], "forall"))
    assert bad.line() == "INVALID step=1 reason=interference"
    seq = validate_plan(t, StepPlan([("a1", "a2")], "exists"), semantics="sequential")
    assert seq.line() == "INVALID step=1 reason=parallel"
    goal = validate_plan(t, StepPlan([("a1",)], "sequential"))
    assert goal.line() == "INVALID step=1 reason=goal"
    relaxed = validate_plan(t, StepPlan([("a1", "a2", "a3", "a4")], "relaxed"))
    assert relaxed.valid
    pre = validate_plan(t2(), StepPlan([("a2",)], "sequential"))
    assert pre.line() == "INVALID step=1 reason=precondition"
