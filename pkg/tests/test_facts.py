import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parplan.errors import FactFormatError
from parplan.facts import quote, read_facts, write_facts
from parplan.model import PlanningTask

from helpers import data, random_task, t1


def test_t1_golden():
    text = data("t1.lp")
    assert write_facts(read_facts(text)) == text
    assert len(text.splitlines()) == 38


def test_quoting():
    assert quote("x1") == "x1"
    assert quote("on(a,b)") == '"on(a,b)"'
    assert quote('say "hi"') == '"say \\"hi\\""'


def test_layout_free_reading_and_comments():
    text = """% a comment
    fluent(x). value(x,0). value(x,1). init(x,0).   goal(x,1).
    action("set x"). post("set x",x,1).
    """
    t = read_facts(text)
    assert t.actions[0].name == "set x"
    assert write_facts(t).splitlines()[-1] == 'post("set x",x,1).'


def test_mutex_groups_round_trip():
    t = PlanningTask.from_symbols([("p", ("a", "b")), ("q", ("a", "b"))], {"p": "a", "q": "a"}, {}, [],
                                  [[("p", "b"), ("q", "b")]])
    text = write_facts(t)
    assert "mutex(g0,p,b)." in text
    assert read_facts(text) == t


@pytest.mark.parametrize("text, msg", [
    ("fluent(x). value(x,0). init(x,0). foo(x).", "unknown predicate"),
    ("fluent(x). value(x,0). init(x).", "expects 2"),
    ("action(a).", "no fluents"),
    ("fluent(x). value(x,0). init(x,1).", "undeclared value"),
    ("fluent(x). value(x,0). value(x,1). init(x,0). init(x,1).", "conflicting"),
    ("fluent(x). value(x,0). value(x,1).", "not total"),
    ("fluent(x). value(x,0). init(x,0). prec(a,x,0).", "undeclared action"),
    ("fluent(x). value(x,0). init(x,0) fluent(y).", None),
])
def test_read_errors(text, msg):
    with pytest.raises(FactFormatError) as ei:
        read_facts(text)
    if msg:
        assert msg in str(ei.value)


def test_error_positions():
    with pytest.raises(FactFormatError) as ei:
        read_facts("fluent(x).\nvalue(x,0).\ninit(x,0).\nbar(1).")
    assert (ei.value.line, ei.value.col) == (4, 1)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_random_round_trip(seed):
    task = random_task(np.random.default_rng(seed), max_fluents=4, max_actions=5)
    text = write_facts(task)
    back = read_facts(text)
    assert back == task
    assert write_facts(back) == text
