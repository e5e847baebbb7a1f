import pytest

from parplan.errors import AxiomsUnsupported, ConditionalEffectUnsupported, SasFormatError
from parplan.pddl import pddl_to_task
from parplan.sas import operator_id, parse_sas, to_task

from helpers import data


def sas(variables=(("v0", 3), ("v1", 2)), mutex=(), init=(0, 1), goal=((0, 2),), ops=None,
        version=3, extra="", axiom_layer=-1, rules=None):
    """Assemble a SAS document line by line."""
    out = ["begin_version", str(version), "end_version", "begin_metric", "0", "end_metric", str(len(variables))]
    for name, size in variables:
        out += ["begin_variable", name, str(axiom_layer), str(size)]
        out += [f"Atom {name}-val{i}" for i in range(size)]
        out += ["end_variable"]
    out.append(str(len(mutex)))
    for g in mutex:
        out += ["begin_mutex_group", str(len(g))] + [f"{v} {x}" for v, x in g] + ["end_mutex_group"]
    out += ["begin_state"] + [str(x) for x in init] + ["end_state"]
    out += ["begin_goal", str(len(goal))] + [f"{v} {x}" for v, x in goal] + ["end_goal"]
    if ops is None:
        ops = [("move a b", [(1, 1)], ["0 0 0 2"])]
    out.append(str(len(ops)))
    for name, prevail, effects in ops:
        out += ["begin_operator", name, str(len(prevail))] + [f"{v} {x}" for v, x in prevail]
        out += [str(len(effects))] + list(effects) + ["1", "end_operator"]
    if rules is not None:
        out.append(str(len(rules)))
        for r in rules:
            out += ["begin_rule"] + r + ["end_rule"]
    return "\n".join(out) + "\n" + extra


def test_domain_sizes_and_values():
    task = to_task(parse_sas(sas()))
    assert task.fluents[0].name == "v0" and task.fluents[0].domain == ("0", "1", "2")
    assert task.fluents[1].domain == ("0", "1")
    assert task.init == (0, 1)
    assert dict(task.goal) == {0: 2}


def test_prevail_and_effect_precondition_merge():
    task = to_task(parse_sas(sas()))
    a = task.actions[0]
    assert a.name == "move(a,b)"
    assert dict(a.pre) == {0: 0, 1: 1}
    assert dict(a.post) == {0: 2}


def test_any_value_precondition_is_omitted():
    task = to_task(parse_sas(sas(ops=[("reset", [], ["0 0 -1 1"])])))
    assert dict(task.actions[0].pre) == {}
    assert dict(task.actions[0].post) == {0: 1}


def test_operator_ids():
    assert operator_id("stack a b") == "stack(a,b)"
    assert operator_id("noop") == "noop"


def test_axioms_are_rejected():
    doc = parse_sas(sas(rules=[["1", "0 1", "1 0 1"]]))
    assert doc.has_axioms
    with pytest.raises(AxiomsUnsupported):
        to_task(doc)
    doc = parse_sas(sas(axiom_layer=0, rules=[]))
    assert doc.has_axioms


def test_conditional_effect_is_rejected():
    doc = parse_sas(sas(ops=[("cond", [], ["1 1 1 0 0 2"])]))
    assert doc.has_conditional_effects
    with pytest.raises(ConditionalEffectUnsupported):
        to_task(doc)


@pytest.mark.parametrize("text, msg", [
    (sas(version=4), "version"),
    (sas().replace("end_metric", "end_metrics"), "end_metric"),
    (sas(goal=((0, 3),)), "out of range"),
    (sas(goal=((2, 0),)), "out of range"),
    (sas(ops=[("bad", [], ["0 0 5 1"])]), "out of range"),
    (sas(ops=[("bad", [], ["0 1 x"])]), "malformed"),
    (sas(init=(0,)), "not total"),
    (sas(init=(0, 7)), "out of range"),
    (sas() + "junk\n", "junk"),
])
def test_format_errors(text, msg):
    with pytest.raises(SasFormatError) as ei:
        to_task(parse_sas(text))
    assert msg in str(ei.value)


def test_error_carries_line():
    text = sas(goal=((0, 3),))
    with pytest.raises(SasFormatError) as ei:
        parse_sas(text, "x.sas")
    lines = text.splitlines()
    assert lines[ei.value.line - 1] == "0 3"
    assert ei.value.location() == f"x.sas:{ei.value.line}:1"


def test_unknown_section_is_kept_opaque():
    text = sas().replace("begin_state", "begin_layout\nwhatever 1 2\nend_layout\nbegin_state")
    doc = parse_sas(text)
    assert doc.opaque == [("layout", ["whatever 1 2"])]
    assert doc.warnings and "layout" in doc.warnings[0]
    assert to_task(doc) == to_task(parse_sas(sas()))


def test_mutex_violated_in_init():
    with pytest.raises(SasFormatError):
        to_task(parse_sas(sas(mutex=[[(0, 0), (1, 1)]])))
    task = to_task(parse_sas(sas(mutex=[[(0, 1), (1, 1)]])))
    assert task.mutex_groups == (((0, 1), (1, 1)),)


def test_conflicting_preconditions():
    with pytest.raises(SasFormatError):
        to_task(parse_sas(sas(ops=[("c", [(0, 1)], ["0 0 0 2"])])))


def test_blocksworld_is_more_compact_than_pddl():
    sas_task = to_task(parse_sas(data("bw4.sas")))
    pddl_task = pddl_to_task(data("bw-domain.pddl"), data("bw4-problem.pddl"))
    assert sas_task.n_fluents == 9
    assert sas_task.n_fluents < pddl_task.n_fluents
    assert sorted(a.name for a in sas_task.actions) == sorted(a.name for a in pddl_task.actions)
