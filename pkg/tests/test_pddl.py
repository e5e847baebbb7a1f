import itertools

import pytest
from hypothesis import given, settings, strategies as st

from parplan.errors import InputError, PddlSyntaxError, ResidualConstruct
from parplan.pddl import beautify, check_syntax, lower_to_schemas, nnf, normalize, parse_pddl, pddl_to_task
from parplan.pddl.ast import And, Atom, Equals, Exists, Forall, Imply, Not, Or, Typed, free_vars

from helpers import data

BW = data("bw-domain.pddl")
BW2 = data("bw2-problem.pddl")

TINY = """(define (domain tiny)
  (:requirements :strips :typing)
  (:types thing)
  (:predicates (p ?x - thing) (q ?x - thing))
  (:action go :parameters (?x - thing) :precondition (p ?x) :effect (q ?x)))"""

TINY_PROBLEM = """(define (problem tp) (:domain tiny)
  (:objects a b - thing) (:init (p a)) (:goal {goal}))"""


def test_parse_blocksworld():
    ast = parse_pddl(BW, BW2)
    d = ast.domain
    assert d.name == "blocksworld"
    assert [a.name for a in d.actions] == ["pickup", "putdown", "stack", "unstack"]
    assert [p.name for p in d.predicates] == ["on", "ontable", "clear", "handempty", "holding"]
    assert ast.problem.domain_name == "blocksworld"
    assert not ast.unsupported


def test_case_and_comments_are_ignored():
    loud = TINY.upper().replace("(:ACTION", "; shouting\n(:ACTION")
    assert parse_pddl(loud).domain == parse_pddl(TINY).domain


def test_numeric_requirement_is_recorded():
    ast = parse_pddl(data("numeric-domain.pddl"))
    cats = {d.category for d in ast.unsupported}
    assert "numeric fluents" in cats
    assert len(ast.domain.actions) == 1


@pytest.mark.parametrize("text, where", [
    ("(define (domain x)\n  (:predicates (p))", (1, 1)),
    ("(define (domain x))\n)", (2, 1)),
])
def test_unbalanced_parens(text, where):
    with pytest.raises(PddlSyntaxError) as ei:
        parse_pddl(text)
    assert (ei.value.line, ei.value.col) == where
    assert "unbalanced" in str(ei.value)


@pytest.mark.parametrize("bad, msg", [
    ("(r ?x)", "r"),
    ("(p ?x ?x)", "arity"),
    ("(p ?y)", "?y"),
])
def test_condition_errors(bad, msg):
    with pytest.raises(PddlSyntaxError) as ei:
        parse_pddl(TINY.replace(":precondition (p ?x)", f":precondition {bad}"))
    assert msg in str(ei.value)


def test_undeclared_type():
    with pytest.raises(PddlSyntaxError):
        parse_pddl(TINY.replace("(?x - thing)", "(?x - widget)"))


def test_domain_name_mismatch():
    with pytest.raises(PddlSyntaxError):
        parse_pddl(TINY, TINY_PROBLEM.replace("(:domain tiny)", "(:domain other)").format(goal="(q a)"))


# -- normalization -------------------------------------------------------------

def _p(name, *args):
    return Atom(name, args)


def test_normalize_imply():
    f = Imply(_p("a"), _p("b"))
    assert nnf(f) == Or((Not(_p("a")), _p("b")))


def test_normalize_forall():
    x = (Typed("?x"),)
    f = Forall(x, _p("p", "?x"))
    assert nnf(f) == Not(Exists(x, Not(_p("p", "?x"))))


def test_normalize_flattens_and_collapses():
    f = And((And((_p("a"), _p("b"))), Or((_p("c"),))))
    assert nnf(f) == And((_p("a"), _p("b"), _p("c")))
    assert nnf(Not(And((_p("a"), Not(_p("b")))))) == Or((Not(_p("a")), _p("b")))


def test_normalize_whole_ast():
    text = TINY.replace(":precondition (p ?x)", ":precondition (imply (q ?x) (p ?x))")
    ast = normalize(parse_pddl(text))
    assert ast.domain.actions[0].precondition == Or((Not(_p("q", "?x")), _p("p", "?x")))
    assert normalize(ast) == ast


VARS = ["?x", "?y"]


def _formulas():
    atoms = st.builds(lambda p, a: Atom(p, (a,)), st.sampled_from(["p", "q"]), st.sampled_from(VARS + ["o1"]))
    eqs = st.builds(Equals, st.sampled_from(VARS), st.sampled_from(VARS + ["o2"]))
    leaves = atoms | eqs

    def grow(kids):
        params = st.sampled_from(VARS).map(lambda v: (Typed(v),))
        return (st.builds(Not, kids)
                | st.builds(lambda xs: And(tuple(xs)), st.lists(kids, min_size=1, max_size=3))
                | st.builds(lambda xs: Or(tuple(xs)), st.lists(kids, min_size=1, max_size=3))
                | st.builds(Imply, kids, kids)
                | st.builds(Forall, params, kids)
                | st.builds(Exists, params, kids))
    return st.recursive(leaves, grow, max_leaves=8)


UNIVERSE = ("o1", "o2")


def _eval(f, interp, env):
    """Reference truth value over a two-object universe."""
    val = lambda t: env.get(t, t)
    if isinstance(f, Atom):
        return (f.pred, tuple(val(a) for a in f.args)) in interp
    if isinstance(f, Equals):
        return val(f.left) == val(f.right)
    if isinstance(f, Not):
        return not _eval(f.arg, interp, env)
    if isinstance(f, And):
        return all(_eval(a, interp, env) for a in f.args)
    if isinstance(f, Or):
        return any(_eval(a, interp, env) for a in f.args)
    if isinstance(f, Imply):
        return (not _eval(f.lhs, interp, env)) or _eval(f.rhs, interp, env)
    names = [p.name for p in f.params]
    results = (_eval(f.body, interp, {**env, **dict(zip(names, vs))})
               for vs in itertools.product(UNIVERSE, repeat=len(names)))
    return all(results) if isinstance(f, Forall) else any(results)


def _is_nnf(f):
    if isinstance(f, (Atom, Equals)):
        return True
    if isinstance(f, Not):
        return isinstance(f.arg, (Atom, Equals)) or (isinstance(f.arg, Exists) and _is_nnf(f.arg))
    if isinstance(f, (And, Or)):
        return len(f.args) > 1 and all(_is_nnf(a) and not isinstance(a, type(f)) for a in f.args)
    if isinstance(f, Exists):
        return _is_nnf(f.body)
    return False


ALL_ATOMS = [(p, (o,)) for p in "pq" for o in UNIVERSE]


@settings(max_examples=200, deadline=None)
@given(_formulas())
def test_nnf_properties(f):
    g = nnf(f)
    assert _is_nnf(g)
    assert nnf(g) == g
    assert free_vars(g) == free_vars(f)
    for mask in range(1 << len(ALL_ATOMS)):
        interp = {a for i, a in enumerate(ALL_ATOMS) if mask >> i & 1}
        for vs in itertools.product(UNIVERSE, repeat=len(VARS)):
            env = dict(zip(VARS, vs))
            assert _eval(g, interp, env) == _eval(f, interp, env)


# -- printing ------------------------------------------------------------------

@pytest.mark.parametrize("problem", ["bw2-problem.pddl", "bw4-problem.pddl", None])
def test_beautify_round_trip(problem):
    ptext = data(problem) if problem else None
    ast = parse_pddl(BW, ptext)
    dom, prob = beautify(ast)
    again = parse_pddl(dom, prob)
    assert again == ast
    assert beautify(again) == (dom, prob)
    assert all(not line.endswith(" ") for line in dom.splitlines())


def test_beautify_keeps_conditional_effects():
    ast = parse_pddl(data("cond-domain.pddl"), data("cond-problem.pddl"))
    dom, prob = beautify(ast)
    assert "(when" in dom
    assert parse_pddl(dom, prob) == ast


# -- lowering ------------------------------------------------------------------

def test_disjunctive_goal_is_residual():
    ast = normalize(parse_pddl(TINY, TINY_PROBLEM.format(goal="(or (q a) (q b))")))
    with pytest.raises(ResidualConstruct) as ei:
        lower_to_schemas(ast)
    assert "disjunction" in str(ei.value)
    st_, diags = lower_to_schemas(ast, collect=True)
    assert st_ is None and [d.category for d in diags] == ["disjunction"]


def test_negative_precondition_lowers_to_false():
    task = pddl_to_task(data("t1-domain.pddl"), data("t1-problem.pddl"))
    a1 = task.actions[task.action_index("a1")]
    x1 = task.fluent_index("x1")
    assert task.fluents[x1].domain == ("false", "true")
    assert a1.pre == {x1: 0}


def test_universal_precondition_is_residual():
    text = TINY.replace(":precondition (p ?x)", ":precondition (forall (?y - thing) (p ?y))")
    with pytest.raises(ResidualConstruct) as ei:
        lower_to_schemas(normalize(parse_pddl(text, TINY_PROBLEM.format(goal="(q a)"))))
    assert "universal quantifier" in str(ei.value)


def test_check_syntax_valid_pair():
    assert check_syntax(BW, BW2) == []


def test_check_syntax_conditional_effect():
    diags = check_syntax(data("cond-domain.pddl"), data("cond-problem.pddl"))
    assert [d.message for d in diags] == ["unsupported: conditional effect"]
    assert diags[0].severity == "warning"


def test_check_syntax_parse_error():
    diags = check_syntax("(define (domain x)", None, domain_source="d.pddl")
    assert len(diags) == 1 and diags[0].severity == "error"
    assert diags[0].format().startswith("d.pddl:1:1: error:")


def test_check_syntax_numeric():
    msgs = [d.message for d in check_syntax(data("numeric-domain.pddl"))]
    assert "unsupported: numeric fluents" in msgs


def test_bw2_end_to_end_task():
    task = pddl_to_task(BW, BW2)
    assert task.n_fluents == 9 and task.n_actions == 8
    assert all(f.domain == ("false", "true") for f in task.fluents)


def test_goal_with_false_equality_is_an_error():
    with pytest.raises(InputError):
        pddl_to_task(TINY.replace(":typing)", ":typing :equality)"),
                     TINY_PROBLEM.format(goal="(and (q a) (= a b))"))
