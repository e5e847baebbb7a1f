"""Rewriting of formulas into negation normal form.

imply becomes a disjunction, forall becomes a negated existential, negation
is pushed down to atoms (it may remain in front of an existential), and
nested conjunctions/disjunctions are flattened.  A conjunction or
disjunction with a single member is replaced by that member.
"""

from __future__ import annotations

from dataclasses import replace

from .ast import And, Atom, Equals, Exists, Forall, Imply, Not, Or, PddlAst, Raw, When


def _junction(cls, args, pos):
    flat = []
    for a in args:
        if isinstance(a, cls):
            flat.extend(a.args)
        else:
            flat.append(a)
    if len(flat) == 1:
        return flat[0]
    return cls(tuple(flat), pos)


def nnf(f, negate: bool = False):
    """Normal form of f (or of its negation when negate is set)."""
    if f is None:
        return None
    if isinstance(f, (Atom, Equals, Raw)):
        return Not(f, f.pos) if negate else f
    if isinstance(f, Not):
        return nnf(f.arg, not negate)
    if isinstance(f, And):
        kids = [nnf(a, negate) for a in f.args]
        return _junction(Or if negate else And, kids, f.pos)
    if isinstance(f, Or):
        kids = [nnf(a, negate) for a in f.args]
        return _junction(And if negate else Or, kids, f.pos)
    if isinstance(f, Imply):
        return nnf(Or((Not(f.lhs, f.pos), f.rhs), f.pos), negate)
    if isinstance(f, Forall):
        # forall x: p  ==  not exists x: not p
        inner = Exists(f.params, nnf(f.body, True), f.pos)
        return inner if negate else Not(inner, f.pos)
    if isinstance(f, Exists):
        e = Exists(f.params, nnf(f.body, False), f.pos)
        return Not(e, f.pos) if negate else e
    raise TypeError(f"not a condition: {f!r}")


def normalize_effect(e):
    """Effects keep their shape; only conjunctions are flattened and inner
    conditions normalized."""
    if e is None:
        return None
    if isinstance(e, And):
        return _junction(And, [normalize_effect(a) for a in e.args], e.pos)
    if isinstance(e, When):
        return When(nnf(e.cond), normalize_effect(e.effect), e.pos)
    if isinstance(e, Forall):
        return Forall(e.params, normalize_effect(e.body), e.pos)
    return e


def normalize(ast: PddlAst) -> PddlAst:
    d = ast.domain
    actions = tuple(replace(a, precondition=nnf(a.precondition), effect=normalize_effect(a.effect))
                    for a in d.actions)
    derived = tuple(replace(x, body=nnf(x.body)) for x in d.derived)
    dom = replace(d, actions=actions, derived=derived)
    prob = ast.problem
    if prob is not None:
        prob = replace(prob, goal=nnf(prob.goal))
    return PddlAst(dom, prob, ast.unsupported)
