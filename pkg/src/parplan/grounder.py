"""Instantiation of typed action schemas into a ground PlanningTask.

Every non-static ground atom becomes a two-valued fluent with domain
("false", "true").  Static predicates (never changed by any effect) are
evaluated against the initial state while parameters are being bound, so
instances with a contradicted static precondition are never built.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import GroundingTooLarge, InputError
from .model import Action, Fluent, PartialState, PlanningTask

log = logging.getLogger(__name__)

BOOL = ("false", "true")
DEFAULT_MAX_ACTIONS = 5_000_000


@dataclass(frozen=True)
class Literal:
    pred: str
    args: tuple
    value: bool = True


@dataclass(frozen=True)
class EqualityTest:
    left: str
    right: str
    positive: bool = True


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple          # ((var, (type, ...)), ...)
    pre: tuple = ()        # Literal
    eq: tuple = ()         # EqualityTest
    effects: tuple = ()    # Literal; value False = delete


@dataclass(frozen=True)
class SchemaTask:
    predicates: tuple      # ((name, (param types, ...)), ...) in declaration order
    types: dict            # type -> tuple of parents
    objects: tuple         # ((name, (type, ...)), ...) in declaration order
    actions: tuple
    init: frozenset        # {(pred, args)}
    goal: tuple = ()       # Literal
    goal_eq: tuple = ()    # EqualityTest
    static: Optional[frozenset] = None
    warnings: tuple = field(default=(), compare=False)

    def __post_init__(self):
        preds = {p for p, _ in self.predicates}
        for a in self.actions:
            for l in a.pre + a.effects:
                if l.pred not in preds:
                    raise InputError(f"action {a.name}: unknown predicate {l.pred!r}")
        for l in self.goal:
            if l.pred not in preds:
                raise InputError(f"goal: unknown predicate {l.pred!r}")
        # type hierarchy must be acyclic
        state = {}

        def visit(t, path):
            if state.get(t) == 2:
                return
            if state.get(t) == 1:
                raise InputError("cyclic type hierarchy: " + " < ".join(path + [t]))
            state[t] = 1
            for p in self.types.get(t, ()):
                visit(p, path + [t])
            state[t] = 2

        for t in list(self.types):
            visit(t, [])


def _ancestors(types, t):
    out = [t]
    stack = [t]
    while stack:
        for p in types.get(stack.pop(), ()):
            if p not in out:
                out.append(p)
                stack.append(p)
    if "object" not in out:
        out.append("object")
    return out


def universes(st: SchemaTask) -> dict:
    """type -> objects of that type (or a subtype), in declaration order."""
    uni: dict = {}
    for name, tys in st.objects:
        for t in tys:
            for a in _ancestors(st.types, t):
                lst = uni.setdefault(a, [])
                if name not in lst:
                    lst.append(name)
    return uni


def static_filter(st: SchemaTask) -> SchemaTask:
    """Classify predicates that no effect mentions as static."""
    changed = {l.pred for a in st.actions for l in a.effects}
    static = frozenset(p for p, _ in st.predicates if p not in changed)
    return replace(st, static=static)


def _atom_name(pred, args):
    return f"{pred}({','.join(args)})" if args else pred


def _relaxed_reachable(init_atoms, ground):
    """Atoms reachable when deletes and negative preconditions are ignored."""
    reach = set(init_atoms)
    todo = list(range(len(ground)))
    changed = True
    usable = set()
    while changed:
        changed = False
        rest = []
        for i in todo:
            pos = [a for a, v in ground[i][1] if v]
            if all(a in reach for a in pos):
                usable.add(i)
                for a, v in ground[i][2]:
                    if v and a not in reach:
                        reach.add(a)
                        changed = True
            else:
                rest.append(i)
        todo = rest
    return usable


def ground(st: SchemaTask, max_actions: int = DEFAULT_MAX_ACTIONS, relaxed_reachability: bool = False,
           warnings: Optional[list] = None) -> PlanningTask:
    if st.static is None:
        st = static_filter(st)
    warn = warnings if warnings is not None else []
    static = st.static
    init = st.init
    uni = universes(st)
    obj_order = {name: i for i, (name, _) in enumerate(st.objects)}
    pred_order = {p: i for i, (p, _) in enumerate(st.predicates)}

    def domain_of(types):
        out = []
        for t in types:
            for o in uni.get(t, ()):
                if o not in out:
                    out.append(o)
        out.sort(key=obj_order.__getitem__)
        return out

    ground_acts = []      # (name, [(atom, bool)], [(atom, bool)], schema)
    for sch in st.actions:
        names = [p for p, _ in sch.params]
        doms = [domain_of(tys) for _, tys in sch.params]
        for (p, tys), d in zip(sch.params, doms):
            if not d:
                msg = f"no objects of type {' or '.join(tys)}; schema {sch.name} has no instances"
                log.warning(msg)
                warn.append(msg)
        if any(not d for d in doms):
            continue
        pos_of = {v: i for i, v in enumerate(names)}

        def last_var(terms):
            idx = [pos_of[t] for t in terms if t in pos_of]
            return max(idx) if idx else -1

        # tests whose arguments become fully bound at parameter k
        checks = [[] for _ in range(len(names) + 1)]
        for l in sch.pre:
            if l.pred in static:
                checks[last_var(l.args) + 1].append(("lit", l))
        for e in sch.eq:
            checks[last_var((e.left, e.right)) + 1].append(("eq", e))

        def holds(check, sub):
            kind, c = check
            if kind == "lit":
                atom = (c.pred, tuple(sub.get(a, a) for a in c.args))
                return (atom in init) == c.value
            return (sub.get(c.left, c.left) == sub.get(c.right, c.right)) == c.positive

        sub: dict = {}
        if not all(holds(c, sub) for c in checks[0]):
            continue
        dropped_noop = False

        def rec(k):
            nonlocal dropped_noop
            if k == len(names):
                args = tuple(sub[v] for v in names)
                pre = {}
                for l in sch.pre:
                    if l.pred in static:
                        continue
                    atom = (l.pred, tuple(sub.get(a, a) for a in l.args))
                    if pre.get(atom, l.value) != l.value:
                        return            # contradictory precondition
                    pre[atom] = l.value
                eff = {}
                for l in sch.effects:
                    atom = (l.pred, tuple(sub.get(a, a) for a in l.args))
                    eff[atom] = eff.get(atom, False) or l.value     # add beats delete
                if not eff:
                    dropped_noop = True
                    return
                ground_acts.append((_atom_name(sch.name, args), tuple(pre.items()), tuple(eff.items())))
                if len(ground_acts) > max_actions:
                    raise GroundingTooLarge(f"more than {max_actions} ground actions",
                                            {"actions": len(ground_acts), "schemas": len(st.actions),
                                             "objects": len(st.objects)})
                return
            for o in doms[k]:
                sub[names[k]] = o
                if all(holds(c, sub) for c in checks[k + 1]):
                    rec(k + 1)
            sub.pop(names[k], None)

        rec(0)
        if dropped_noop:
            msg = f"schema {sch.name} has instances without effects; they were dropped"
            log.warning(msg)
            warn.append(msg)

    if relaxed_reachability:
        keep = _relaxed_reachable(init, ground_acts)
        ground_acts = [g for i, g in enumerate(ground_acts) if i in keep]

    goal = {}
    for l in st.goal:
        atom = (l.pred, tuple(l.args))
        if l.pred in static and (atom in init) == l.value:
            continue
        if goal.get(atom, l.value) != l.value:
            raise InputError(f"goal requires both {_atom_name(*atom)} and its negation")
        goal[atom] = l.value
    for e in st.goal_eq:
        if (e.left == e.right) != e.positive:
            raise InputError(f"goal equality ({e.left} = {e.right}) is false")

    atoms = set(goal)
    for _, pre, eff in ground_acts:
        atoms.update(a for a, _ in pre)
        atoms.update(a for a, _ in eff)
    atoms.update(a for a in init if a[0] not in static)

    def key(atom):
        return (pred_order.get(atom[0], len(pred_order)), tuple(obj_order.get(o, -1) for o in atom[1]), atom)

    order = sorted(atoms, key=key)
    idx = {a: i for i, a in enumerate(order)}
    fluents = tuple(Fluent(_atom_name(*a), BOOL) for a in order)
    init_vals = tuple(1 if a in init else 0 for a in order)
    actions = tuple(Action(name, PartialState((idx[a], int(v)) for a, v in pre),
                           PartialState((idx[a], int(v)) for a, v in eff))
                    for name, pre, eff in ground_acts)
    g = PartialState((idx[a], int(v)) for a, v in goal.items())
    return PlanningTask(fluents, init_vals, g, actions)
