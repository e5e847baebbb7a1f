"""Ground planning tasks over multivalued fluents.

Everything here is immutable.  Fluents, values and actions are referred to
by ordinal internally (values are indices into the fluent's domain); the
original symbols are kept so that writers can reproduce them exactly.

A state is a plain tuple of value indices, one per fluent.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Union

from .errors import StructuralError

SEMANTICS = ("sequential", "forall", "exists", "relaxed")

State = tuple


class PartialState(Mapping):
    """Read-only mapping fluent ordinal -> value index."""

    __slots__ = ("_d", "_items")

    def __init__(self, bindings=()):
        d = dict(bindings)
        self._d = d
        self._items = tuple(sorted(d.items()))

    def __getitem__(self, key):
        return self._d[key]

    def __iter__(self):
        return iter(k for k, _ in self._items)

    def __len__(self):
        return len(self._items)

    def __hash__(self):
        return hash(self._items)

    def __eq__(self, other):
        if isinstance(other, PartialState):
            return self._items == other._items
        if isinstance(other, Mapping):
            return self._d == dict(other)
        return NotImplemented

    def items(self):
        return self._items

    def __repr__(self):
        return f"PartialState({dict(self._items)!r})"


@dataclass(frozen=True)
class Fluent:
    name: str
    domain: tuple

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(self.domain))
        if not self.domain:
            raise StructuralError(f"fluent {self.name!r} has an empty domain")
        if len(set(self.domain)) != len(self.domain):
            raise StructuralError(f"fluent {self.name!r} has duplicate domain values")

    def value_index(self, sym) -> int:
        try:
            return self.domain.index(sym)
        except ValueError:
            raise StructuralError(f"value {sym!r} not in domain of fluent {self.name!r}") from None


@dataclass(frozen=True)
class Action:
    name: str
    pre: PartialState
    post: PartialState

    def __post_init__(self):
        if not isinstance(self.pre, PartialState):
            object.__setattr__(self, "pre", PartialState(self.pre))
        if not isinstance(self.post, PartialState):
            object.__setattr__(self, "post", PartialState(self.post))


@dataclass(frozen=True)
class PlanningTask:
    fluents: tuple
    init: tuple
    goal: PartialState
    actions: tuple
    mutex_groups: tuple = ()
    _fidx: dict = field(init=False, repr=False, compare=False)
    _aidx: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "fluents", tuple(self.fluents))
        object.__setattr__(self, "init", tuple(self.init))
        object.__setattr__(self, "actions", tuple(self.actions))
        if not isinstance(self.goal, PartialState):
            object.__setattr__(self, "goal", PartialState(self.goal))
        groups = tuple(tuple(sorted(set(g))) for g in self.mutex_groups)
        object.__setattr__(self, "mutex_groups", groups)

        fidx = {}
        for i, f in enumerate(self.fluents):
            if f.name in fidx:
                raise StructuralError(f"duplicate fluent id {f.name!r}")
            fidx[f.name] = i
        aidx = {}
        for i, a in enumerate(self.actions):
            if a.name in aidx:
                raise StructuralError(f"duplicate action id {a.name!r}")
            aidx[a.name] = i
        object.__setattr__(self, "_fidx", fidx)
        object.__setattr__(self, "_aidx", aidx)

        if len(self.init) != len(self.fluents):
            raise StructuralError("initial state is not total over the fluents")
        self._check_partial(dict(enumerate(self.init)), "init")
        self._check_partial(self.goal, "goal")
        for a in self.actions:
            self._check_partial(a.pre, f"precondition of {a.name}")
            self._check_partial(a.post, f"postcondition of {a.name}")
            if not a.post:
                raise StructuralError(f"action {a.name!r} has an empty postcondition")
        for gi, g in enumerate(groups):
            for f, v in g:
                self._check_binding(f, v, f"mutex group {gi}")
            if sum(1 for f, v in g if self.init[f] == v) > 1:
                raise StructuralError(f"initial state violates mutex group g{gi}")

    def _check_binding(self, f, v, what):
        if not (0 <= f < len(self.fluents)):
            raise StructuralError(f"{what}: unknown fluent ordinal {f}")
        if not (0 <= v < len(self.fluents[f].domain)):
            raise StructuralError(f"{what}: value {v} out of domain of {self.fluents[f].name}")

    def _check_partial(self, ps, what):
        for f, v in ps.items():
            self._check_binding(f, v, what)

    # -- lookup ----------------------------------------------------------

    def fluent_index(self, name) -> int:
        try:
            return self._fidx[name]
        except KeyError:
            raise StructuralError(f"unknown fluent id {name!r}") from None

    def action_index(self, name) -> int:
        try:
            return self._aidx[name]
        except KeyError:
            raise StructuralError(f"unknown action id {name!r}") from None

    def resolve_action(self, a) -> int:
        if isinstance(a, str):
            return self.action_index(a)
        if isinstance(a, Action):
            return self.action_index(a.name)
        a = int(a)
        if not 0 <= a < len(self.actions):
            raise StructuralError(f"unknown action ordinal {a}")
        return a

    def resolve_actions(self, ids) -> list:
        return sorted({self.resolve_action(a) for a in ids})

    @property
    def n_fluents(self) -> int:
        return len(self.fluents)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    @cached_property
    def posters(self):
        """posters[f][v] = ordinals of actions whose postcondition sets f to v."""
        res = [[[] for _ in f.domain] for f in self.fluents]
        for i, a in enumerate(self.actions):
            for f, v in a.post.items():
                res[f][v].append(i)
        return tuple(tuple(tuple(l) for l in per) for per in res)

    # -- symbolic helpers --------------------------------------------------

    @classmethod
    def from_symbols(cls, fluents, init, goal, actions, mutex_groups=()):
        """Build a task from names.

        fluents: sequence of (name, domain); init/goal: mapping name -> value;
        actions: sequence of (name, pre mapping, post mapping);
        mutex_groups: sequence of iterables of (fluent name, value).
        """
        fl = [Fluent(n, tuple(d)) for n, d in fluents]
        idx = {f.name: i for i, f in enumerate(fl)}

        def conv(m, what):
            out = {}
            for k, v in dict(m).items():
                if k not in idx:
                    raise StructuralError(f"{what}: unknown fluent id {k!r}")
                out[idx[k]] = fl[idx[k]].value_index(v)
            return out

        init_d = conv(init, "init")
        if len(init_d) != len(fl):
            missing = [f.name for i, f in enumerate(fl) if i not in init_d]
            raise StructuralError(f"initial state is not total (missing {', '.join(missing)})")
        acts = [Action(n, PartialState(conv(p, n)), PartialState(conv(q, n))) for n, p, q in actions]
        groups = [[(idx[f], fl[idx[f]].value_index(v)) for f, v in g] for g in mutex_groups]
        return cls(tuple(fl), tuple(init_d[i] for i in range(len(fl))), PartialState(conv(goal, "goal")),
                   tuple(acts), tuple(groups))

    def state_from_symbols(self, m: Mapping) -> tuple:
        s = [None] * len(self.fluents)
        for k, v in m.items():
            f = self.fluent_index(k)
            s[f] = self.fluents[f].value_index(v)
        if any(x is None for x in s):
            raise StructuralError("state is not total")
        return tuple(s)

    def state_symbols(self, s) -> dict:
        return {f.name: f.domain[v] for f, v in zip(self.fluents, s)}

    def partial_symbols(self, ps) -> dict:
        return {self.fluents[f].name: self.fluents[f].domain[v] for f, v in ps.items()}


@dataclass(frozen=True)
class StepPlan:
    """A sequence of action sets plus the semantics it claims to satisfy."""

    steps: tuple
    semantics: str = "sequential"

    def __post_init__(self):
        steps = tuple(tuple(s) for s in self.steps)
        object.__setattr__(self, "steps", steps)
        if self.semantics not in SEMANTICS:
            raise StructuralError(f"unknown plan semantics {self.semantics!r}")
        if self.semantics == "sequential" and any(len(s) > 1 for s in steps):
            raise StructuralError("sequential plans allow at most one action per step")

    def __len__(self):
        return len(self.steps)

    @property
    def n_actions(self) -> int:
        return sum(len(s) for s in self.steps)


# -- successor semantics -------------------------------------------------------


def _check_state(task: PlanningTask, s):
    if len(s) != task.n_fluents:
        raise StructuralError("state does not match the task's fluents")


def applicable(task: PlanningTask, s, a) -> bool:
    act = task.actions[task.resolve_action(a)]
    return all(s[f] == v for f, v in act.pre.items())


def successor(task: PlanningTask, s, a) -> Optional[tuple]:
    """Successor of s under a, or None when a's precondition is violated."""
    _check_state(task, s)
    act = task.actions[task.resolve_action(a)]
    for f, v in act.pre.items():
        if s[f] != v:
            return None
    out = list(s)
    for f, v in act.post.items():
        out[f] = v
    return tuple(out)


def apply_sequence(task: PlanningTask, s, seq: Iterable) -> Optional[tuple]:
    _check_state(task, s)
    ids = [task.resolve_action(a) for a in seq]
    cur = tuple(s)
    for a in ids:
        cur = successor(task, cur, a)
        if cur is None:
            return None
    return cur


def check_goal(s, goal: Mapping) -> bool:
    return all(s[f] == v for f, v in goal.items())


def is_confluent(task: PlanningTask, A: Iterable) -> bool:
    seen = {}
    for a in task.resolve_actions(A):
        for f, v in task.actions[a].post.items():
            if seen.setdefault(f, v) != v:
                return False
    return True


def parallel_update(task: PlanningTask, s, A: Iterable) -> tuple:
    """State after applying the union of the postconditions of A to s.

    A is assumed confluent; the result is undefined otherwise.
    """
    out = list(s)
    for a in task.resolve_actions(A):
        for f, v in task.actions[a].post.items():
            out[f] = v
    return tuple(out)


def satisfies_mutexes(task: PlanningTask, s) -> bool:
    return all(sum(1 for f, v in g if s[f] == v) <= 1 for g in task.mutex_groups)


ActionRef = Union[int, str, Action]
