"""Horizon-indexed propositional encodings of a planning task.

Atoms and their engine variables:

    holds(x, v, t)   fluent x has value v after step t        (t >= 0)
    occurs(a, t)     action a is applied in step t            (t >= 1)
    single(x, t)     at most one action writing x in step t   (t >= 1, forall only)
    query(t)         the goal is required at step t           (t >= 0)

Step 0 fixes the initial state.  Every later step t gets an exactly-one
constraint per fluent, postcondition clauses, frame clauses (a value can
only appear if it held before or some occurring action writes it) and the
query-guarded goal.  Idle steps are always possible.  Mode-specific parts:

    SEQ          preconditions, at most one action per step
    FORALL       preconditions, no action may write a fluent another occurring
                 action reads with a different value; a self-invalidating
                 action forces single(x, t), which admits one writer of x
    EXISTS_ACYC  preconditions, conditional edge a -> a' guarded by occurs(a, t)
                 when a overwrites a precondition of a'; the engine keeps the
                 active edges acyclic
    GC_EXISTS    preconditions only (serializability is checked afterwards)
    GC_RELAXED   nothing (preconditions are checked afterwards)

Steps are append-only: extend_to(n) encodes the missing steps, nothing is
ever re-encoded.  A plan of length m is asked for by assuming query(m) and
refuting every other query atom.
"""

from __future__ import annotations

import enum
from typing import Optional

from .engine import Engine
from .engine.core import amo_clauses
from .errors import UsageError
from .model import PlanningTask, StepPlan

HEURISTIC_TOP = 2147483647


class Mode(enum.Enum):
    SEQ = "seq"
    FORALL = "forall"
    EXISTS_ACYC = "exists"
    GC_EXISTS = "gc-exists"
    GC_RELAXED = "gc-relaxed"

    @property
    def semantics(self) -> str:
        return {Mode.SEQ: "sequential", Mode.FORALL: "forall", Mode.EXISTS_ACYC: "exists",
                Mode.GC_EXISTS: "exists", Mode.GC_RELAXED: "relaxed"}[self]


class Encoding:
    """Incremental encoding of one task into one engine."""

    def __init__(self, task: PlanningTask, engine: Engine, mode: Mode, record: bool = False):
        self.task = task
        self.engine = engine
        self.mode = Mode(mode)
        self.max_step = -1
        self.forall_active = self.mode is Mode.FORALL
        self.holds: list = []        # holds[t][x][v]
        self.occurs: list = [None]   # occurs[t][a], t >= 1
        self.single: list = [None]   # single[t][x]
        self.query: list = []
        self.atoms: dict = {}        # var -> atom tuple
        self.records: Optional[dict] = {} if record else None
        self.step_listeners: list = []
        self._prepare()
        self.encode_base()

    # -- static analysis of the task -------------------------------------------

    def _prepare(self):
        task = self.task
        acts = task.actions
        pairs = set()
        self_inval = {}
        for a, act in enumerate(acts):
            for x, v in act.pre.items():
                w = act.post.get(x)
                if w is None:
                    for b in range(len(acts)):
                        if b != a and acts[b].post.get(x, v) != v:
                            pairs.add((min(a, b), max(a, b)))
                elif w != v:
                    self_inval.setdefault(x, []).append(a)
        self._forall_pairs = sorted(pairs)
        self._self_inval = dict(sorted(self_inval.items()))
        self._writers = {}
        for a, act in enumerate(acts):
            for x in act.post:
                self._writers.setdefault(x, []).append(a)
        edges = []
        for a, act in enumerate(acts):
            for b, other in enumerate(acts):
                if a == b:
                    continue
                if any(x in act.post and act.post[x] != v for x, v in other.pre.items()):
                    edges.append((a, b))
        self._edges = edges

    # -- helpers ---------------------------------------------------------------

    def _var(self, atom):
        v = self.engine.new_var()
        self.atoms[v] = atom
        return v

    def _aux(self):
        v = self.engine.new_var()
        self.atoms[v] = ("aux",)
        return v

    def _clause(self, t, lits):
        self.engine.add_clause(lits)
        if self.records is not None:
            self.records.setdefault(t, []).append(("clause", tuple(lits)))

    def _amo(self, t, lits, guard=None):
        if self.records is not None:
            self.records.setdefault(t, []).append(("amo", tuple(lits), guard))
        for cl in amo_clauses(lits, self._aux, guard):
            self.engine.add_clause(cl)

    def _edge(self, t, lit, u, v):
        self.engine.add_edge(lit, u, v)
        if self.records is not None:
            self.records.setdefault(t, []).append(("edge", lit, u, v))

    def node(self, a, t):
        return t * max(1, self.task.n_actions) + a

    # -- steps -----------------------------------------------------------------

    def encode_base(self):
        if self.max_step >= 0:
            raise UsageError("base already encoded")
        task = self.task
        hs = [[self._var(("holds", x, v, 0)) for v in range(len(f.domain))] for x, f in enumerate(task.fluents)]
        self.holds.append(hs)
        for x, f in enumerate(task.fluents):
            for v in range(len(f.domain)):
                self._clause(0, [hs[x][v]] if task.init[x] == v else [-hs[x][v]])
        q = self._var(("query", 0))
        self.query.append(q)
        for x, v in task.goal.items():
            self._clause(0, [-q, hs[x][v]])
        for g in task.mutex_groups:
            self._amo(0, [hs[x][v] for x, v in g])
        self.max_step = 0

    def encode_step(self, t: int):
        if t != self.max_step + 1:
            raise UsageError(f"step {t} out of order (next step is {self.max_step + 1})")
        task = self.task
        prev = self.holds[t - 1]
        hs = [[self._var(("holds", x, v, t)) for v in range(len(f.domain))] for x, f in enumerate(task.fluents)]
        self.holds.append(hs)
        occ = [self._var(("occurs", a, t)) for a in range(task.n_actions)]
        self.occurs.append(occ)
        self.single.append({})
        q = self._var(("query", t))
        self.query.append(q)

        for x in range(task.n_fluents):
            self._clause(t, list(hs[x]))
            self._amo(t, hs[x])
        for a, act in enumerate(task.actions):
            for x, v in act.post.items():
                self._clause(t, [-occ[a], hs[x][v]])
        posters = task.posters
        for x, f in enumerate(task.fluents):
            for v in range(len(f.domain)):
                self._clause(t, [-hs[x][v], prev[x][v]] + [occ[a] for a in posters[x][v]])
        for x, v in task.goal.items():
            self._clause(t, [-q, hs[x][v]])
        for g in task.mutex_groups:
            self._amo(t, [hs[x][v] for x, v in g])

        if self.mode is not Mode.GC_RELAXED:
            for a, act in enumerate(task.actions):
                for x, v in act.pre.items():
                    self._clause(t, [-occ[a], prev[x][v]])
        if self.mode is Mode.SEQ:
            self._amo(t, occ)
        if self.forall_active:
            self._forall_block(t)
        if self.mode is Mode.EXISTS_ACYC:
            for a, b in self._edges:
                self._edge(t, occ[a], self.node(a, t), self.node(b, t))
        self.max_step = t
        for cb in self.step_listeners:
            cb(t)

    def _forall_block(self, t):
        occ = self.occurs[t]
        for a, b in self._forall_pairs:
            self._clause(t, [-occ[a], -occ[b]])
        for x, acts in self._self_inval.items():
            s = self._var(("single", x, t))
            self.single[t][x] = s
            for a in acts:
                self._clause(t, [-occ[a], s])
            self._amo(t, [occ[a] for a in self._writers.get(x, ())], guard=s)

    def enable_forall(self):
        """Add the forall constraints to every existing and future step."""
        if self.forall_active:
            return
        self.forall_active = True
        for t in range(1, self.max_step + 1):
            self._forall_block(t)

    def extend_to(self, n: int):
        if n < self.max_step:
            raise UsageError(f"cannot shrink encoding from {self.max_step} to {n}")
        for t in range(self.max_step + 1, n + 1):
            self.encode_step(t)

    def query_assumptions(self, m: int) -> list:
        if not 0 <= m <= self.max_step:
            raise UsageError(f"query step {m} outside 0..{self.max_step}")
        return [self.query[m]] + [-self.query[i] for i in range(self.max_step + 1) if i != m]

    # -- models ----------------------------------------------------------------

    def occurring(self, model, t) -> list:
        return [a for a, v in enumerate(self.occurs[t]) if model[v]]

    def extract_plan(self, model, m: int) -> StepPlan:
        names = self.task.actions
        steps = [tuple(names[a].name for a in self.occurring(model, t)) for t in range(1, m + 1)]
        return StepPlan(tuple(steps), self.mode.semantics)

    def extract_states(self, model, m: int) -> list:
        out = []
        for t in range(m + 1):
            s = []
            for per in self.holds[t]:
                vals = [v for v, var in enumerate(per) if model[var]]
                s.append(vals[0] if len(vals) == 1 else None)
            out.append(tuple(s))
        return out

    def plan_assumptions(self, plan: StepPlan) -> list:
        """Literals fixing exactly the actions of plan at steps 1..len(plan)."""
        out = []
        for t, step in enumerate(plan.steps, start=1):
            chosen = set(self.task.resolve_actions(step))
            out.extend(v if a in chosen else -v for a, v in enumerate(self.occurs[t]))
        return out

    def holds_var_info(self, var):
        atom = self.atoms.get(var)
        if atom is None or atom[0] != "holds":
            return None
        return atom[1:]
