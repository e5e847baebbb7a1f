"""Incremental CDCL engine with assumptions, budgets, acyclicity and hints.

Public literals follow the DIMACS convention: variables are numbered from 1,
a negative integer is the negated literal.  Internally variable v becomes
index v-1 and literal 2*(v-1)+sign, see kernels.py.

The search loop is Python; BCP, conflict analysis, backjumping and the
variable heap run in the numba kernels.  Conditional edges (the acyclicity
constraint) and assignment callbacks are handled in Python after each BCP
fixpoint, on the part of the trail that has not been looked at yet.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..errors import UsageError
from . import kernels as K
from .kernels import (M_HEAP, M_LEVELS, M_NCLAUSES, M_NLITS, M_PROPS, M_QHEAD, M_TRAIL,
                      META_SIZE)

RESTART_BASE = 64
VAR_DECAY = 0.95
PAIRWISE_AMO_MAX = 8


class Status(enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    BUDGET_EXHAUSTED = "BUDGET_EXHAUSTED"


@dataclass
class SolveStats:
    conflicts: int = 0
    decisions: int = 0
    propagations: int = 0
    restarts: int = 0


@dataclass
class SolveOutcome:
    status: Status
    model: Optional[np.ndarray] = None
    stats: SolveStats = field(default_factory=SolveStats)

    @property
    def sat(self) -> bool:
        return self.status is Status.SAT

    def value(self, lit: int) -> bool:
        """Truth value of a public literal in the model."""
        if self.model is None:
            raise UsageError("no model available")
        v = self.model[abs(lit)]
        return bool(v) if lit > 0 else not v


def luby(i: int) -> int:
    """i-th element (0-based) of the Luby sequence 1,1,2,1,1,2,4,..."""
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    x = i
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x = x % size
    return 1 << seq


def amo_clauses(lits, new_var, guard=None):
    """Clauses for at-most-one over public literals.

    Pairwise up to PAIRWISE_AMO_MAX literals, sequential counter above (new
    auxiliary variables come from new_var()).  With a guard literal g the
    constraint only applies when g is true.
    """
    lits = list(dict.fromkeys(lits))
    g = [] if guard is None else [-guard]
    out = []
    n = len(lits)
    if n <= 1:
        return out
    if n <= PAIRWISE_AMO_MAX:
        for i in range(n):
            for j in range(i + 1, n):
                out.append(g + [-lits[i], -lits[j]])
        return out
    s = [new_var() for _ in range(n - 1)]
    out.append(g + [-lits[0], s[0]])
    for i in range(1, n - 1):
        out.append(g + [-lits[i], s[i]])
        out.append([-s[i - 1], s[i]])
        out.append(g + [-lits[i], -s[i - 1]])
    out.append(g + [-lits[n - 1], -s[n - 2]])
    return out


class Engine:
    """One incremental constraint store.  Not thread-safe; one owner at a time."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self._rng = np.random.default_rng(seed)
        self.nv = 0
        self._ok = True
        self._meta = np.zeros(META_SIZE, dtype=np.int64)
        self._var_inc = np.ones(1, dtype=np.float64)
        self._alloc_vars(64)
        self._alloc_clauses(256, 2048)
        self._lvl_stamp = np.zeros(self._vcap + 2, dtype=np.int64)
        self._original: list = []
        self._amo_groups: list = []
        # acyclicity
        self._edges: list = []            # (ilit, u, v)
        self._edges_by_lit: dict = {}
        self._adj: dict = {}
        self._active: list = []           # (trail pos, edge id)
        # callbacks and hints
        self._watchers: dict = {}
        self._interesting = np.zeros(2 * self._vcap, dtype=np.bool_)
        self._hint_undo: list = []        # (trail pos, var, old level, old phase)
        self._in_search = False
        self._in_callback = False
        self._tq = 0
        self._cb_pos = -1
        self._n_learnt = 0
        self._max_learnts = 2000.0
        self.total = SolveStats()
        self.learnt_log: Optional[list] = None

    # -- storage ---------------------------------------------------------------

    def _alloc_vars(self, cap):
        self._vcap = cap
        self._assigns = np.full(cap, -1, dtype=np.int8)
        self._level = np.zeros(cap, dtype=np.int32)
        self._reason = np.full(cap, -1, dtype=np.int32)
        self._trail = np.zeros(cap, dtype=np.int32)
        self._trail_lim = np.zeros(cap + 1, dtype=np.int32)
        self._activity = np.zeros(cap, dtype=np.float64)
        self._hint_level = np.zeros(cap, dtype=np.int64)
        self._hint_phase = np.full(cap, -1, dtype=np.int8)
        self._saved_phase = np.full(cap, -1, dtype=np.int8)
        self._heap = np.zeros(cap, dtype=np.int32)
        self._heap_pos = np.full(cap, -1, dtype=np.int32)
        self._seen = np.zeros(cap, dtype=np.int8)
        self._w_head = np.full(2 * cap, -1, dtype=np.int32)
        self._out = np.zeros(cap + 1, dtype=np.int32)

    def _grow_vars(self, need):
        if need <= self._vcap:
            return
        cap = self._vcap
        while cap < need:
            cap *= 2

        def grow(a, size, fill):
            b = np.full(size, fill, dtype=a.dtype)
            b[:a.shape[0]] = a
            return b

        self._assigns = grow(self._assigns, cap, -1)
        self._level = grow(self._level, cap, 0)
        self._reason = grow(self._reason, cap, -1)
        self._trail = grow(self._trail, cap, 0)
        self._trail_lim = grow(self._trail_lim, cap + 1, 0)
        self._activity = grow(self._activity, cap, 0.0)
        self._hint_level = grow(self._hint_level, cap, 0)
        self._hint_phase = grow(self._hint_phase, cap, -1)
        self._saved_phase = grow(self._saved_phase, cap, -1)
        self._heap = grow(self._heap, cap, 0)
        self._heap_pos = grow(self._heap_pos, cap, -1)
        self._seen = grow(self._seen, cap, 0)
        self._w_head = grow(self._w_head, 2 * cap, -1)
        self._out = grow(self._out, cap + 1, 0)
        self._interesting = grow(self._interesting, 2 * cap, False)
        self._lvl_stamp = grow(self._lvl_stamp, cap + 2, 0)
        self._vcap = cap

    def _alloc_clauses(self, ccap, lcap):
        self._ccap = ccap
        self._lcap = lcap
        self._cl_lits = np.zeros(lcap, dtype=np.int32)
        self._cl_start = np.zeros(ccap, dtype=np.int64)
        self._cl_size = np.zeros(ccap, dtype=np.int32)
        self._cl_deleted = np.zeros(ccap, dtype=np.int8)
        self._cl_learnt = np.zeros(ccap, dtype=np.int8)
        self._cl_lbd = np.zeros(ccap, dtype=np.int32)
        self._w_next = np.full(2 * ccap, -1, dtype=np.int32)

    def _ensure_clause_room(self, n_lits):
        c = int(self._meta[M_NCLAUSES])
        if c + 1 > self._ccap:
            cap = self._ccap * 2
            for name, fill in (("_cl_start", 0), ("_cl_size", 0), ("_cl_deleted", 0),
                               ("_cl_learnt", 0), ("_cl_lbd", 0)):
                a = getattr(self, name)
                b = np.full(cap, fill, dtype=a.dtype)
                b[:a.shape[0]] = a
                setattr(self, name, b)
            b = np.full(2 * cap, -1, dtype=np.int32)
            b[:self._w_next.shape[0]] = self._w_next
            self._w_next = b
            self._ccap = cap
        used = int(self._meta[M_NLITS])
        if used + n_lits > self._lcap:
            cap = self._lcap
            while used + n_lits > cap:
                cap *= 2
            b = np.zeros(cap, dtype=np.int32)
            b[:used] = self._cl_lits[:used]
            self._cl_lits = b
            self._lcap = cap

    # -- variables and literals ------------------------------------------------

    def new_var(self) -> int:
        self._grow_vars(self.nv + 1)
        v = self.nv
        self.nv += 1
        # tiny seeded jitter so the initial order is a function of the seed
        self._activity[v] = self._rng.random() * 1e-6
        K.heap_insert(self._meta, self._heap, self._heap_pos, v, self._hint_level, self._activity)
        return v + 1

    def new_vars(self, n: int) -> list:
        return [self.new_var() for _ in range(n)]

    def _ilit(self, lit: int) -> int:
        v = abs(int(lit))
        if lit == 0 or v > self.nv:
            raise UsageError(f"unregistered variable in literal {lit}")
        return 2 * (v - 1) + (1 if lit < 0 else 0)

    @staticmethod
    def _plit(ilit: int) -> int:
        v = (ilit >> 1) + 1
        return -v if ilit & 1 else v

    def _value(self, ilit: int) -> int:
        a = self._assigns[ilit >> 1]
        if a < 0:
            return -1
        return int(a) ^ (ilit & 1)

    # -- constraints -----------------------------------------------------------

    def _check_mutable(self):
        if self._in_callback:
            raise UsageError("constraints cannot be added from an assignment callback")
        if self._in_search:
            raise UsageError("constraints can only be added between solve calls")

    def add_clause(self, lits) -> None:
        self._check_mutable()
        ilits = [self._ilit(l) for l in lits]
        self._original.append([int(l) for l in lits])
        self._add_ilits(ilits)

    def _add_ilits(self, ilits):
        if not self._ok:
            return
        seen = set()
        keep = []
        for l in ilits:
            if l ^ 1 in seen:
                return                          # tautology
            if l in seen:
                continue
            val = self._value(l)
            if val == 1 and self._level[l >> 1] == 0:
                return                          # satisfied for good
            if val == 0 and self._level[l >> 1] == 0:
                continue
            seen.add(l)
            keep.append(l)
        if not keep:
            self._ok = False
            return
        if len(keep) == 1:
            K.enqueue(self._meta, self._assigns, self._level, self._reason, self._trail, keep[0], -1)
            if K.propagate(self._meta, self._assigns, self._level, self._reason, self._trail,
                           self._cl_lits, self._cl_start, self._cl_size, self._cl_deleted,
                           self._w_head, self._w_next) >= 0:
                self._ok = False
            return
        arr = np.asarray(keep, dtype=np.int32)
        self._ensure_clause_room(len(arr))
        K.attach_clause(self._meta, arr, len(arr), 0, 0, self._cl_lits, self._cl_start, self._cl_size,
                        self._cl_deleted, self._cl_learnt, self._cl_lbd, self._w_head, self._w_next)

    def add_amo(self, lits) -> None:
        self._check_mutable()
        for l in lits:
            self._ilit(l)
        self._amo_groups.append([int(l) for l in lits])
        for cl in amo_clauses(lits, self.new_var):
            self.add_clause(cl)

    def add_edge(self, lit: int, u, v) -> None:
        """Edge u -> v of the acyclicity constraint, active while lit is true."""
        self._check_mutable()
        il = self._ilit(lit)
        eid = len(self._edges)
        self._edges.append((il, u, v))
        self._edges_by_lit.setdefault(il, []).append(eid)
        self._interesting[il] = True
        if not self._ok:
            return
        if self._value(il) == 1:
            pos = int(np.nonzero(self._trail[:self._meta[M_TRAIL]] == il)[0][0])
            if pos < self._tq:
                if self._activate(eid, -1) is not None:
                    self._ok = False

    # -- hints and callbacks ---------------------------------------------------

    def set_hint(self, var: int, level: int, phase: Optional[bool] = None) -> None:
        v = abs(var) - 1
        if var == 0 or v >= self.nv:
            raise UsageError(f"unregistered variable {var}")
        ph = -1 if phase is None else int(bool(phase))
        if self._in_search:
            self._hint_undo.append((self._cb_pos, v, int(self._hint_level[v]), int(self._hint_phase[v])))
        self._hint_level[v] = level
        self._hint_phase[v] = ph
        K.heap_update(self._meta, self._heap, self._heap_pos, v, self._hint_level, self._activity)

    def clear_hint(self, var: int) -> None:
        self.set_hint(var, 0, None)

    def hint(self, var: int):
        v = abs(var) - 1
        ph = int(self._hint_phase[v])
        return int(self._hint_level[v]), (None if ph < 0 else bool(ph))

    def on_assign(self, variables, callback: Callable[[int, bool], None]) -> None:
        """Call callback(var, value) whenever one of variables gets assigned."""
        if self._in_search:
            raise UsageError("callbacks must be registered between solve calls")
        for var in variables:
            il = self._ilit(var)
            self._watchers.setdefault(il >> 1, []).append(callback)
            self._interesting[il] = True
            self._interesting[il ^ 1] = True

    # -- acyclicity ------------------------------------------------------------

    def _activate(self, eid, pos):
        """Activate edge eid; returns conflict literals if it closes a cycle."""
        il, u, v = self._edges[eid]
        path = self._find_path(v, u)
        if path is not None:
            lits = {il ^ 1}
            for e in path:
                lits.add(self._edges[e][0] ^ 1)
            return np.fromiter(sorted(lits), dtype=np.int32)
        self._adj.setdefault(u, []).append((v, eid))
        self._active.append((pos, eid))
        return None

    def _find_path(self, src, dst):
        """Edge ids of an active path src ~> dst, or None."""
        if src == dst:
            return []
        parent = {src: None}
        stack = [src]
        while stack:
            n = stack.pop()
            for m, e in self._adj.get(n, ()):
                if m in parent:
                    continue
                parent[m] = (n, e)
                if m == dst:
                    path = []
                    while parent[m] is not None:
                        n2, e2 = parent[m]
                        path.append(e2)
                        m = n2
                    return path
                stack.append(m)
        return None

    def _process_trail(self):
        """Run edge activation and callbacks over the unseen part of the trail."""
        end = int(self._meta[M_TRAIL])
        if self._tq >= end:
            return None
        seg = self._trail[self._tq:end]
        hits = np.nonzero(self._interesting[seg])[0]
        base = self._tq
        if len(hits) == 0:
            self._tq = end
            return None
        for h in hits.tolist():
            pos = base + h
            il = int(self._trail[pos])
            self._tq = pos + 1
            cbs = self._watchers.get(il >> 1)
            if cbs:
                self._cb_pos = pos
                self._in_callback = True
                try:
                    var = (il >> 1) + 1
                    val = not (il & 1)
                    for cb in cbs:
                        cb(var, val)
                finally:
                    self._in_callback = False
            for eid in self._edges_by_lit.get(il, ()):
                confl = self._activate(eid, pos)
                if confl is not None:
                    return confl
        self._tq = end
        return None

    # -- search ----------------------------------------------------------------

    def _cancel(self, lvl):
        if self._meta[M_LEVELS] <= lvl:
            return
        stop = int(self._trail_lim[lvl])
        undo = self._hint_undo
        while undo and undo[-1][0] >= stop:
            _, v, old_level, old_phase = undo.pop()
            self._hint_level[v] = old_level
            self._hint_phase[v] = old_phase
            K.heap_update(self._meta, self._heap, self._heap_pos, v, self._hint_level, self._activity)
        act = self._active
        while act and act[-1][0] >= stop:
            _, eid = act.pop()
            self._adj[self._edges[eid][1]].pop()
        K.cancel_until(self._meta, lvl, self._assigns, self._reason, self._trail, self._trail_lim,
                       self._saved_phase, self._heap, self._heap_pos, self._hint_level, self._activity)
        self._tq = min(self._tq, stop)

    def _new_level(self):
        lv = int(self._meta[M_LEVELS])
        self._trail_lim[lv] = self._meta[M_TRAIL]
        self._meta[M_LEVELS] = lv + 1

    def _propagate(self):
        return K.propagate(self._meta, self._assigns, self._level, self._reason, self._trail,
                           self._cl_lits, self._cl_start, self._cl_size, self._cl_deleted,
                           self._w_head, self._w_next)

    def solve(self, assumptions=(), budget: Optional[int] = None) -> SolveOutcome:
        """Search for a model under the assumption literals.

        budget is a number of conflicts; None means unlimited.
        """
        if self._in_search:
            raise UsageError("solve is not reentrant")
        assumps = [self._ilit(l) for l in assumptions]
        stats = SolveStats()
        if not self._ok:
            return SolveOutcome(Status.UNSAT, stats=stats)
        if self._trail_lim.shape[0] < self._vcap + len(assumps) + 1:
            b = np.zeros(self._vcap + len(assumps) + 1, dtype=np.int32)
            b[:self._trail_lim.shape[0]] = self._trail_lim
            self._trail_lim = b
            self._lvl_stamp = np.zeros(b.shape[0] + 1, dtype=np.int64)
        props0 = int(self._meta[M_PROPS])
        self._in_search = True
        try:
            status, model = self._search(assumps, budget, stats)
        finally:
            self._in_search = False
            stats.propagations = int(self._meta[M_PROPS]) - props0
            self.total.conflicts += stats.conflicts
            self.total.decisions += stats.decisions
            self.total.propagations += stats.propagations
            self.total.restarts += stats.restarts
        return SolveOutcome(status, model, stats)

    def _search(self, assumps, budget, stats):
        meta = self._meta
        luby_i = 0
        restart_at = luby(0) * RESTART_BASE
        since_restart = 0
        n_assumps = len(assumps)
        while True:
            c = self._propagate()
            if c >= 0:
                st = int(self._cl_start[c])
                confl = self._cl_lits[st:st + int(self._cl_size[c])].copy()
            else:
                confl = self._process_trail()
            if confl is not None:
                stats.conflicts += 1
                since_restart += 1
                if meta[M_LEVELS] == 0:
                    self._ok = False
                    return Status.UNSAT, None
                n, bt, lbd = K.analyze(meta, confl, self._assigns, self._level, self._reason,
                                       self._trail, self._cl_lits, self._cl_start, self._cl_size,
                                       self._seen, self._activity, self._var_inc, self._heap,
                                       self._heap_pos, self._hint_level, self._out, self._lvl_stamp)
                learnt = self._out[:n].copy()
                self._cancel(bt)
                if self.learnt_log is not None:
                    self.learnt_log.append([self._plit(int(l)) for l in learnt])
                if n == 1:
                    K.enqueue(meta, self._assigns, self._level, self._reason, self._trail, int(learnt[0]), -1)
                else:
                    self._ensure_clause_room(n)
                    ci = K.attach_clause(meta, learnt, n, 1, lbd, self._cl_lits, self._cl_start,
                                         self._cl_size, self._cl_deleted, self._cl_learnt, self._cl_lbd,
                                         self._w_head, self._w_next)
                    self._n_learnt += 1
                    K.enqueue(meta, self._assigns, self._level, self._reason, self._trail, int(learnt[0]), ci)
                self._var_inc[0] /= VAR_DECAY
                if budget is not None and stats.conflicts >= budget:
                    self._cancel(0)
                    return Status.BUDGET_EXHAUSTED, None
                continue

            if since_restart >= restart_at:
                self._cancel(0)
                stats.restarts += 1
                luby_i += 1
                restart_at = luby(luby_i) * RESTART_BASE
                since_restart = 0
                if self._n_learnt > self._max_learnts:
                    self._reduce_db()
                continue

            nxt = -1
            while meta[M_LEVELS] < n_assumps:
                p = assumps[meta[M_LEVELS]]
                val = self._value(p)
                if val == 1:
                    self._new_level()
                elif val == 0:
                    self._cancel(0)
                    return Status.UNSAT, None
                else:
                    nxt = p
                    break
            if nxt < 0:
                v = K.pick_branch(meta, self._assigns, self._heap, self._heap_pos,
                                  self._hint_level, self._activity)
                if v < 0:
                    model = np.zeros(self.nv + 1, dtype=np.bool_)
                    model[1:] = self._assigns[:self.nv] == 1
                    self._cancel(0)
                    return Status.SAT, model
                stats.decisions += 1
                ph = self._hint_phase[v]
                if ph < 0:
                    ph = self._saved_phase[v]
                nxt = 2 * v + (0 if ph == 1 else 1)
            self._new_level()
            K.enqueue(meta, self._assigns, self._level, self._reason, self._trail, nxt, -1)

    def _reduce_db(self):
        """Forget half of the learnt clauses with LBD > 2.  Only called at level 0."""
        n = int(self._meta[M_NCLAUSES])
        learnt = (self._cl_learnt[:n] == 1) & (self._cl_deleted[:n] == 0)
        cand = np.nonzero(learnt & (self._cl_lbd[:n] > 2))[0]
        if len(cand):
            order = cand[np.argsort(-self._cl_lbd[cand], kind="stable")]
            drop = order[:len(order) // 2]
            self._cl_deleted[drop] = 1
            self._n_learnt -= len(drop)
        self._max_learnts *= 1.1
        live = self._cl_deleted[:n] == 0
        if live.sum() * 2 < n:
            self._compact()

    def _compact(self):
        """Rebuild clause storage without deleted clauses (level 0 only)."""
        n = int(self._meta[M_NCLAUSES])
        keep = np.nonzero(self._cl_deleted[:n] == 0)[0]
        chunks = [self._cl_lits[self._cl_start[c]:self._cl_start[c] + self._cl_size[c]].copy() for c in keep]
        learnt = self._cl_learnt[keep].copy()
        lbd = self._cl_lbd[keep].copy()
        self._meta[M_NCLAUSES] = 0
        self._meta[M_NLITS] = 0
        self._w_head[:] = -1
        self._w_next[:] = -1
        self._reason[:] = -1
        for ch, le, lb in zip(chunks, learnt, lbd):
            self._ensure_clause_room(len(ch))
            K.attach_clause(self._meta, ch, len(ch), int(le), int(lb), self._cl_lits, self._cl_start,
                            self._cl_size, self._cl_deleted, self._cl_learnt, self._cl_lbd,
                            self._w_head, self._w_next)

    # -- inspection ------------------------------------------------------------

    @property
    def ok(self) -> bool:
        return self._ok

    def fixed_value(self, lit: int) -> Optional[bool]:
        """Value of lit if fixed at level 0, else None."""
        il = self._ilit(lit)
        val = self._value(il)
        return None if val < 0 else bool(val)

    @property
    def n_original_clauses(self) -> int:
        return len(self._original)

    def original_clauses(self) -> list:
        return [list(c) for c in self._original]

    def edges(self) -> list:
        return [(self._plit(il), u, v) for il, u, v in self._edges]

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.nv} {len(self._original)}"]
        for g in self._amo_groups:
            lines.append("c amo " + " ".join(map(str, g)))
        for il, u, v in self._edges:
            lines.append(f"c edge {self._plit(il)} {u} {v}")
        for cl in self._original:
            lines.append(" ".join(map(str, cl)) + " 0")
        return "\n".join(lines) + "\n"
