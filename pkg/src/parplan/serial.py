"""Serializability checks for parallel steps and the plan validator.

An action a *invalidates* a' (edge a -> a') when a' has a precondition on
some fluent x that a also writes, and a writes a different value.  In any
serialization a' has to come before a, because after a the precondition of
a' can never hold again: every other writer of x writes the same value
(confluence).

All deciders take action ordinals (or names) and a dense state tuple.  Ties
are broken by ascending action ordinal everywhere, so witnesses are
deterministic.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .errors import StructuralError, UsageError
from .model import (SEMANTICS, PlanningTask, StepPlan, apply_sequence, check_goal, is_confluent,
                    parallel_update)

ORACLE_LIMIT = 8


class CheckResult(NamedTuple):
    ok: bool
    witness: Optional[list]
    non_ready: frozenset = frozenset()


def invalidation_graph(task: PlanningTask, A) -> dict:
    """Edges a -> {a'} restricted to A, one edge per ordered pair."""
    acts = task.resolve_actions(A)
    g = {a: set() for a in acts}
    for a in acts:
        post = task.actions[a].post
        for b in acts:
            if a == b:
                continue
            for x, v in task.actions[b].pre.items():
                w = post.get(x)
                if w is not None and w != v:
                    g[a].add(b)
                    break
    return g


def _pre_holds(task, s, acts):
    return all(s[x] == v for a in acts for x, v in task.actions[a].pre.items())


def check_forall(task: PlanningTask, s, A) -> bool:
    acts = task.resolve_actions(A)
    if not is_confluent(task, acts) or not _pre_holds(task, s, acts):
        return False
    for a in acts:
        pre = task.actions[a].pre
        for b in acts:
            if a == b:
                continue
            for x, v in task.actions[b].post.items():
                if x in pre and pre[x] != v:
                    return False
    return True


def _order_by_graph(acts, g):
    """Kahn-style order: an action is placed once everything it invalidates is placed.

    Returns (order, unplaced set).
    """
    remaining = {a: len(g[a]) for a in acts}
    preds = {a: [] for a in acts}
    for a in acts:
        for b in g[a]:
            preds[b].append(a)
    heap = [a for a in acts if remaining[a] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        b = heapq.heappop(heap)
        order.append(b)
        for a in preds[b]:
            remaining[a] -= 1
            if remaining[a] == 0:
                heapq.heappush(heap, a)
    return order, frozenset(a for a in acts if a not in set(order))


def check_exists(task: PlanningTask, s, A) -> CheckResult:
    """Preconditions hold in s and the invalidation graph is acyclic."""
    acts = task.resolve_actions(A)
    if not is_confluent(task, acts) or not _pre_holds(task, s, acts):
        return CheckResult(False, None, frozenset(acts))
    order, stuck = _order_by_graph(acts, invalidation_graph(task, acts))
    if stuck:
        return CheckResult(False, None, stuck)
    return CheckResult(True, order)


def exists_fixpoint(task: PlanningTask, s, A) -> CheckResult:
    """The apply/ready least fixpoint for plain exists-step semantics.

    An action of A becomes applied when its precondition holds in s and every
    action of A it invalidates is already applied.  Actions outside A are
    ready from the start.  Independent of check_exists on purpose.
    """
    acts = task.resolve_actions(A)
    if not is_confluent(task, acts):
        return CheckResult(False, None, frozenset(acts))
    inA = set(acts)
    applied = []
    ready = set()
    changed = True
    while changed:
        changed = False
        for a in acts:
            if a in ready:
                continue
            act = task.actions[a]
            if any(s[x] != v for x, v in act.pre.items()):
                continue
            blocked = False
            for b in acts:
                if b == a or b in ready:
                    continue
                for x, v in task.actions[b].pre.items():
                    w = act.post.get(x)
                    if w is not None and w != v:
                        blocked = True
                        break
                if blocked:
                    break
            if not blocked:
                ready.add(a)
                applied.append(a)
                changed = True
                break
    stuck = frozenset(inA - ready)
    if stuck:
        return CheckResult(False, None, stuck)
    return CheckResult(True, applied)


def check_relaxed(task: PlanningTask, s, A) -> CheckResult:
    """Relaxed exists-step fixpoint: preconditions may be produced within the step.

    reach starts as the facts of s and grows with the postconditions of
    applied actions.  The smallest applicable action is applied first, so the
    derivation order is the witness.
    """
    acts = task.resolve_actions(A)
    if not is_confluent(task, acts):
        return CheckResult(False, None, frozenset(acts))
    reach = set(enumerate(s))
    ready = set()
    order = []
    progress = True
    while progress:
        progress = False
        for a in acts:
            if a in ready:
                continue
            act = task.actions[a]
            if any((x, v) not in reach for x, v in act.pre.items()):
                continue
            ok = True
            for b in acts:
                if b == a or b in ready:
                    continue
                pre_b = task.actions[b].pre
                if any(x in pre_b and pre_b[x] != w for x, w in act.post.items()):
                    ok = False
                    break
            if ok:
                ready.add(a)
                order.append(a)
                reach.update(act.post.items())
                progress = True
                break
    stuck = frozenset(set(acts) - ready)
    if stuck:
        return CheckResult(False, None, stuck)
    return CheckResult(True, order)


def oracle_serializable(task: PlanningTask, s, A, semantics: str) -> bool:
    """Brute force over all permutations; the literal definitions."""
    acts = task.resolve_actions(A)
    if len(acts) > ORACLE_LIMIT:
        raise UsageError(f"oracle limited to {ORACLE_LIMIT} actions, got {len(acts)}")
    if semantics not in ("forall", "exists", "relaxed"):
        raise UsageError(f"unknown semantics {semantics!r}")
    if not is_confluent(task, acts):
        return False
    defined = [apply_sequence(task, s, p) is not None for p in itertools.permutations(acts)]
    if semantics == "relaxed":
        return any(defined)
    pre_ok = _pre_holds(task, s, acts)
    if semantics == "forall":
        return pre_ok and all(defined)
    return pre_ok and any(defined)


# -- plan validation -----------------------------------------------------------


@dataclass
class ValidationReport:
    valid: bool
    step: Optional[int] = None
    reason: Optional[str] = None
    detail: str = ""
    sequential: list = field(default_factory=list)
    states: list = field(default_factory=list)

    def line(self) -> str:
        if self.valid:
            return f"VALID steps={len(self.states) - 1} actions={len(self.sequential)}"
        return f"INVALID step={self.step} reason={self.reason}"


def check_step(task: PlanningTask, s, acts, semantics: str) -> CheckResult:
    if semantics == "sequential":
        if len(acts) > 1:
            return CheckResult(False, None, frozenset(acts))
        return check_exists(task, s, acts)
    if semantics == "forall":
        if check_forall(task, s, acts):
            return CheckResult(True, list(acts))
        return CheckResult(False, None, frozenset(acts))
    if semantics == "exists":
        return check_exists(task, s, acts)
    if semantics == "relaxed":
        return check_relaxed(task, s, acts)
    raise UsageError(f"unknown semantics {semantics!r}")


def _failure_reason(task, s, acts, semantics):
    if not is_confluent(task, acts):
        return "nonconfluent"
    if semantics == "sequential" and len(acts) > 1:
        return "parallel"
    if semantics != "relaxed" and not _pre_holds(task, s, acts):
        return "precondition"
    if semantics == "forall":
        return "interference"
    if semantics == "exists" or semantics == "sequential":
        return "cycle"
    return "not-serializable"


def validate_plan(task: PlanningTask, plan: StepPlan, semantics: Optional[str] = None) -> ValidationReport:
    """Walk the plan with the parallel-update rule, checking each step.

    semantics overrides the one the plan claims (plans read from files carry
    no claim of their own)."""
    sem = semantics or plan.semantics
    if sem not in SEMANTICS:
        raise UsageError(f"unknown semantics {sem!r}")
    steps = [task.resolve_actions(step) for step in plan.steps]
    for step, raw in zip(steps, plan.steps):
        if len(step) != len(set(raw)):
            raise StructuralError("duplicate action in a plan step")
    s = task.init
    states = [s]
    seq = []
    for i, acts in enumerate(steps, start=1):
        res = check_step(task, s, acts, sem)
        if not res.ok:
            reason = _failure_reason(task, s, acts, sem)
            names = " ".join(task.actions[a].name for a in sorted(res.non_ready or acts))
            return ValidationReport(False, i, reason, f"step {i} not {sem}: {names}",
                                    [task.actions[a].name for a in seq], states)
        seq.extend(res.witness)
        s = parallel_update(task, s, acts)
        states.append(s)
    if not check_goal(s, task.goal):
        return ValidationReport(False, len(steps), "goal", "goal not satisfied in the final state",
                                [task.actions[a].name for a in seq], states)
    return ValidationReport(True, sequential=[task.actions[a].name for a in seq], states=states)
