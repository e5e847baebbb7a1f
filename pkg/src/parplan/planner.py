"""Multishot planning driver.

One engine and one incremental encoding are shared by all horizons; the
schedule decides which horizon gets the next conflict budget.  A horizon is
probed by assuming its query atom and refuting all others.

Guess-and-check modes solve a weaker encoding and test every step of a
candidate plan afterwards:

    GC_EXISTS + "switch"    on the first rejected step, the forall constraints
                            are added to every step and solving continues
    GC_EXISTS + "nogood"    the set of actions that could not be ordered is
                            forbidden at the failing step (any superset still
                            contains the cycle)
    GC_RELAXED              the exact action set of the failing step is
                            forbidden, together with the values the previous
                            state gave the fluents those actions read
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

from .encoder import HEURISTIC_TOP, Encoding, Mode
from .engine import Engine, Status
from .errors import ParplanError
from .model import PlanningTask, StepPlan, parallel_update
from .schedule import RUNNING, SAT, UNSAT, Schedule
from .serial import ValidationReport, check_relaxed, exists_fixpoint, validate_plan


@dataclass
class PlannerConfig:
    mode: Mode = Mode.EXISTS_ACYC
    algorithm: str = "B"
    n: int = 16
    gamma: float = 0.9
    increment: int = 5
    threshold: float = 1.0
    heuristic: bool = False
    horizon_cap: Optional[int] = 200
    slice_size: int = 512
    seed: int = 0
    gc_strategy: str = "switch"     # GC_EXISTS only: "switch" or "nogood"

    def __post_init__(self):
        self.mode = Mode(self.mode)
        if self.slice_size < 1:
            raise ValueError("slice size must be positive")
        if self.gc_strategy not in ("switch", "nogood"):
            raise ValueError(f"unknown guess-and-check strategy {self.gc_strategy!r}")


@dataclass
class PlanResult:
    status: str                      # "plan" or "exhausted"
    plan: Optional[StepPlan] = None
    horizon: Optional[int] = None
    report: Optional[ValidationReport] = None
    ledger: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.status == "plan"

    def stat_lines(self) -> list:
        lines = [f"{k}={v}" for k, v in self.stats.items()]
        for h in sorted(self.ledger):
            st, c = self.ledger[h]
            lines.append(f"horizon.{h}={st}:{c}")
        return lines


@dataclass
class Verdict:
    accept: bool
    failing: dict = field(default_factory=dict)      # step -> non-ready action ordinals
    witnesses: dict = field(default_factory=dict)    # step -> order


def guess_and_check_round(plan: StepPlan, task: PlanningTask, mode: Mode) -> Verdict:
    """Check every step of a candidate from a guess-and-check encoding."""
    checker = check_relaxed if mode is Mode.GC_RELAXED else exists_fixpoint
    s = task.init
    v = Verdict(True)
    for i, step in enumerate(plan.steps, start=1):
        acts = task.resolve_actions(step)
        res = checker(task, s, acts)
        if res.ok:
            v.witnesses[i] = res.witness
        else:
            v.accept = False
            v.failing[i] = sorted(res.non_ready)
        s = parallel_update(task, s, acts)
    return v


def gc_strategy_step(verdict: Verdict, enc: Encoding, model, strategy: str = "switch") -> str:
    """React to a verdict.  Returns "return", "switch" or "nogood"."""
    if verdict.accept:
        return "return"
    task = enc.task
    if enc.mode is Mode.GC_EXISTS and strategy == "switch":
        enc.enable_forall()
        return "switch"
    for i, bad in verdict.failing.items():
        occ = enc.occurs[i]
        if enc.mode is Mode.GC_EXISTS:
            enc.engine.add_clause([-occ[a] for a in bad])
            continue
        chosen = set(enc.occurring(model, i))
        clause = [-occ[a] if a in chosen else occ[a] for a in range(task.n_actions)]
        read = sorted({x for a in chosen for x in task.actions[a].pre})
        prev = enc.holds[i - 1]
        for x in read:
            val = [v for v, var in enumerate(prev[x]) if model[var]][0]
            clause.append(-prev[x][val])
        enc.engine.add_clause(clause)
    return "nogood"


def attach_heuristic(engine: Engine, enc: Encoding) -> None:
    """Goal-regression hints: holds(x,v,t) := b suggests holds(x,v,t-1) := b first."""

    def on_holds(var, value):
        info = enc.holds_var_info(var)
        if info is None:
            return
        x, v, t = info
        if t == 0:
            return
        engine.set_hint(enc.holds[t - 1][x][v], HEURISTIC_TOP - t, value)

    def register(t):
        if t == 0:
            return
        engine.on_assign([var for per in enc.holds[t] for var in per], on_holds)

    for t in range(1, enc.max_step + 1):
        register(t)
    enc.step_listeners.append(register)


class Planner:
    def __init__(self, task: PlanningTask, config: Optional[PlannerConfig] = None):
        self.task = task
        self.config = config or PlannerConfig()
        self.engine = Engine(seed=self.config.seed)
        self.encoding = Encoding(task, self.engine, self.config.mode)
        if self.config.heuristic:
            attach_heuristic(self.engine, self.encoding)
        c = self.config
        self.schedule = Schedule(c.algorithm, n=c.n, gamma=c.gamma, increment=c.increment,
                                 threshold=c.threshold, cap=c.horizon_cap)
        self.gc_rounds = 0
        self.switched = False

    def run(self) -> PlanResult:
        cfg = self.config
        t0 = time.perf_counter()
        conflicts = {}
        ticks = 0
        result = None
        while result is None:
            tick = self.schedule.next_tick()
            if tick is None:
                break
            ticks += 1
            h, grant = tick
            if h > self.encoding.max_step:
                self.encoding.extend_to(h)
            budget = None if grant is None else max(1, math.ceil(grant * cfg.slice_size - 1e-9))
            out = self.engine.solve(self.encoding.query_assumptions(h), budget)
            used = out.stats.conflicts
            conflicts[h] = conflicts.get(h, 0) + used
            spent = used / cfg.slice_size
            if out.status is Status.UNSAT:
                self.schedule.feed(h, spent, UNSAT)
            elif out.status is Status.BUDGET_EXHAUSTED:
                self.schedule.feed(h, spent, RUNNING)
            else:
                plan = self.encoding.extract_plan(out.model, h)
                if self.encoding.mode in (Mode.GC_EXISTS, Mode.GC_RELAXED):
                    verdict = guess_and_check_round(plan, self.task, self.encoding.mode)
                    action = gc_strategy_step(verdict, self.encoding, out.model, cfg.gc_strategy)
                    if action != "return":
                        self.gc_rounds += 1
                        self.switched |= action == "switch"
                        self.schedule.feed(h, spent, RUNNING)
                        continue
                if self.switched:
                    plan = StepPlan(plan.steps, "forall")
                report = validate_plan(self.task, plan)
                if not report.valid:
                    raise ParplanError(f"internal error: extracted plan fails validation ({report.line()})")
                self.schedule.feed(h, spent, SAT)
                result = (plan, h, report)

        stats = {
            "mode": cfg.mode.value,
            "algorithm": cfg.algorithm,
            "horizons_tried": len(conflicts),
            "ticks": ticks,
            "conflicts": self.engine.total.conflicts,
            "decisions": self.engine.total.decisions,
            "propagations": self.engine.total.propagations,
            "gc_rounds": self.gc_rounds,
            "max_step": self.encoding.max_step,
        }
        ledger = {h: (self.schedule.entry(h).status, conflicts.get(h, 0)) for h in sorted(self.schedule.ledger)}
        if result is None:
            stats["plan_length"] = "none"
            stats["wall_time"] = f"{time.perf_counter() - t0:.3f}"
            return PlanResult("exhausted", ledger=ledger, stats=stats)
        plan, h, report = result
        stats["plan_length"] = h
        stats["plan_actions"] = plan.n_actions
        stats["wall_time"] = f"{time.perf_counter() - t0:.3f}"
        return PlanResult("plan", plan, h, report, ledger, stats)


def plan(task: PlanningTask, config: Optional[PlannerConfig] = None) -> PlanResult:
    return Planner(task, config).run()
