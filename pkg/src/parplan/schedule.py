"""Horizon scheduling: algorithms S, A(n) and B(gamma).

A schedule hands out (horizon, grant) pairs and is told what happened.  The
grant is measured in slices (a float); None means "run to completion".  The
caller reports the amount actually spent and a verdict: "sat", "unsat" or
"running" (budget used up without an answer).

    S       one horizon at a time, smallest first, no budget.
    A(n)    the n smallest unfinished horizons share time round-robin, one
            slice each per round.  The set of horizons of a round is fixed
            when the round starts, so a horizon replacing a finished one waits
            for the next round.
    B(g)    horizon h_min (the smallest unfinished one) gets one slice per
            round.  After that every later horizon h_min + i*inc is topped up
            to ceil(spent(h_min) * g**i) slices, as long as that target is at
            least the threshold.  Top-ups go in ascending order.

UNSAT at horizon h implies UNSAT at every smaller horizon (idle steps let a
short plan be padded), so smaller horizons are closed as well.

`simulate` drives a schedule with a scripted cost function instead of an
engine; it is what the scheduler tests use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import UsageError

PENDING = "pending"
RUNNING = "running"
UNSAT = "unsat"
SAT = "sat"

_EPS = 1e-9


@dataclass
class HorizonEntry:
    status: str = PENDING
    spent: float = 0.0


class Schedule:
    def __init__(self, algorithm: str = "B", n: int = 16, gamma: float = 0.9, increment: int = 5,
                 threshold: float = 1.0, cap: Optional[int] = None, start: int = 0):
        algorithm = algorithm.upper()
        if algorithm not in ("S", "A", "B"):
            raise UsageError(f"unknown algorithm {algorithm!r}")
        if n < 1:
            raise UsageError("n must be at least 1")
        if not 0.0 < gamma < 1.0:
            raise UsageError("gamma must lie strictly between 0 and 1")
        if increment < 1:
            raise UsageError("increment must be at least 1")
        self.algorithm = algorithm
        self.n = n
        self.gamma = gamma
        self.increment = increment
        self.threshold = threshold
        self.cap = cap
        self.start = start
        self.ledger: dict = {}
        self.result: Optional[int] = None
        self._round: list = []
        self._frontier_i = 0      # B: next frontier offset to look at; 0 = h_min's turn
        self._anchor = None

    # -- horizons ----------------------------------------------------------------

    def horizon(self, k: int) -> int:
        return self.start + k * self.increment

    def _ok(self, h):
        return self.cap is None or h <= self.cap

    def entry(self, h) -> HorizonEntry:
        e = self.ledger.get(h)
        if e is None:
            e = self.ledger[h] = HorizonEntry()
        return e

    def finished(self, h) -> bool:
        e = self.ledger.get(h)
        return e is not None and e.status in (SAT, UNSAT)

    def h_min(self) -> Optional[int]:
        k = 0
        while True:
            h = self.horizon(k)
            if not self._ok(h):
                return None
            if not self.finished(h):
                return h
            k += 1

    def _unfinished(self, count):
        out = []
        k = 0
        while len(out) < count:
            h = self.horizon(k)
            if not self._ok(h):
                break
            if not self.finished(h):
                out.append(h)
            k += 1
        return out

    @property
    def done(self) -> bool:
        return self.result is not None or self.h_min() is None

    @property
    def exhausted(self) -> bool:
        return self.result is None and self.h_min() is None

    # -- ticks -------------------------------------------------------------------

    def next_tick(self):
        """Next (horizon, grant) or None when the run is over."""
        if self.done:
            return None
        if self.algorithm == "S":
            return self.h_min(), None
        if self.algorithm == "A":
            while True:
                while self._round and self.finished(self._round[0]):
                    self._round.pop(0)
                if self._round:
                    return self._round.pop(0), 1.0
                self._round = self._unfinished(self.n)
        return self._next_b()

    def _next_b(self):
        hmin = self.h_min()
        if self._frontier_i > 0 and hmin != self._anchor:
            self._frontier_i = 0
        if self._frontier_i > 0:
            s = self.entry(hmin).spent
            i = self._frontier_i
            while True:
                raw = s * self.gamma ** i
                if raw < self.threshold - _EPS:
                    break
                h = hmin + i * self.increment
                i += 1
                if not self._ok(h):
                    break
                if self.finished(h):
                    continue
                want = math.ceil(raw - _EPS) - self.entry(h).spent
                if want > _EPS:
                    self._frontier_i = i
                    return h, want
            self._frontier_i = 0
        self._frontier_i = 1
        self._anchor = hmin
        return hmin, 1.0

    def feed(self, h: int, spent: float, verdict: str) -> None:
        if verdict not in (SAT, UNSAT, RUNNING):
            raise UsageError(f"unknown verdict {verdict!r}")
        e = self.entry(h)
        e.spent += spent
        if verdict == RUNNING:
            e.status = RUNNING
            return
        e.status = verdict
        if verdict == SAT:
            self.result = h
            return
        k = 0
        while self.horizon(k) < h:
            lower = self.entry(self.horizon(k))
            if lower.status != SAT:
                lower.status = UNSAT
            k += 1

    @property
    def total_spent(self) -> float:
        return sum(e.spent for e in self.ledger.values())


@dataclass
class SimResult:
    horizon: Optional[int]
    total: float
    spent: dict
    ticks: list = field(default_factory=list)
    final_grant: Optional[float] = None


def simulate(schedule: Schedule, cost: Callable[[int], tuple], max_ticks: int = 10_000_000) -> SimResult:
    """Run schedule against cost(h) -> (verdict, total cost in slices)."""
    spent: dict = {}
    ticks = []
    for _ in range(max_ticks):
        tick = schedule.next_tick()
        if tick is None:
            break
        h, grant = tick
        verdict, c = cost(h)
        used = spent.get(h, 0.0)
        step = c - used if grant is None else min(grant, c - used)
        spent[h] = used + step
        ticks.append((h, step))
        schedule.feed(h, step, verdict if spent[h] >= c - _EPS else RUNNING)
    else:
        raise RuntimeError("simulation did not terminate")
    total = sum(spent.values())
    h = schedule.result
    return SimResult(h, total, spent, ticks, None if h is None else spent[h])
