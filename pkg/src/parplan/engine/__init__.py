"""Incremental propositional constraint engine."""

from .core import Engine, SolveOutcome, SolveStats, Status, amo_clauses, luby

__all__ = ["Engine", "SolveOutcome", "SolveStats", "Status", "amo_clauses", "luby"]
