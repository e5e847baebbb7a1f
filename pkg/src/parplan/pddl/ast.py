"""PDDL abstract syntax.

Every node carries a source position that is ignored by equality, so two
trees parsed from differently formatted text compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self):
        return f"{self.line}:{self.col}"


def _pos():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Typed:
    """A name with its type; several types mean (either ...)."""
    name: str
    types: tuple = ("object",)
    pos: Optional[Pos] = _pos()


# -- formulas ------------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple = ()
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Equals:
    left: str
    right: str
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Not:
    arg: object
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class And:
    args: tuple = ()
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Or:
    args: tuple = ()
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Imply:
    lhs: object
    rhs: object
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Forall:
    params: tuple
    body: object
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Exists:
    params: tuple
    body: object
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class When:
    cond: object
    effect: object
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Raw:
    """A construct kept verbatim (numeric expressions, durative parts, ...)."""
    text: str
    category: str
    pos: Optional[Pos] = _pos()


# -- declarations --------------------------------------------------------------


@dataclass(frozen=True)
class PredicateDecl:
    name: str
    params: tuple = ()
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class ActionDecl:
    name: str
    params: tuple = ()
    precondition: object = None
    effect: object = None
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class DerivedDecl:
    head: Atom
    params: tuple
    body: object
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Domain:
    name: str
    requirements: tuple = ()
    types: tuple = ()            # Typed(name, (parent,))
    constants: tuple = ()
    predicates: tuple = ()
    functions: tuple = ()        # Raw
    actions: tuple = ()
    derived: tuple = ()
    extra: tuple = ()            # Raw sections kept verbatim (durative actions, constraints)
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Problem:
    name: str
    domain_name: str
    requirements: tuple = ()
    objects: tuple = ()
    init: tuple = ()             # Atom or Raw
    goal: object = None
    extra: tuple = ()            # Raw (metric, constraints, ...)
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class PddlAst:
    domain: Domain
    problem: Optional[Problem] = None
    unsupported: tuple = field(default=(), compare=False)   # Diagnostic


@dataclass(frozen=True)
class Diagnostic:
    severity: str       # "error" or "warning"
    message: str
    pos: Optional[Pos] = None
    source: str = ""
    category: str = ""

    def format(self, default_source="<input>"):
        src = self.source or default_source
        where = f"{self.pos.line}:{self.pos.col}" if self.pos else "0:0"
        return f"{src}:{where}: {self.severity}: {self.message}"


def free_vars(f, bound=frozenset()):
    """Free variables (names starting with '?') of a formula."""
    if f is None:
        return set()
    if isinstance(f, Atom):
        return {a for a in f.args if a.startswith("?") and a not in bound}
    if isinstance(f, Equals):
        return {a for a in (f.left, f.right) if a.startswith("?") and a not in bound}
    if isinstance(f, Not):
        return free_vars(f.arg, bound)
    if isinstance(f, (And, Or)):
        out = set()
        for a in f.args:
            out |= free_vars(a, bound)
        return out
    if isinstance(f, Imply):
        return free_vars(f.lhs, bound) | free_vars(f.rhs, bound)
    if isinstance(f, (Forall, Exists)):
        return free_vars(f.body, bound | {p.name for p in f.params})
    if isinstance(f, When):
        return free_vars(f.cond, bound) | free_vars(f.effect, bound)
    return set()
