"""Reader for the SAS (version 3) translator output format.

Each variable becomes a fluent whose values are the strings "0", "1", ...
(value names in SAS files are free text and need not be unique, so they are
kept on the document only).  Operator "stack a b" becomes action
"stack(a,b)", the same id the PDDL grounder produces.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .errors import AxiomsUnsupported, ConditionalEffectUnsupported, SasFormatError, StructuralError
from .model import Action, Fluent, PartialState, PlanningTask

log = logging.getLogger(__name__)

SUPPORTED_VERSION = 3


@dataclass
class SasVariable:
    name: str
    axiom_layer: int
    values: list


@dataclass
class SasEffect:
    conditions: list        # [(var, val)]
    var: int
    pre: int                # -1 = any value
    post: int


@dataclass
class SasOperator:
    name: str
    prevail: list           # [(var, val)]
    effects: list
    cost: int
    line: int = 0


@dataclass
class SasDocument:
    version: int
    metric: int
    variables: list
    mutex_groups: list      # [[(var, val), ...]]
    init: list
    goal: list              # [(var, val)]
    operators: list
    axioms: list = field(default_factory=list)      # raw rule blocks (lists of lines)
    opaque: list = field(default_factory=list)      # (section name, lines)
    warnings: list = field(default_factory=list)

    @property
    def has_axioms(self) -> bool:
        return bool(self.axioms) or any(v.axiom_layer != -1 for v in self.variables)

    @property
    def has_conditional_effects(self) -> bool:
        return any(e.conditions for op in self.operators for e in op.effects)


class _Lines:
    def __init__(self, text, source):
        self.lines = text.splitlines()
        self.i = 0
        self.source = source
        self.opaque = []
        self.warnings = []

    def err(self, msg, line=None):
        raise SasFormatError(msg, line if line is not None else self.i, 1, self.source)

    def _raw(self):
        while self.i < len(self.lines):
            s = self.lines[self.i].strip()
            self.i += 1
            if s:
                return s
        self.err("unexpected end of file", len(self.lines))

    def next(self):
        return self._raw()

    def peek_nonempty(self):
        j = self.i
        while j < len(self.lines):
            s = self.lines[j].strip()
            if s:
                return s
            j += 1
        return None

    def skip_unknown(self, known):
        """Swallow unknown begin_X ... end_X blocks at section boundaries."""
        while True:
            s = self.peek_nonempty()
            if s is None or not s.startswith("begin_") or s in known:
                return
            name = s[len("begin_"):]
            self._raw()
            start = self.i
            body = []
            while True:
                t = self._raw()
                if t == "end_" + name:
                    break
                body.append(t)
            self.opaque.append((name, body))
            msg = f"{self.source}:{start}: unknown section {name!r} kept as opaque block"
            log.warning(msg)
            self.warnings.append(msg)

    def expect(self, word):
        s = self.next()
        if s != word:
            self.err(f"expected {word!r}, found {s!r}")

    def int(self, what, lo=None, hi=None):
        s = self.next()
        try:
            v = int(s)
        except ValueError:
            self.err(f"expected an integer ({what}), found {s!r}")
        if (lo is not None and v < lo) or (hi is not None and v >= hi):
            self.err(f"{what} {v} out of range")
        return v

    def ints(self, n, what):
        s = self.next()
        parts = s.split()
        if len(parts) != n:
            self.err(f"expected {n} integers ({what}), found {s!r}")
        try:
            return [int(p) for p in parts]
        except ValueError:
            self.err(f"expected integers ({what}), found {s!r}")


KNOWN = {"begin_version", "begin_metric", "begin_variable", "begin_mutex_group", "begin_state",
         "begin_goal", "begin_operator", "begin_rule"}


def parse_sas(text: str, source: str = "<sas>") -> SasDocument:
    r = _Lines(text, source)
    r.skip_unknown(KNOWN)
    r.expect("begin_version")
    version = r.int("version")
    if version != SUPPORTED_VERSION:
        r.err(f"unsupported SAS version {version} (only version {SUPPORTED_VERSION} is accepted)")
    r.expect("end_version")
    r.skip_unknown(KNOWN)
    r.expect("begin_metric")
    metric = r.int("metric")
    r.expect("end_metric")
    r.skip_unknown(KNOWN)

    nvars = r.int("variable count", 0)
    variables = []
    for _ in range(nvars):
        r.skip_unknown(KNOWN)
        r.expect("begin_variable")
        name = r.next()
        layer = r.int("axiom layer", -1)
        size = r.int("domain size", 1)
        values = [r.next() for _ in range(size)]
        r.expect("end_variable")
        variables.append(SasVariable(name, layer, values))

    def pair(what):
        line = r.i + 1
        v, x = r.ints(2, what)
        if not 0 <= v < nvars:
            r.err(f"{what}: variable {v} out of range", line)
        if not 0 <= x < len(variables[v].values):
            r.err(f"{what}: value {x} out of range for variable {variables[v].name}", line)
        return v, x

    r.skip_unknown(KNOWN)
    ngroups = r.int("mutex group count", 0)
    groups = []
    for _ in range(ngroups):
        r.skip_unknown(KNOWN)
        r.expect("begin_mutex_group")
        k = r.int("group size", 0)
        groups.append([pair("mutex group") for _ in range(k)])
        r.expect("end_mutex_group")

    r.skip_unknown(KNOWN)
    r.expect("begin_state")
    init = []
    for v in range(nvars):
        s = r.next()
        if s == "end_state":
            r.err(f"initial state is not total ({v} of {nvars} values)")
        try:
            x = int(s)
        except ValueError:
            r.err(f"expected an initial value, found {s!r}")
        if not 0 <= x < len(variables[v].values):
            r.err(f"initial value {x} out of range for variable {variables[v].name}")
        init.append(x)
    r.expect("end_state")

    r.skip_unknown(KNOWN)
    r.expect("begin_goal")
    goal = [pair("goal") for _ in range(r.int("goal size", 0))]
    r.expect("end_goal")

    r.skip_unknown(KNOWN)
    nops = r.int("operator count", 0)
    ops = []
    for _ in range(nops):
        r.skip_unknown(KNOWN)
        r.expect("begin_operator")
        line = r.i
        name = r.next()
        prevail = [pair("prevail condition") for _ in range(r.int("prevail count", 0))]
        effects = []
        for _ in range(r.int("effect count", 0)):
            eline = r.i + 1
            parts = r.next().split()
            try:
                nums = [int(p) for p in parts]
            except ValueError:
                r.err("malformed effect line", eline)
            if not nums or len(nums) != 1 + 2 * nums[0] + 3:
                r.err("malformed effect line", eline)
            nc = nums[0]
            conds = [(nums[1 + 2 * j], nums[2 + 2 * j]) for j in range(nc)]
            var, pre, post = nums[1 + 2 * nc:]
            for cv, cx in conds + [(var, post)]:
                if not 0 <= cv < nvars or not 0 <= cx < len(variables[cv].values):
                    r.err("effect refers to an out-of-range variable or value", eline)
            if pre != -1 and not 0 <= pre < len(variables[var].values):
                r.err("effect precondition value out of range", eline)
            effects.append(SasEffect(conds, var, pre, post))
        cost = r.int("operator cost")
        r.expect("end_operator")
        ops.append(SasOperator(name, prevail, effects, cost, line))

    axioms = []
    r.skip_unknown(KNOWN)
    if r.peek_nonempty() is not None:
        nrules = r.int("axiom rule count", 0)
        for _ in range(nrules):
            r.skip_unknown(KNOWN)
            r.expect("begin_rule")
            body = []
            while True:
                t = r.next()
                if t == "end_rule":
                    break
                body.append(t)
            axioms.append(body)
        r.skip_unknown(KNOWN)
    if r.peek_nonempty() is not None:
        r.err(f"trailing content {r.peek_nonempty()!r}", r.i + 1)
    return SasDocument(version, metric, variables, groups, init, goal, ops, axioms, r.opaque, r.warnings)


def operator_id(name: str) -> str:
    parts = name.split()
    if len(parts) == 1:
        return parts[0]
    return f"{parts[0]}({','.join(parts[1:])})"


def to_task(doc: SasDocument, source: str = "<sas>") -> PlanningTask:
    if doc.has_axioms:
        raise AxiomsUnsupported("axioms (derived variables) are not supported", source=source)
    fluents = tuple(Fluent(v.name, tuple(str(i) for i in range(len(v.values)))) for v in doc.variables)
    actions = []
    for op in doc.operators:
        aid = operator_id(op.name)
        pre, post = {}, {}

        def bind(d, v, x, what):
            if d.get(v, x) != x:
                raise SasFormatError(f"operator {op.name!r}: conflicting {what} for variable "
                                     f"{doc.variables[v].name}", op.line, 1, source)
            d[v] = x

        for v, x in op.prevail:
            bind(pre, v, x, "preconditions")
        for e in op.effects:
            if e.conditions:
                raise ConditionalEffectUnsupported(f"operator {op.name!r} has a conditional effect",
                                                   op.line, 1, source)
            if e.pre != -1:
                bind(pre, e.var, e.pre, "preconditions")
            bind(post, e.var, e.post, "effects")
        actions.append(Action(aid, PartialState(pre), PartialState(post)))
    goal = {}
    for v, x in doc.goal:
        if goal.get(v, x) != x:
            raise SasFormatError(f"conflicting goal values for variable {doc.variables[v].name}", source=source)
        goal[v] = x
    try:
        return PlanningTask(fluents, tuple(doc.init), PartialState(goal), tuple(actions),
                            tuple(tuple(g) for g in doc.mutex_groups))
    except StructuralError as e:
        raise SasFormatError(f"inconsistent SAS task: {e}", source=source) from None
