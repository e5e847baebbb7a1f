"""Reader and writer for the ground-task fact format.

The writer emits one fact per line in a fixed order: fluent/1, value/2,
init/2, goal/2, action/1, prec/3, post/3, mutex/3.  Inside each block facts
follow fluent or action ordinal and then domain order, so the output is a
canonical form of the task.  Symbols that are not made of [a-z0-9_] are
written as double-quoted strings.

The reader accepts any layout (several facts per line, `%` comments).
"""

from __future__ import annotations

import re

from .errors import FactFormatError, StructuralError
from .model import Action, Fluent, PartialState, PlanningTask

_PLAIN = re.compile(r"[a-z0-9_]+\Z")
_ARITY = {"fluent": 1, "value": 2, "init": 2, "goal": 2, "action": 1, "prec": 3, "post": 3, "mutex": 3}


def quote(sym) -> str:
    sym = str(sym)
    if _PLAIN.match(sym):
        return sym
    return '"' + sym.replace("\\", "\\\\").replace('"', '\\"') + '"'


def write_facts(task: PlanningTask) -> str:
    fl = task.fluents
    out = []
    for f in fl:
        out.append(f"fluent({quote(f.name)}).")
    for f in fl:
        q = quote(f.name)
        for v in f.domain:
            out.append(f"value({q},{quote(v)}).")
    for f, v in zip(fl, task.init):
        out.append(f"init({quote(f.name)},{quote(f.domain[v])}).")
    for x, v in task.goal.items():
        out.append(f"goal({quote(fl[x].name)},{quote(fl[x].domain[v])}).")
    for a in task.actions:
        out.append(f"action({quote(a.name)}).")
    for kind in ("pre", "post"):
        tag = "prec" if kind == "pre" else "post"
        for a in task.actions:
            qa = quote(a.name)
            for x, v in getattr(a, kind).items():
                out.append(f"{tag}({qa},{quote(fl[x].name)},{quote(fl[x].domain[v])}).")
    for gi, group in enumerate(task.mutex_groups):
        for x, v in group:
            out.append(f"mutex(g{gi},{quote(fl[x].name)},{quote(fl[x].domain[v])}).")
    return "".join(line + "\n" for line in out)


# -- reading -------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<str>"(?:[^"\\\n]|\\.)*")
  | (?P<sym>[A-Za-z0-9_'\-]+)
  | (?P<punct>[(),.])
""", re.VERBOSE)


def _tokens(text):
    pos, line, col0 = 0, 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            raise FactFormatError(f"unexpected character {text[pos]!r}", line, pos - col0 + 1)
        kind = m.lastgroup
        val = m.group()
        if kind not in ("ws", "comment"):
            if kind == "str":
                val = re.sub(r"\\(.)", r"\1", val[1:-1])
            yield kind, val, line, pos - col0 + 1
        nl = val.count("\n") if kind == "ws" else 0
        if nl:
            line += nl
            col0 = m.start() + m.group().rfind("\n") + 1
        pos = m.end()


def parse_fact_atoms(text):
    """Yield (predicate, args, line, col) for every fact in text."""
    toks = list(_tokens(text))
    i = 0
    while i < len(toks):
        kind, name, line, col = toks[i]
        if kind != "sym":
            raise FactFormatError(f"expected a predicate name, got {name!r}", line, col)
        i += 1
        args = []
        if i < len(toks) and toks[i][1] == "(" and toks[i][0] == "punct":
            i += 1
            while True:
                if i >= len(toks):
                    raise FactFormatError("unterminated argument list", line, col)
                k, v, l2, c2 = toks[i]
                if k not in ("sym", "str"):
                    raise FactFormatError(f"expected an argument, got {v!r}", l2, c2)
                args.append(v)
                i += 1
                if i >= len(toks):
                    raise FactFormatError("unterminated argument list", line, col)
                k, v, l2, c2 = toks[i]
                i += 1
                if v == ")" and k == "punct":
                    break
                if v != "," or k != "punct":
                    raise FactFormatError(f"expected ',' or ')', got {v!r}", l2, c2)
        if i >= len(toks) or toks[i][:2] != ("punct", "."):
            where = toks[i][2:] if i < len(toks) else (line, col)
            raise FactFormatError("fact not terminated by '.'", *where)
        i += 1
        yield name, tuple(args), line, col


def read_facts(text: str) -> PlanningTask:
    fluents: dict = {}
    values: dict = {}
    init: dict = {}
    goal: dict = {}
    actions: dict = {}
    pre: dict = {}
    post: dict = {}
    groups: dict = {}
    deferred = []
    for pred, args, line, col in parse_fact_atoms(text):
        if pred not in _ARITY:
            raise FactFormatError(f"unknown predicate {pred}/{len(args)}", line, col)
        if len(args) != _ARITY[pred]:
            raise FactFormatError(f"{pred} expects {_ARITY[pred]} arguments, got {len(args)}", line, col)
        if pred == "fluent":
            fluents.setdefault(args[0], len(fluents))
            values.setdefault(args[0], [])
        elif pred == "action":
            actions.setdefault(args[0], len(actions))
        else:
            deferred.append((pred, args, line, col))

    if not fluents:
        raise FactFormatError("no fluents declared")

    for pred, args, line, col in deferred:
        if pred == "value":
            if args[0] not in fluents:
                raise FactFormatError(f"value for undeclared fluent {args[0]!r}", line, col)
            if args[1] not in values[args[0]]:
                values[args[0]].append(args[1])

    def fv(f, v, line, col):
        if f not in fluents:
            raise FactFormatError(f"undeclared fluent {f!r}", line, col)
        if v not in values[f]:
            raise FactFormatError(f"undeclared value {v!r} for fluent {f!r}", line, col)
        return fluents[f], values[f].index(v)

    def bind(table, key, f, v, line, col, what):
        x, i = fv(f, v, line, col)
        d = table.setdefault(key, {})
        if d.get(x, i) != i:
            raise FactFormatError(f"conflicting {what} values for fluent {f!r}", line, col)
        d[x] = i

    for pred, args, line, col in deferred:
        if pred in ("init", "goal"):
            bind({"": init if pred == "init" else goal}, "", args[0], args[1], line, col, pred)
        elif pred in ("prec", "post"):
            if args[0] not in actions:
                raise FactFormatError(f"{pred} refers to undeclared action {args[0]!r}", line, col)
            bind(pre if pred == "prec" else post, args[0], args[1], args[2], line, col, pred)
        elif pred == "mutex":
            x, i = fv(args[1], args[2], line, col)
            g = groups.setdefault(args[0], [])
            if (x, i) not in g:
                g.append((x, i))

    names = list(fluents)
    missing = [n for n in names if fluents[n] not in init]
    if missing:
        raise FactFormatError(f"initial state is not total: missing init for {', '.join(missing)}")
    try:
        fl = tuple(Fluent(n, tuple(values[n])) for n in names)
        acts = tuple(Action(a, PartialState(pre.get(a, {})), PartialState(post.get(a, {}))) for a in actions)
        return PlanningTask(fl, tuple(init[i] for i in range(len(names))), PartialState(goal), acts,
                            tuple(groups.values()))
    except StructuralError as e:
        raise FactFormatError(str(e)) from e
