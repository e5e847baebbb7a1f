"""Canonical PDDL printer (2-space indentation)."""

from __future__ import annotations

from .ast import And, Atom, Equals, Exists, Forall, Imply, Not, Or, PddlAst, Raw, When

IND = "  "


def typed_text(items) -> str:
    """Render a typed list.  Consecutive names sharing a type are grouped;
    a group of plain objects is written with '- object' unless it is last,
    since a later '- t' would otherwise capture it."""
    groups = []
    for t in items:
        if groups and groups[-1][0] == t.types:
            groups[-1][1].append(t.name)
        else:
            groups.append((t.types, [t.name]))
    parts = []
    for k, (types, names) in enumerate(groups):
        parts.append(" ".join(names))
        if types == ("object",) and k == len(groups) - 1:
            continue
        ty = types[0] if len(types) == 1 else "(either " + " ".join(types) + ")"
        parts.append("- " + ty)
    return " ".join(parts)


def _inline(f):
    if isinstance(f, Atom):
        return "(" + " ".join((f.pred,) + tuple(f.args)) + ")"
    if isinstance(f, Equals):
        return f"(= {f.left} {f.right})"
    if isinstance(f, Raw):
        return f.text
    if isinstance(f, Not) and isinstance(f.arg, (Atom, Equals, Raw)):
        return f"(not {_inline(f.arg)})"
    if isinstance(f, (And, Or)) and not f.args:
        return "(and)" if isinstance(f, And) else "(or)"
    return None


def formula_lines(f, depth: int) -> list:
    pad = IND * depth
    s = _inline(f)
    if s is not None:
        return [pad + s]
    if isinstance(f, (And, Or)):
        head, kids = ("and" if isinstance(f, And) else "or"), f.args
    elif isinstance(f, Not):
        head, kids = "not", (f.arg,)
    elif isinstance(f, Imply):
        head, kids = "imply", (f.lhs, f.rhs)
    elif isinstance(f, (Forall, Exists)):
        head = ("forall" if isinstance(f, Forall) else "exists") + " (" + typed_text(f.params) + ")"
        kids = (f.body,)
    elif isinstance(f, When):
        head, kids = "when", (f.cond, f.effect)
    else:
        raise TypeError(f"cannot print {f!r}")
    lines = [pad + "(" + head]
    for k in kids:
        lines.extend(formula_lines(k, depth + 1))
    lines[-1] += ")"
    return lines


def _section(name, body_lines, depth=1):
    pad = IND * depth
    if not body_lines:
        return [pad + f"({name})"]
    out = [pad + f"({name}"] + body_lines
    out[-1] += ")"
    return out


def beautify_domain(d) -> str:
    out = [f"(define (domain {d.name})"]
    if d.requirements:
        out.append(IND + "(:requirements " + " ".join(d.requirements) + ")")
    if d.types:
        out += _section(":types", [IND * 2 + typed_text(d.types)])
    if d.constants:
        out += _section(":constants", [IND * 2 + typed_text(d.constants)])
    if d.predicates:
        lines = []
        for p in d.predicates:
            rest = typed_text(p.params)
            lines.append(IND * 2 + "(" + p.name + (" " + rest if rest else "") + ")")
        out += _section(":predicates", lines)
    for r in d.functions:
        out.append(IND + r.text)
    for a in d.actions:
        out.append(IND + f"(:action {a.name}")
        out.append(IND * 2 + ":parameters (" + typed_text(a.params) + ")")
        if a.precondition is not None:
            out.append(IND * 2 + ":precondition")
            out += formula_lines(a.precondition, 3)
        if a.effect is not None:
            out.append(IND * 2 + ":effect")
            out += formula_lines(a.effect, 3)
        out[-1] += ")"
    for x in d.derived:
        rest = typed_text(x.params)
        out.append(IND + f"(:derived ({x.head.pred}" + (" " + rest if rest else "") + ")")
        out += formula_lines(x.body, 2)
        out[-1] += ")"
    for r in d.extra:
        out.append(IND + r.text)
    out[-1] += ")"
    return "\n".join(out) + "\n"


def beautify_problem(p) -> str:
    out = [f"(define (problem {p.name})", IND + f"(:domain {p.domain_name})"]
    if p.requirements:
        out.append(IND + "(:requirements " + " ".join(p.requirements) + ")")
    if p.objects:
        out += _section(":objects", [IND * 2 + typed_text(p.objects)])
    init = []
    for f in p.init:
        init += formula_lines(f, 2)
    out += _section(":init", init)
    if p.goal is not None:
        out += _section(":goal", formula_lines(p.goal, 2))
    for r in p.extra:
        out.append(IND + r.text)
    out[-1] += ")"
    return "\n".join(out) + "\n"


def beautify(ast: PddlAst):
    """Return (domain text, problem text or None)."""
    prob = beautify_problem(ast.problem) if ast.problem is not None else None
    return beautify_domain(ast.domain), prob
