"""Lowering of a normalized AST to schema form, plus the syntax checker."""

from __future__ import annotations

from ..errors import InputError, ResidualConstruct
from ..grounder import ActionSchema, EqualityTest, Literal, SchemaTask
from .ast import And, Atom, Diagnostic, Equals, Exists, Forall, Not, Or, PddlAst, Pos, Raw, When
from .normalize import normalize
from .parser import parse_pddl

_KIND = {Or: "disjunction", Exists: "existential quantifier", Forall: "universal quantifier",
         When: "conditional effect", Raw: "numeric or temporal expression"}


class _Sink:
    """Raises on the first problem, or collects diagnostics when asked to."""

    def __init__(self, collect, source):
        self.collect = collect
        self.source = source
        self.diags = []

    def residual(self, category, node, what=""):
        pos = getattr(node, "pos", None)
        msg = f"unsupported: {category}" + (f" in {what}" if what else "")
        if not self.collect:
            err = ResidualConstruct(category, msg, pos.line if pos else None, pos.col if pos else None)
            err.source = self.source or None
            raise err
        self.diags.append(Diagnostic("warning", msg, pos, self.source, category))


def _category(node):
    if isinstance(node, Raw):
        return node.category
    if isinstance(node, Not) and isinstance(node.arg, Exists):
        return "universal quantifier"
    return _KIND.get(type(node), type(node).__name__.lower())


def _conjuncts(f, sink, what):
    lits, eqs = [], []
    if f is None:
        return lits, eqs
    todo = [f]
    while todo:
        g = todo.pop(0)
        if isinstance(g, And):
            todo[0:0] = list(g.args)
        elif isinstance(g, Atom):
            lits.append(Literal(g.pred, g.args, True))
        elif isinstance(g, Not) and isinstance(g.arg, Atom):
            lits.append(Literal(g.arg.pred, g.arg.args, False))
        elif isinstance(g, Equals):
            eqs.append(EqualityTest(g.left, g.right, True))
        elif isinstance(g, Not) and isinstance(g.arg, Equals):
            eqs.append(EqualityTest(g.arg.left, g.arg.right, False))
        else:
            sink.residual(_category(g), g, what)
    return lits, eqs


def _effects(e, sink, what):
    out = []
    if e is None:
        return out
    todo = [e]
    while todo:
        g = todo.pop(0)
        if isinstance(g, And):
            todo[0:0] = list(g.args)
        elif isinstance(g, Atom):
            out.append(Literal(g.pred, g.args, True))
        elif isinstance(g, Not) and isinstance(g.arg, Atom):
            out.append(Literal(g.arg.pred, g.arg.args, False))
        elif isinstance(g, Forall):
            sink.residual("quantified effect", g, what)
        else:
            sink.residual(_category(g), g, what)
    return out


def lower_to_schemas(ast: PddlAst, collect: bool = False, source: str = ""):
    """Lower a normalized AST.  With collect=True returns (SchemaTask or None,
    diagnostics) instead of raising on the first residual construct."""
    sink = _Sink(collect, source)
    d = ast.domain
    for f in d.functions:
        sink.residual(f.category, f, "domain")
    for x in d.derived:
        sink.residual("derived predicate", x, f"derived {x.head.pred}")
    for x in d.extra:
        sink.residual(x.category, x, "domain")
    types = {}
    for t in d.types:
        types.setdefault(t.name, ())
        types[t.name] = tuple(dict.fromkeys(types[t.name] + t.types))
    actions = []
    for a in d.actions:
        what = f"action {a.name}"
        pre, eq = _conjuncts(a.precondition, sink, what)
        eff = _effects(a.effect, sink, what)
        actions.append(ActionSchema(a.name, tuple((p.name, p.types) for p in a.params), tuple(pre), tuple(eq),
                                    tuple(eff)))
    objects = [(c.name, c.types) for c in d.constants]
    init = set()
    goal, goal_eq = (), ()
    p = ast.problem
    if p is not None:
        seen = {n for n, _ in objects}
        for o in p.objects:
            if o.name not in seen:
                objects.append((o.name, o.types))
                seen.add(o.name)
        for f in p.init:
            if isinstance(f, Atom):
                init.add((f.pred, f.args))
            elif isinstance(f, Not):
                continue          # closed world
            else:
                sink.residual(_category(f), f, "initial state")
        for x in p.extra:
            if x.category == "metric":
                # ignored rather than lowered; always reported
                sink.diags.append(Diagnostic("warning", "unsupported: metric (ignored)", x.pos, source, "metric"))
            else:
                sink.residual(x.category, x, "problem")
        g, ge = _conjuncts(p.goal, sink, "goal")
        goal, goal_eq = tuple(g), tuple(ge)
    preds = tuple((pd.name, tuple(t.types for t in pd.params)) for pd in d.predicates)
    try:
        st = SchemaTask(preds, types, tuple(objects), tuple(actions), frozenset(init), goal, goal_eq,
                        warnings=tuple(sink.diags))
    except InputError as e:
        if not collect:
            raise
        sink.diags.append(Diagnostic("error", str(e), None, source, "input"))
        st = None
    if collect:
        return (None if any(x.category != "metric" for x in sink.diags) else st), sink.diags
    return st


def check_syntax(domain_text: str, problem_text: str = None, domain_source: str = "domain",
                 problem_source: str = "problem") -> list:
    """Parse errors and unsupported-construct warnings; empty when the pair
    lies inside the supported fragment.  Warnings are reported once per
    category, at the first place the category shows up."""
    try:
        ast = parse_pddl(domain_text, problem_text, domain_source, problem_source)
    except InputError as e:
        src = e.source or domain_source
        pos = Pos(e.line, e.col or 0) if e.line is not None else None
        return [Diagnostic("error", e.args[0], pos, src, "syntax")]
    _, diags = lower_to_schemas(normalize(ast), collect=True, source=domain_source)
    out = []
    seen = set()
    for dg in list(ast.unsupported) + list(diags):
        if dg.severity == "error":
            out.append(dg)
            continue
        if dg.category in seen:
            continue
        seen.add(dg.category)
        out.append(Diagnostic("warning", f"unsupported: {dg.category}", dg.pos, dg.source, dg.category))
    return out
