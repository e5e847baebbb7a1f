"""PDDL reader: s-expressions first, then domain/problem structure.

Symbols are case-insensitive and folded to lower case.  Constructs outside
the supported fragment are parsed (kept as Raw nodes where they have no AST
shape of their own) and recorded as unsupported; they only become errors
when the task is lowered.
"""

from __future__ import annotations

from ..errors import PddlSyntaxError
from .ast import (And, Atom, Diagnostic, Domain, Equals, Exists, Forall, Imply, Not, Or,
                  PddlAst, Pos, PredicateDecl, ActionDecl, DerivedDecl, Problem, Raw, Typed, When)

SUPPORTED_REQUIREMENTS = (":strips", ":typing", ":negative-preconditions", ":equality")

# requirement flag -> category of the construct it enables
REQUIREMENT_CATEGORY = {
    ":conditional-effects": "conditional effect",
    ":disjunctive-preconditions": "disjunctive condition",
    ":existential-preconditions": "quantified condition",
    ":universal-preconditions": "quantified condition",
    ":quantified-preconditions": "quantified condition",
    ":derived-predicates": "derived predicate",
    ":numeric-fluents": "numeric fluents",
    ":fluents": "numeric fluents",
    ":object-fluents": "numeric fluents",
    ":action-costs": "numeric fluents",
    ":durative-actions": "durative action",
    ":duration-inequalities": "durative action",
    ":continuous-effects": "durative action",
    ":timed-initial-literals": "durative action",
    ":preferences": "preferences",
    ":constraints": "constraints",
    ":adl": "adl",
}

NUMERIC_COMPARISONS = ("<", ">", "<=", ">=")
NUMERIC_EFFECTS = ("increase", "decrease", "assign", "scale-up", "scale-down")


class Tok(str):
    pos: Pos


class SList(list):
    pos: Pos


def _tok(text, line, col):
    t = Tok(text)
    t.pos = Pos(line, col)
    return t


def read_sexprs(text: str, source: str = ""):
    """Parse text into a list of top-level s-expressions."""
    stack = [SList()]
    opens = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "(":
            lst = SList()
            lst.pos = Pos(line, col)
            stack[-1].append(lst)
            stack.append(lst)
            opens.append(lst.pos)
            i += 1
            col += 1
            continue
        if ch == ")":
            if len(stack) == 1:
                raise PddlSyntaxError("unbalanced ')'", line, col, source)
            stack.pop()
            opens.pop()
            i += 1
            col += 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in "();":
            j += 1
        stack[-1].append(_tok(text[i:j].lower(), line, col))
        col += j - i
        i = j
    if len(stack) > 1:
        p = opens[-1]
        raise PddlSyntaxError("unbalanced '(': missing ')'", p.line, p.col, source)
    return stack[0]


def _is_number(tok) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def sexpr_text(x) -> str:
    if isinstance(x, list):
        return "(" + " ".join(sexpr_text(y) for y in x) + ")"
    return str(x)


def _pos_of(x):
    return getattr(x, "pos", None)


class _Reader:
    def __init__(self, source):
        self.source = source
        self.unsupported: list = []

    def err(self, msg, x=None):
        p = _pos_of(x)
        raise PddlSyntaxError(msg, p.line if p else None, p.col if p else None, self.source)

    def note(self, category, msg, x=None):
        self.unsupported.append(Diagnostic("warning", f"unsupported: {category} ({msg})", _pos_of(x),
                                           self.source, category))

    def expect_list(self, x, what):
        if not isinstance(x, list):
            self.err(f"expected {what}, got {x!r}", x)
        return x

    def expect_sym(self, x, what):
        if isinstance(x, list):
            self.err(f"expected {what}, got a list", x)
        return str(x)

    def typed_list(self, items, variables=None):
        """'a b - t c' -> [Typed(a,t), Typed(b,t), Typed(c,object)]."""
        out = []
        pending = []
        i = 0
        while i < len(items):
            x = items[i]
            if not isinstance(x, list) and x == "-":
                if i + 1 >= len(items):
                    self.err("type expected after '-'", x)
                if not pending:
                    self.err("'-' without names before it", x)
                t = items[i + 1]
                if isinstance(t, list):
                    if not t or t[0] != "either":
                        self.err("expected a type name or (either ...)", t)
                    types = tuple(self.expect_sym(y, "type name") for y in t[1:])
                    if not types:
                        self.err("empty (either)", t)
                else:
                    types = (str(t),)
                out.extend(Typed(str(p), types, p.pos) for p in pending)
                pending = []
                i += 2
                continue
            name = self.expect_sym(x, "name")
            if variables is True and not name.startswith("?"):
                self.err(f"expected a variable, got {name!r}", x)
            if variables is False and name.startswith("?"):
                self.err(f"unexpected variable {name!r}", x)
            pending.append(x)
            i += 1
        out.extend(Typed(str(p), ("object",), p.pos) for p in pending)
        return tuple(out)


class _Scope:
    """Symbol tables used to check references while building formulas."""

    def __init__(self, predicates, objects, types):
        self.predicates = predicates   # name -> arity
        self.objects = objects         # set of names
        self.types = types             # set of names


def _check_types(rd, typed, scope, what):
    for t in typed:
        for ty in t.types:
            if ty not in scope.types:
                rd.err(f"undeclared type {ty!r} in {what}", t)


def _term(rd, x, scope, bound):
    s = rd.expect_sym(x, "term")
    if s.startswith("?"):
        if s not in bound:
            rd.err(f"unbound variable {s!r}", x)
    elif s not in scope.objects:
        rd.err(f"undeclared object or constant {s!r}", x)
    return s


def _atom(rd, x, scope, bound):
    if not x:
        rd.err("empty formula", x)
    name = rd.expect_sym(x[0], "predicate name")
    if name not in scope.predicates:
        rd.err(f"undeclared predicate {name!r}", x[0])
    args = tuple(_term(rd, a, scope, bound) for a in x[1:])
    if len(args) != scope.predicates[name]:
        rd.err(f"arity mismatch: {name} expects {scope.predicates[name]} arguments, got {len(args)}", x)
    return Atom(name, args, x.pos)


def parse_condition(rd, x, scope, bound):
    if not isinstance(x, list):
        rd.err(f"expected a formula, got {x!r}", x)
    if not x:
        return And((), x.pos)
    head = x[0]
    if isinstance(head, list):
        rd.err("expected a connective or predicate name", head)
    if head == "and":
        return And(tuple(parse_condition(rd, y, scope, bound) for y in x[1:]), x.pos)
    if head == "or":
        return Or(tuple(parse_condition(rd, y, scope, bound) for y in x[1:]), x.pos)
    if head == "not":
        if len(x) != 2:
            rd.err("not takes exactly one argument", x)
        return Not(parse_condition(rd, x[1], scope, bound), x.pos)
    if head == "imply":
        if len(x) != 3:
            rd.err("imply takes exactly two arguments", x)
        return Imply(parse_condition(rd, x[1], scope, bound), parse_condition(rd, x[2], scope, bound), x.pos)
    if head in ("forall", "exists"):
        if len(x) != 3:
            rd.err(f"{head} takes a variable list and a body", x)
        params = rd.typed_list(rd.expect_list(x[1], "variable list"), variables=True)
        _check_types(rd, params, scope, head)
        inner = bound | {p.name for p in params}
        body = parse_condition(rd, x[2], scope, inner)
        return (Forall if head == "forall" else Exists)(params, body, x.pos)
    if head == "=":
        if len(x) != 3:
            rd.err("= takes exactly two arguments", x)
        if isinstance(x[1], list) or isinstance(x[2], list):
            rd.note("numeric fluents", "numeric comparison", x)
            return Raw(sexpr_text(x), "numeric fluents", x.pos)
        return Equals(_term(rd, x[1], scope, bound), _term(rd, x[2], scope, bound), x.pos)
    if head in NUMERIC_COMPARISONS:
        rd.note("numeric fluents", "numeric comparison", x)
        return Raw(sexpr_text(x), "numeric fluents", x.pos)
    if head == "preference":
        rd.note("preferences", "preference", x)
        return Raw(sexpr_text(x), "preferences", x.pos)
    return _atom(rd, x, scope, bound)


def parse_effect(rd, x, scope, bound):
    if not isinstance(x, list):
        rd.err(f"expected an effect, got {x!r}", x)
    if not x:
        return And((), x.pos)
    head = x[0]
    if isinstance(head, list):
        rd.err("expected an effect", head)
    if head == "and":
        return And(tuple(parse_effect(rd, y, scope, bound) for y in x[1:]), x.pos)
    if head == "not":
        if len(x) != 2:
            rd.err("not takes exactly one argument", x)
        return Not(_atom(rd, rd.expect_list(x[1], "atom"), scope, bound), x.pos)
    if head == "forall":
        if len(x) != 3:
            rd.err("forall takes a variable list and an effect", x)
        params = rd.typed_list(rd.expect_list(x[1], "variable list"), variables=True)
        _check_types(rd, params, scope, head)
        rd.note("quantified effect", "forall in effect", x)
        return Forall(params, parse_effect(rd, x[2], scope, bound | {p.name for p in params}), x.pos)
    if head == "when":
        if len(x) != 3:
            rd.err("when takes a condition and an effect", x)
        rd.note("conditional effect", "when", x)
        return When(parse_condition(rd, x[1], scope, bound), parse_effect(rd, x[2], scope, bound), x.pos)
    if head in NUMERIC_EFFECTS:
        rd.note("numeric fluents", f"{head} effect", x)
        return Raw(sexpr_text(x), "numeric fluents", x.pos)
    return _atom(rd, x, scope, bound)


def _sections(rd, top, kind):
    """Check (define (kind name) ...) and return (name, sections)."""
    if not isinstance(top, list) or not top or top[0] != "define":
        rd.err(f"expected (define ({kind} ...) ...)", top)
    if len(top) < 2 or not isinstance(top[1], list) or len(top[1]) != 2 or top[1][0] != kind:
        rd.err(f"expected ({kind} <name>)", top[1] if len(top) > 1 else top)
    name = rd.expect_sym(top[1][1], f"{kind} name")
    secs = []
    for s in top[2:]:
        s = rd.expect_list(s, "section")
        if not s or isinstance(s[0], list) or not s[0].startswith(":"):
            rd.err("expected a section keyword", s)
        secs.append(s)
    return name, secs


def _requirements(rd, sec):
    reqs = tuple(rd.expect_sym(r, "requirement") for r in sec[1:])
    for r, x in zip(reqs, sec[1:]):
        if not r.startswith(":"):
            rd.err(f"malformed requirement {r!r}", x)
        if r not in SUPPORTED_REQUIREMENTS:
            rd.unsupported.append(Diagnostic("warning", f"unsupported requirement {r}", x.pos, rd.source,
                                             REQUIREMENT_CATEGORY.get(r, "requirement " + r)))
    return reqs


def parse_domain(text: str, source: str = "domain"):
    rd = _Reader(source)
    tops = read_sexprs(text, source)
    if len(tops) != 1:
        rd.err("expected exactly one (define (domain ...)) form", tops[1] if len(tops) > 1 else None)
    top = tops[0]
    name, secs = _sections(rd, top, "domain")
    reqs = ()
    types = ()
    constants = ()
    preds = []
    functions = []
    action_secs = []
    derived_secs = []
    extra = []
    seen = set()
    for s in secs:
        key = s[0]
        if key in (":requirements", ":types", ":constants", ":predicates", ":functions") and key in seen:
            rd.err(f"duplicate section {key}", s)
        seen.add(key)
        if key == ":requirements":
            reqs = _requirements(rd, s)
        elif key == ":types":
            types = rd.typed_list(s[1:], variables=False)
        elif key == ":constants":
            constants = rd.typed_list(s[1:], variables=False)
        elif key == ":predicates":
            for p in s[1:]:
                p = rd.expect_list(p, "predicate declaration")
                if not p:
                    rd.err("empty predicate declaration", p)
                params = rd.typed_list(p[1:], variables=True)
                preds.append(PredicateDecl(rd.expect_sym(p[0], "predicate name"), params, p.pos))
        elif key == ":functions":
            rd.note("numeric fluents", ":functions section", s)
            functions.append(Raw(sexpr_text(s), "numeric fluents", s.pos))
        elif key == ":action":
            action_secs.append(s)
        elif key == ":derived":
            rd.note("derived predicate", ":derived", s)
            derived_secs.append(s)
        elif key == ":durative-action":
            rd.note("durative action", ":durative-action", s)
            extra.append(Raw(sexpr_text(s), "durative action", s.pos))
        elif key == ":constraints":
            rd.note("constraints", ":constraints", s)
            extra.append(Raw(sexpr_text(s), "constraints", s.pos))
        else:
            rd.err(f"unknown domain section {key}", s)

    type_names = {"object"}
    for t in types:
        type_names.add(t.name)
        type_names.update(t.types)
    # predicate names must be unique
    pred_arity = {}
    for p in preds:
        if p.name in pred_arity:
            rd.err(f"duplicate predicate {p.name!r}", p)
        pred_arity[p.name] = len(p.params)
    scope = _Scope(pred_arity, {c.name for c in constants}, type_names)
    for t in constants:
        for ty in t.types:
            if ty not in type_names:
                rd.err(f"undeclared type {ty!r} of constant {t.name!r}", t)
    for p in preds:
        _check_types(rd, p.params, scope, f"predicate {p.name}")

    actions = []
    names = set()
    for s in action_secs:
        a = _action(rd, s, scope)
        if a.name in names:
            rd.err(f"duplicate action {a.name!r}", s)
        names.add(a.name)
        actions.append(a)
    derived = []
    for s in derived_secs:
        if len(s) != 3:
            rd.err("(:derived <atom> <formula>) expected", s)
        head = rd.expect_list(s[1], "derived predicate head")
        if not head:
            rd.err("empty derived predicate head", head)
        hname = rd.expect_sym(head[0], "predicate name")
        params = rd.typed_list(head[1:], variables=True)
        if hname not in scope.predicates:
            rd.err(f"undeclared predicate {hname!r}", head[0])
        if len(params) != scope.predicates[hname]:
            rd.err(f"arity mismatch: {hname} expects {scope.predicates[hname]} arguments", head)
        _check_types(rd, params, scope, f"derived {hname}")
        body = parse_condition(rd, s[2], scope, frozenset(p.name for p in params))
        derived.append(DerivedDecl(Atom(hname, tuple(p.name for p in params), head.pos), params, body, s.pos))
    dom = Domain(name, reqs, types, constants, tuple(preds), tuple(functions), tuple(actions),
                 tuple(derived), tuple(extra), top.pos)
    return dom, rd.unsupported, scope


def _action(rd, s, scope):
    if len(s) < 2:
        rd.err("action name expected", s)
    name = rd.expect_sym(s[1], "action name")
    params = ()
    pre = None
    eff = None
    i = 2
    seen = set()
    while i < len(s):
        key = rd.expect_sym(s[i], "action keyword")
        if i + 1 >= len(s):
            rd.err(f"value expected after {key}", s[i])
        val = s[i + 1]
        if key in seen:
            rd.err(f"duplicate {key} in action {name}", s[i])
        seen.add(key)
        if key == ":parameters":
            params = rd.typed_list(rd.expect_list(val, "parameter list"), variables=True)
            _check_types(rd, params, scope, f"action {name}")
            if len({p.name for p in params}) != len(params):
                rd.err(f"duplicate parameter in action {name}", val)
        elif key == ":precondition":
            pre = val
        elif key == ":effect":
            eff = val
        else:
            rd.err(f"unknown action keyword {key}", s[i])
        i += 2
    bound = frozenset(p.name for p in params)
    pre_f = parse_condition(rd, pre, scope, bound) if pre is not None else None
    eff_f = parse_effect(rd, eff, scope, bound) if eff is not None else None
    return ActionDecl(name, params, pre_f, eff_f, s.pos)


def parse_problem(text: str, domain: Domain, scope, source: str = "problem"):
    rd = _Reader(source)
    tops = read_sexprs(text, source)
    if len(tops) != 1:
        rd.err("expected exactly one (define (problem ...)) form", tops[1] if len(tops) > 1 else None)
    top = tops[0]
    name, secs = _sections(rd, top, "problem")
    dname = None
    reqs = ()
    objects = ()
    init_sec = None
    goal_sec = None
    extra = []
    for s in secs:
        key = s[0]
        if key == ":domain":
            if len(s) != 2:
                rd.err("(:domain <name>) expected", s)
            dname = rd.expect_sym(s[1], "domain name")
            if dname != domain.name:
                rd.err(f"problem refers to domain {dname!r}, not {domain.name!r}", s[1])
        elif key == ":requirements":
            reqs = _requirements(rd, s)
        elif key == ":objects":
            objects = rd.typed_list(s[1:], variables=False)
        elif key == ":init":
            init_sec = s
        elif key == ":goal":
            if len(s) != 2:
                rd.err("(:goal <formula>) expected", s)
            goal_sec = s[1]
        elif key == ":metric":
            rd.note("metric", "plan metric is ignored", s)
            extra.append(Raw(sexpr_text(s), "metric", s.pos))
        elif key == ":constraints":
            rd.note("constraints", ":constraints", s)
            extra.append(Raw(sexpr_text(s), "constraints", s.pos))
        else:
            rd.err(f"unknown problem section {key}", s)
    if dname is None:
        rd.err("problem lacks a (:domain ...) section", top)
    pscope = _Scope(scope.predicates, set(scope.objects) | {o.name for o in objects}, scope.types)
    for o in objects:
        for ty in o.types:
            if ty not in scope.types:
                rd.err(f"undeclared type {ty!r} of object {o.name!r}", o)
    init = []
    if init_sec is not None:
        for x in init_sec[1:]:
            x = rd.expect_list(x, "initial fact")
            if x and x[0] == "=":
                rd.note("numeric fluents", "numeric initial value", x)
                init.append(Raw(sexpr_text(x), "numeric fluents", x.pos))
            elif (x and x[0] == "at" and len(x) == 3 and isinstance(x[2], list)
                  and not isinstance(x[1], list) and _is_number(x[1])):
                rd.note("durative action", "timed initial literal", x)
                init.append(Raw(sexpr_text(x), "durative action", x.pos))
            elif x and x[0] == "not":
                # closed world: negative initial facts are redundant but legal
                init.append(Not(_atom(rd, rd.expect_list(x[1], "atom"), pscope, frozenset()), x.pos))
            else:
                init.append(_atom(rd, x, pscope, frozenset()))
    goal = parse_condition(rd, goal_sec, pscope, frozenset()) if goal_sec is not None else None
    prob = Problem(name, dname, reqs, objects, tuple(init), goal, tuple(extra), top.pos)
    return prob, rd.unsupported


def parse_pddl(domain_text: str, problem_text: str = None, domain_source: str = "domain",
               problem_source: str = "problem") -> PddlAst:
    dom, unsup, scope = parse_domain(domain_text, domain_source)
    prob = None
    if problem_text is not None:
        prob, unsup2 = parse_problem(problem_text, dom, scope, problem_source)
        unsup = list(unsup) + list(unsup2)
    return PddlAst(dom, prob, tuple(unsup))


__all__ = ["parse_pddl", "parse_domain", "parse_problem", "read_sexprs", "sexpr_text",
           "SUPPORTED_REQUIREMENTS", "REQUIREMENT_CATEGORY"]
