"""Command line interface.

    parplan translate   INPUT...              ground task as facts on stdout
    parplan normalize   DOMAIN PROBLEM        PDDL after normalization
    parplan check-syntax DOMAIN [PROBLEM]     parse errors and unsupported constructs
    parplan beautify    DOMAIN [PROBLEM]      reformatted PDDL
    parplan solve       [options] INPUT...    plan on stdout, statistics on stderr
    parplan validate    --semantics S INPUT... PLAN

INPUT is a facts file, a SAS file, or a PDDL domain/problem pair; "-"
reads standard input.  Exit codes: 0 success, 10 no plan within the cap or
invalid plan, 1 usage error, 2 input error.
"""

from __future__ import annotations

import argparse
import re
import sys
from typing import Optional

from .encoder import Mode
from .errors import InputError, ParplanError, StructuralError, UsageError
from .facts import quote, read_facts, write_facts
from .model import PlanningTask, StepPlan
from .planner import Planner, PlannerConfig
from .serial import validate_plan

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_INPUT = 0, 10, 1, 2

# --encoding value -> (mode, guess-and-check strategy)
ENCODINGS = {
    "seq": (Mode.SEQ, "switch"),
    "forall": (Mode.FORALL, "switch"),
    "exists": (Mode.EXISTS_ACYC, "switch"),
    "exists-acyc": (Mode.EXISTS_ACYC, "switch"),
    "exists-fixpoint": (Mode.GC_EXISTS, "nogood"),
    "gc": (Mode.GC_EXISTS, "switch"),
    "relaxed": (Mode.GC_RELAXED, "switch"),
}


class _Usage(Exception):
    pass


# -- plan files ---------------------------------------------------------------


def format_plan(plan: StepPlan, task: PlanningTask, output: str = "text") -> str:
    """Plan text; idle steps after the last action are not printed."""
    steps = list(plan.steps)
    while steps and not steps[-1]:
        steps.pop()
    lines = []
    for t, step in enumerate(steps, start=1):
        ordered = [task.actions[a].name for a in task.resolve_actions(step)]
        if output == "facts":
            lines += [f"occurs({_fact_sym(a)},{t})." for a in ordered]
        else:
            lines.append(f"step {t}: " + " ".join(ordered) if ordered else f"step {t}:")
    return "\n".join(lines) + ("\n" if lines else "")


def _fact_sym(name):
    return quote(name)


_STEP = re.compile(r"^step\s+(\d+)\s*:(.*)$")
_OCC = re.compile(r'^occurs\(\s*("(?:[^"\\]|\\.)*"|[^,()\s]+(?:\([^()]*\))?)\s*,\s*(\d+)\s*\)\s*\.$')


def parse_plan(text: str, semantics: str = "exists", source: str = "<plan>") -> StepPlan:
    """Read either 'step t: a b' lines or 'occurs(a,t).' facts."""
    steps: dict = {}
    n = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%")[0].strip() if raw.lstrip().startswith("occurs") else raw.split(";")[0].strip()
        if not line:
            continue
        m = _STEP.match(line)
        if m:
            t = int(m.group(1))
            if t in steps and steps[t]:
                raise InputError(f"step {t} listed twice", lineno, 1, source)
            steps.setdefault(t, []).extend(m.group(2).split())
            n = max(n, t)
            continue
        m = _OCC.match(line)
        if m:
            a = m.group(1)
            if a.startswith('"'):
                a = bytes(a[1:-1], "utf-8").decode("unicode_escape")
            t = int(m.group(2))
            steps.setdefault(t, []).append(a)
            n = max(n, t)
            continue
        raise InputError(f"cannot read plan line {raw.strip()!r}", lineno, 1, source)
    if 0 in steps:
        raise InputError("plan steps are numbered from 1", None, None, source)
    return StepPlan(tuple(tuple(steps.get(t, ())) for t in range(1, n + 1)), semantics)


# -- inputs -------------------------------------------------------------------


def _read(path):
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def detect_format(paths, texts) -> str:
    if len(paths) == 2:
        return "pddl"
    if len(paths) != 1:
        raise _Usage("expected one facts/SAS file or a PDDL domain and problem")
    p, t = paths[0], texts[0]
    if p.endswith(".sas") or t.lstrip().startswith("begin_version"):
        return "sas"
    if p.endswith(".pddl") or re.match(r"\s*(;[^\n]*\n\s*)*\(\s*define", t, re.I):
        return "pddl"
    return "facts"


def load_task(paths, fmt: Optional[str] = None, warnings: Optional[list] = None) -> PlanningTask:
    if sum(1 for p in paths if p == "-") > 1:
        raise _Usage("standard input can be used only once")
    texts = [_read(p) for p in paths]
    fmt = fmt or detect_format(paths, texts)
    if fmt == "pddl":
        if len(paths) != 2:
            raise _Usage("PDDL input needs a domain file and a problem file")
        from .grounder import ground
        from .pddl import lower_to_schemas, normalize, parse_pddl
        ast = normalize(parse_pddl(texts[0], texts[1], paths[0], paths[1]))
        return ground(lower_to_schemas(ast, source=paths[0]), warnings=warnings)
    if len(paths) != 1:
        raise _Usage(f"{fmt} input is a single file")
    if fmt == "sas":
        from .sas import parse_sas, to_task
        doc = parse_sas(texts[0], paths[0])
        if warnings is not None:
            warnings.extend(doc.warnings)
        return to_task(doc, paths[0])
    try:
        return read_facts(texts[0])
    except InputError as e:
        e.source = e.source or paths[0]
        raise


# -- commands -----------------------------------------------------------------


def cmd_translate(args, out, err):
    task = load_task(args.inputs, args.from_)
    out.write(write_facts(task))
    return EXIT_OK


def _pddl_pair(args):
    if len(args.inputs) not in (1, 2):
        raise _Usage("expected a domain file and optionally a problem file")
    texts = [_read(p) for p in args.inputs]
    return texts[0], (texts[1] if len(texts) > 1 else None), args.inputs


def cmd_normalize(args, out, err):
    from .pddl import beautify, normalize, parse_pddl
    d, p, paths = _pddl_pair(args)
    ast = normalize(parse_pddl(d, p, paths[0], paths[-1]))
    dt, pt = beautify(ast)
    out.write(dt)
    if pt is not None:
        out.write("\n" + pt)
    return EXIT_OK


def cmd_beautify(args, out, err):
    from .pddl import beautify, parse_pddl
    d, p, paths = _pddl_pair(args)
    dt, pt = beautify(parse_pddl(d, p, paths[0], paths[-1]))
    out.write(dt)
    if pt is not None:
        out.write("\n" + pt)
    return EXIT_OK


def cmd_check_syntax(args, out, err):
    from .pddl import check_syntax
    d, p, paths = _pddl_pair(args)
    diags = check_syntax(d, p, paths[0], paths[-1])
    for dg in diags:
        out.write(dg.format() + "\n")
    return EXIT_INPUT if any(dg.severity == "error" for dg in diags) else EXIT_OK


def cmd_solve(args, out, err):
    warnings: list = []
    task = load_task(args.inputs, args.from_, warnings)
    for w in warnings:
        err.write(f"warning: {w}\n")
    mode, strategy = ENCODINGS[args.encoding]
    cfg = PlannerConfig(mode=mode, algorithm=args.algorithm, n=args.n, gamma=args.gamma,
                        increment=args.increment, heuristic=args.heuristic,
                        horizon_cap=args.horizon_cap, slice_size=args.slice, seed=args.seed,
                        gc_strategy=strategy)
    planner = Planner(task, cfg)
    res = planner.run()
    if args.dump_dimacs:
        with open(args.dump_dimacs, "w", encoding="utf-8") as fh:
            fh.write(planner.engine.to_dimacs())
    for line in res.stat_lines():
        err.write(line + "\n")
    if not res.found:
        err.write(f"no plan up to horizon {args.horizon_cap}\n")
        return EXIT_NEGATIVE
    out.write(format_plan(res.plan, task, args.output))
    return EXIT_OK


def cmd_validate(args, out, err):
    if len(args.inputs) < 2:
        raise _Usage("validate needs the task input(s) followed by a plan file")
    task = load_task(args.inputs[:-1], args.from_)
    # read without a claim so that parallel steps reach the sequential check
    plan = parse_plan(_read(args.inputs[-1]), "exists", args.inputs[-1])
    try:
        report = validate_plan(task, plan, args.semantics)
    except StructuralError as e:
        raise InputError(str(e), source=args.inputs[-1]) from None
    out.write(report.line() + "\n")
    if args.verbose:
        if report.valid:
            out.write("sequentialization: " + " ".join(report.sequential) + "\n")
        else:
            out.write(report.detail + "\n")
    return EXIT_OK if report.valid else EXIT_NEGATIVE


# -- argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="parplan", description="Parallel-plan SAT planner.")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND")

    def add(name, fn, help_, inputs="+"):
        p = sub.add_parser(name, help=help_)
        p.add_argument("inputs", nargs=inputs, metavar="INPUT")
        p.set_defaults(fn=fn)
        return p

    def from_flag(p):
        p.add_argument("--from", dest="from_", choices=("pddl", "sas", "facts"), default=None,
                       help="input format (auto-detected by default)")

    from_flag(add("translate", cmd_translate, "print the ground task as facts"))
    add("normalize", cmd_normalize, "print normalized PDDL")
    add("check-syntax", cmd_check_syntax, "report unsupported or malformed PDDL")
    add("beautify", cmd_beautify, "reformat PDDL")

    s = add("solve", cmd_solve, "search for a plan")
    from_flag(s)
    s.add_argument("--encoding", choices=sorted(ENCODINGS), default="exists")
    s.add_argument("--algorithm", choices=("S", "A", "B"), default="B", type=str.upper)
    s.add_argument("--n", type=int, default=16)
    s.add_argument("--gamma", type=float, default=0.9)
    s.add_argument("--increment", type=int, default=5)
    s.add_argument("--heuristic", action="store_true")
    s.add_argument("--horizon-cap", type=int, default=200)
    s.add_argument("--slice", type=int, default=512, help="conflicts per time slice")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--output", choices=("text", "facts"), default="text")
    s.add_argument("--dump-dimacs", metavar="FILE", default=None)

    v = add("validate", cmd_validate, "check a plan against a task")
    from_flag(v)
    v.add_argument("--semantics", choices=("sequential", "forall", "exists", "relaxed"), default="exists")
    v.add_argument("--verbose", action="store_true")
    return ap


def run(argv, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    if not getattr(args, "fn", None):
        ap.print_usage(err)
        return EXIT_USAGE
    try:
        return args.fn(args, out, err)
    except (_Usage, UsageError, ValueError) as e:
        err.write(f"usage error: {e}\n")
        return EXIT_USAGE
    except OSError as e:
        err.write(f"error: {e}\n")
        return EXIT_INPUT
    except InputError as e:
        err.write(f"{e.location()}: error: {e.args[0]}\n")
        return EXIT_INPUT
    except ParplanError as e:
        err.write(f"error: {e}\n")
        return EXIT_INPUT


def main(argv=None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
