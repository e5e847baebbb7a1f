"""PDDL frontend: parsing, normalization, printing and lowering."""

from .ast import PddlAst, Diagnostic
from .beautify import beautify
from .lower import check_syntax, lower_to_schemas
from .normalize import nnf, normalize
from .parser import parse_pddl


def pddl_to_task(domain_text, problem_text, domain_source="domain", problem_source="problem", **ground_opts):
    """Full PDDL pipeline: parse, normalize, lower and ground."""
    from ..grounder import ground
    ast = normalize(parse_pddl(domain_text, problem_text, domain_source, problem_source))
    return ground(lower_to_schemas(ast, source=domain_source), **ground_opts)


__all__ = ["PddlAst", "Diagnostic", "beautify", "check_syntax", "lower_to_schemas", "nnf", "normalize",
           "parse_pddl", "pddl_to_task"]
