"""Planning toolkit: PDDL/SAS front ends, parallel-step encodings, CDCL engine, planners."""

__version__ = "0.1.0"
