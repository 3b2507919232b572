"""The five two-rule algorithms and a registry keyed by problem name."""

from __future__ import annotations

from typing import Sequence

from ellsim.algorithms.base import (
    IN,
    OUT,
    GuardConflict,
    Instance,
    Rule,
    RuleSet,
    graph_of,
)
from ellsim.algorithms.gc import gc_conflicted, gc_impedensable, gc_rules, gc_subtractable
from ellsim.algorithms.mis import mis_addable, mis_impedensable, mis_removable, mis_rules
from ellsim.algorithms.mvc import mvc_addable, mvc_impedensable, mvc_removable, mvc_rules
from ellsim.algorithms.sdmds import (
    sdmds_addable,
    sdmds_dominators_of,
    sdmds_impedensable,
    sdmds_removable,
    sdmds_rules,
)
from ellsim.algorithms.tds import (
    TdsEval,
    tds_addable,
    tds_impedensable,
    tds_removable,
    tds_rules,
    tds_two_addable,
    tds_unsatisfied,
)
from ellsim.graph import Graph, SdmdsInstance, uniform_instance

PROBLEMS = ("sdmds", "mvc", "mis", "gc", "2ds")


def make_rules(problem: str, instance: Instance, ids: Sequence[int] | None = None) -> RuleSet:
    """Rule set for ``problem``.  A bare Graph given for sdmds means the plain MDS reduction."""
    if problem == "sdmds":
        if isinstance(instance, Graph):
            instance = uniform_instance(instance)
        return sdmds_rules(instance, ids)
    g = graph_of(instance)
    builders = {"mvc": mvc_rules, "mis": mis_rules, "gc": gc_rules, "2ds": tds_rules}
    try:
        return builders[problem](g, ids)
    except KeyError:
        raise ValueError(f"unknown problem {problem!r}; expected one of {PROBLEMS}") from None


__all__ = [
    "IN", "OUT", "PROBLEMS", "GuardConflict", "Rule", "RuleSet", "SdmdsInstance", "TdsEval",
    "make_rules", "graph_of",
    "sdmds_addable", "sdmds_removable", "sdmds_dominators_of", "sdmds_impedensable", "sdmds_rules",
    "mvc_addable", "mvc_removable", "mvc_impedensable", "mvc_rules",
    "mis_addable", "mis_removable", "mis_impedensable", "mis_rules",
    "gc_conflicted", "gc_subtractable", "gc_impedensable", "gc_rules",
    "tds_addable", "tds_removable", "tds_two_addable", "tds_unsatisfied", "tds_impedensable",
    "tds_rules",
]
