from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Sequence, Union

from ellsim.graph import Graph, SdmdsInstance

IN = "IN"
OUT = "OUT"

# A snapshot is anything indexable by node ID: the live state list, a stale
# copy of it, or a dict restricted to a read set.
Snapshot = Any
Instance = Union[Graph, SdmdsInstance]
Writes = dict  # node ID -> new local state


class GuardConflict(AssertionError):
    """Both rules of a rule set were enabled at the same node on the same snapshot."""


@dataclass(frozen=True)
class Rule:
    name: str
    guard: Callable[[Snapshot, int], bool]
    action: Callable[[Snapshot, int], Writes]


@dataclass(frozen=True)
class RuleSet:
    """Two guarded commands for one problem.

    ``rules[0]`` drives the system into the feasible region, ``rules[1]`` walks
    the lattice inside it.  ``read_radius`` is how far (in hops) a node's guards
    look, transitively; None means the whole graph.
    """

    problem: str
    instance: Instance
    rules: tuple[Rule, Rule]
    read_radius: int | None
    colour: bool = False

    @property
    def graph(self) -> Graph:
        return graph_of(self.instance)

    @property
    def f1(self) -> Rule:
        return self.rules[0]

    @property
    def f2(self) -> Rule:
        return self.rules[1]

    def enabled(self, snap: Snapshot, i: int, check_exclusive: bool = True) -> Rule | None:
        """First rule whose guard holds at i, in listed order."""
        f1, f2 = self.rules
        if f1.guard(snap, i):
            if check_exclusive and f2.guard(snap, i):
                raise GuardConflict(f"{self.problem}: {f1.name} and {f2.name} both hold at node {i}")
            return f1
        if f2.guard(snap, i):
            return f2
        return None

    def read_set(self, i: int) -> frozenset[int]:
        return self.graph.ball(i, self.read_radius)


def graph_of(instance: Instance) -> Graph:
    return instance.graph if isinstance(instance, SdmdsInstance) else instance


def id_table(n: int, ids: Sequence[int] | None) -> Sequence[int]:
    """Tie-break identifiers; defaults to the node index itself."""
    if ids is None:
        return range(n + 1)
    if len(ids) != n + 1:
        raise ValueError(f"ids must have n + 1 = {n + 1} entries (slot 0 unused)")
    if len(set(ids[1:])) != n:
        raise ValueError("ids must be distinct")
    return ids
