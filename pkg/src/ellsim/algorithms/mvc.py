from __future__ import annotations

from typing import Sequence

from ellsim.algorithms.base import IN, OUT, Rule, RuleSet, Snapshot, id_table
from ellsim.graph import Graph


def mvc_removable(g: Graph, snap: Snapshot, i: int) -> bool:
    return all(snap[j] == IN for j in g.adjacency[i])


def mvc_addable(g: Graph, snap: Snapshot, i: int) -> bool:
    return snap[i] == OUT and any(snap[j] == OUT for j in g.adjacency[i])


def mvc_impedensable(g: Graph, snap: Snapshot, i: int, ids: Sequence[int] | None = None) -> bool:
    if snap[i] != IN or not mvc_removable(g, snap, i):
        return False
    ids = id_table(g.n, ids)
    return all(ids[j] < ids[i] or not mvc_removable(g, snap, j) for j in g.adjacency[i])


def mvc_rules(g: Graph, ids: Sequence[int] | None = None) -> RuleSet:
    ids = id_table(g.n, ids)
    return RuleSet(
        "mvc",
        g,
        (
            Rule("Addable-MVC", lambda s, i: mvc_addable(g, s, i), lambda s, i: {i: IN}),
            Rule("Impedensable-MVC", lambda s, i: mvc_impedensable(g, s, i, ids), lambda s, i: {i: OUT}),
        ),
        read_radius=2,
    )
