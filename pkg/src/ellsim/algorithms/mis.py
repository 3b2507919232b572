from __future__ import annotations

from typing import Sequence

from ellsim.algorithms.base import IN, OUT, Rule, RuleSet, Snapshot, id_table
from ellsim.graph import Graph


def mis_addable(g: Graph, snap: Snapshot, i: int) -> bool:
    return all(snap[j] == OUT for j in g.adjacency[i])


def mis_removable(g: Graph, snap: Snapshot, i: int) -> bool:
    return snap[i] == IN and any(snap[j] == IN for j in g.adjacency[i])


def mis_impedensable(g: Graph, snap: Snapshot, i: int, ids: Sequence[int] | None = None) -> bool:
    if snap[i] != OUT or not mis_addable(g, snap, i):
        return False
    ids = id_table(g.n, ids)
    return all(ids[j] < ids[i] or not mis_addable(g, snap, j) for j in g.adjacency[i])


def mis_rules(g: Graph, ids: Sequence[int] | None = None) -> RuleSet:
    # removal comes first here: an independent set is repaired by leaving it
    ids = id_table(g.n, ids)
    return RuleSet(
        "mis",
        g,
        (
            Rule("Removable-MIS", lambda s, i: mis_removable(g, s, i), lambda s, i: {i: OUT}),
            Rule("Impedensable-MIS", lambda s, i: mis_impedensable(g, s, i, ids), lambda s, i: {i: IN}),
        ),
        read_radius=2,
    )
