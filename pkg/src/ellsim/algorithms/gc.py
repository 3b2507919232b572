"""Graph colouring.

Conflicts are escaped by jumping to ``colour + id`` (distinct offsets per node);
afterwards the single highest-ID subtractable node in the whole graph drops to
its least free colour.  Colours are unbounded above.
"""

from __future__ import annotations

from operator import eq
from typing import Sequence

from ellsim.algorithms.base import Rule, RuleSet, Snapshot, id_table
from ellsim.graph import Graph


def gc_conflicted(g: Graph, snap: Snapshot, i: int) -> bool:
    c = snap[i]
    return any(snap[j] == c for j in g.adjacency[i])


def _least_free(g: Graph, snap: Snapshot, i: int) -> int | None:
    taken = {snap[j] for j in g.adjacency[i]}
    for c in range(1, snap[i]):
        if c not in taken:
            return c
    return None


def gc_subtractable(g: Graph, snap: Snapshot, i: int) -> bool:
    if snap[i] - 1 > len(g.adjacency[i]):
        return True  # more candidate colours than neighbours
    return _least_free(g, snap, i) is not None


def gc_impedensable(g: Graph, snap: Snapshot, i: int, ids: Sequence[int] | None = None) -> bool:
    if gc_conflicted(g, snap, i) or not gc_subtractable(g, snap, i):
        return False
    # every other node must be conflict-free: one scan over the edges
    us, vs = g.edge_arrays()
    get = snap.__getitem__
    if any(map(eq, map(get, us), map(get, vs))):
        return False
    # j = i is excluded: it would contradict subtractable(i)
    ids = id_table(g.n, ids)
    my_id = ids[i]
    return not any(ids[j] > my_id and gc_subtractable(g, snap, j) for j in g.ids)


def gc_rules(g: Graph, ids: Sequence[int] | None = None) -> RuleSet:
    ids = id_table(g.n, ids)

    def escape(s, i):
        return {i: s[i] + ids[i]}

    def lower(s, i):
        return {i: _least_free(g, s, i)}

    return RuleSet(
        "gc",
        g,
        (
            Rule("Conflicted-GC", lambda s, i: gc_conflicted(g, s, i), escape),
            Rule("Impedensable-GC", lambda s, i: gc_impedensable(g, s, i, ids), lower),
        ),
        read_radius=None,
        colour=True,
    )
