"""2-dominating set: a minimal dominating set that also admits no swap of two
members for one non-member.

Guards nest deeply (impedensable looks at unsatisfied nodes four hops out,
each of which looks four hops further), so evaluation goes through a
per-snapshot memo.
"""

from __future__ import annotations

from itertools import combinations
from typing import Sequence

from ellsim.algorithms.base import IN, OUT, Rule, RuleSet, Snapshot, id_table
from ellsim.graph import Graph


class TdsEval:
    """Memoised 2DS predicates over one fixed snapshot."""

    def __init__(self, g: Graph, snap: Snapshot, ids: Sequence[int] | None = None):
        self.g = g
        self.snap = snap
        self.ids = id_table(g.n, ids)
        self._add: dict[int, bool] = {}
        self._rem: dict[int, bool] = {}
        self._unsat: dict[int, bool] = {}
        self._dom: dict[int, int] = {}

    def addable(self, i: int) -> bool:
        r = self._add.get(i)
        if r is None:
            s = self.snap
            r = self._add[i] = s[i] == OUT and all(s[j] == OUT for j in self.g.adjacency[i])
        return r

    def removable(self, i: int) -> bool:
        r = self._rem.get(i)
        if r is None:
            r = self._rem[i] = self._removable(i)
        return r

    def _removable(self, i: int) -> bool:
        s, adj = self.snap, self.g.adjacency
        if s[i] != IN:
            return False
        # i itself must keep an IN neighbour
        if not any(s[k] == IN for k in adj[i]):
            return False
        for j in adj[i]:
            if s[j] == IN:
                continue
            if not any(k != i and s[k] == IN for k in adj[j]):
                return False
        return True

    def _dominators(self, q: int) -> int:
        # |closed neighbourhood of q ∩ IN|
        c = self._dom.get(q)
        if c is None:
            s = self.snap
            c = (s[q] == IN) + sum(1 for r in self.g.adjacency[q] if s[r] == IN)
            self._dom[q] = c
        return c

    def two_addable_witness(self, i: int) -> tuple[int, int] | None:
        """Smallest (j, k) by ID whose swap with i keeps everything dominated, if any."""
        s, adj = self.snap, self.g.adjacency
        if s[i] != OUT or self.addable(i):
            return None
        near = self.g.ball(i, 2)
        members = [j for j in near if s[j] == IN]
        if len(members) < 2:
            return None
        add, rem = self._add, self._rem
        for l in near:
            # addable needs OUT, removable needs IN: only one can apply
            if s[l] == OUT:
                r = add.get(l)
                if r is None:
                    r = self.addable(l)
            else:
                r = rem.get(l)
                if r is None:
                    r = self.removable(l)
            if r:
                return None
        ids = self.ids
        members.sort(key=ids.__getitem__)
        adj_i = adj[i]
        dominators = self._dominators
        for j, k in combinations(members, 2):
            adj_j, adj_k = adj[j], adj[k]
            for q in adj_j | adj_k | {j, k}:
                if q == i or q in adj_i:
                    continue
                lost = (q == j or q in adj_j) + (q == k or q in adj_k)
                if dominators(q) - lost < 1:
                    break
            else:
                return j, k
        return None

    def two_addable(self, i: int) -> bool:
        return self.two_addable_witness(i) is not None

    def unsatisfied(self, i: int) -> bool:
        r = self._unsat.get(i)
        if r is None:
            r = self._unsat[i] = self.removable(i) or self.two_addable(i)
        return r

    def impedensable(self, i: int) -> bool:
        if not self.unsatisfied(i):
            return False
        ids = self.ids
        my_id = ids[i]
        return not any(ids[j] > my_id and self.unsatisfied(j) for j in self.g.ball(i, 4))


def tds_addable(g: Graph, snap: Snapshot, i: int) -> bool:
    return TdsEval(g, snap).addable(i)


def tds_removable(g: Graph, snap: Snapshot, i: int) -> bool:
    return TdsEval(g, snap).removable(i)


def tds_two_addable(g: Graph, snap: Snapshot, i: int) -> tuple[int, int] | None:
    """The swap witness (j, k), or None when i is not 2-addable."""
    return TdsEval(g, snap).two_addable_witness(i)


def tds_unsatisfied(g: Graph, snap: Snapshot, i: int) -> bool:
    return TdsEval(g, snap).unsatisfied(i)


def tds_impedensable(g: Graph, snap: Snapshot, i: int, ids: Sequence[int] | None = None) -> bool:
    return TdsEval(g, snap, ids).impedensable(i)


def tds_rules(g: Graph, ids: Sequence[int] | None = None) -> RuleSet:
    ids = id_table(g.n, ids)

    def act(s, i):
        if s[i] == IN:
            return {i: OUT}
        j, k = TdsEval(g, s, ids).two_addable_witness(i)
        return {j: OUT, k: OUT, i: IN}

    return RuleSet(
        "2ds",
        g,
        (
            Rule("Addable-2DS", lambda s, i: tds_addable(g, s, i), lambda s, i: {i: IN}),
            Rule("Impedensable-2DS", lambda s, i: tds_impedensable(g, s, i, ids), act),
        ),
        read_radius=8,
    )
