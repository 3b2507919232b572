"""Service-demand minimal dominating set.

A node leaves the set only when every neighbour it serves keeps another IN
server for each demand, and no higher-ID removable co-server exists.
"""

from __future__ import annotations

from typing import Sequence

from ellsim.algorithms.base import IN, OUT, Rule, RuleSet, Snapshot, id_table
from ellsim.graph import SdmdsInstance


def sdmds_addable(inst: SdmdsInstance, snap: Snapshot, i: int) -> bool:
    if snap[i] != OUT:
        return False
    services = inst.services
    adj = inst.graph.adjacency[i]
    for d in inst.demands[i]:
        if all(d not in services[j] or snap[j] == OUT for j in adj):
            return True
    return False


def sdmds_removable(inst: SdmdsInstance, snap: Snapshot, i: int) -> bool:
    services, demands = inst.services, inst.demands
    adj = inst.graph.adjacency
    for d in demands[i]:
        if not any(d in services[j] and snap[j] == IN for j in adj[i]):
            return False
    s_i = services[i]
    for j in adj[i]:
        # an IN neighbour dominates itself; only OUT neighbours rely on i's services
        if snap[j] == IN:
            continue
        for d in demands[j] & s_i:
            if not any(k != i and d in services[k] and snap[k] == IN for k in adj[j]):
                return False
    return True


def sdmds_dominators_of(inst: SdmdsInstance, snap: Snapshot, i: int) -> set[int]:
    d_i = inst.demands[i]
    services = inst.services
    out = {j for j in inst.graph.adjacency[i] if snap[j] == IN and not d_i.isdisjoint(services[j])}
    if snap[i] == IN:
        out.add(i)
    return out


def sdmds_impedensable(inst: SdmdsInstance, snap: Snapshot, i: int,
                       ids: Sequence[int] | None = None) -> bool:
    if snap[i] != IN or not sdmds_removable(inst, snap, i):
        return False
    ids = id_table(inst.graph.n, ids)
    services, demands = inst.services, inst.demands
    adj = inst.graph.adjacency
    s_i = services[i]
    my_id = ids[i]
    removable: dict[int, bool] = {}
    for j in adj[i]:
        for d in demands[j] & s_i:
            # dominators of j for this particular demand d, other than i
            rivals = [k for k in adj[j] if k != i and snap[k] == IN and d in services[k]]
            if snap[j] == IN and d in services[j]:
                rivals.append(j)
            for k in rivals:
                if ids[k] < my_id:
                    continue
                r = removable.get(k)
                if r is None:
                    r = removable[k] = sdmds_removable(inst, snap, k)
                if r:
                    return False
    return True


def sdmds_rules(inst: SdmdsInstance, ids: Sequence[int] | None = None) -> RuleSet:
    ids = id_table(inst.graph.n, ids)
    return RuleSet(
        "sdmds",
        inst,
        (
            Rule("Addable-SDMDS", lambda s, i: sdmds_addable(inst, s, i), lambda s, i: {i: IN}),
            Rule("Impedensable-SDMDS", lambda s, i: sdmds_impedensable(inst, s, i, ids),
                 lambda s, i: {i: OUT}),
        ),
        read_radius=4,
    )
