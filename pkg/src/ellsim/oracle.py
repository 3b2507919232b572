"""Ground truth: feasibility and optimality predicates, Rank/Badness, and
exhaustive checks over whole state spaces of small graphs.

Everything here is computed from the problem definitions directly (set
membership, set-minus tests, subset search) and never from the algorithms'
guards, except where the point is to explore the transitions the algorithms
take (lattice checks).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterator, Sequence

import networkx as nx

from ellsim.algorithms import IN, OUT, Instance, RuleSet, graph_of, make_rules
from ellsim.engine import Trace
from ellsim.graph import Graph, SdmdsInstance, uniform_instance

MAX_SUBSET_N = 16
MAX_STATE_SPACE_N = 5


class OracleSizeError(ValueError):
    """Instance too large for exhaustive search."""


class InfeasibleStateError(ValueError):
    pass


@dataclass(frozen=True)
class Verdict:
    feasible: bool
    optimal: bool
    witness: int | tuple[int, int, int] | None = None

    def __bool__(self) -> bool:
        return self.optimal


def _sdmds(instance: Instance) -> SdmdsInstance:
    return instance if isinstance(instance, SdmdsInstance) else uniform_instance(instance)


def _members(state: Sequence) -> set[int]:
    return {i for i in range(1, len(state)) if state[i] == IN}


# --- feasibility on member sets -------------------------------------------

def _sdmds_ok(inst: SdmdsInstance, d_set: set[int]) -> bool:
    adj, services = inst.graph.adjacency, inst.services
    for i in inst.graph.ids:
        if i in d_set:
            continue
        for d in inst.demands[i]:
            if not any(j in d_set and d in services[j] for j in adj[i]):
                return False
    return True


def _sdmds_undominated(inst: SdmdsInstance, d_set: set[int]) -> list[int]:
    return [i for i in inst.graph.ids
            if i not in d_set and not _sdmds_ok_node(inst, d_set, i)]


def _sdmds_ok_node(inst, d_set, i):
    adj, services = inst.graph.adjacency, inst.services
    return all(any(j in d_set and d in services[j] for j in adj[i]) for d in inst.demands[i])


def _cover_ok(g: Graph, v_set: set[int]) -> bool:
    return all(u in v_set or v in v_set for u, v in g.edges)


def _independent_ok(g: Graph, i_set: set[int]) -> bool:
    return not any(u in i_set and v in i_set for u, v in g.edges)


def _dominating_ok(g: Graph, d_set: set[int]) -> bool:
    adj = g.adjacency
    return all(i in d_set or not adj[i].isdisjoint(d_set) for i in g.ids)


def _proper(g: Graph, state: Sequence) -> bool:
    return all(state[u] != state[v] for u, v in g.edges)


def _free_below(g: Graph, state: Sequence, i: int) -> bool:
    used = {state[j] for j in g.adjacency[i]}
    return any(c not in used for c in range(1, state[i]))


def check_feasible(problem: str, instance: Instance, state: Sequence) -> bool:
    g = graph_of(instance)
    if problem == "gc":
        return _proper(g, state)
    members = _members(state)
    if problem == "sdmds":
        return _sdmds_ok(_sdmds(instance), members)
    if problem == "mvc":
        return _cover_ok(g, members)
    if problem == "mis":
        return _independent_ok(g, members)
    if problem == "2ds":
        return _dominating_ok(g, members)
    raise ValueError(f"unknown problem {problem!r}")


def find_swap(g: Graph, members: set[int]) -> tuple[int, int, int] | None:
    """First (i, j, k), i outside and j < k inside, with members + i - {j, k} still dominating."""
    outside = [i for i in g.ids if i not in members]
    inside = sorted(members)
    for i in outside:
        for j, k in combinations(inside, 2):
            if _dominating_ok(g, (members | {i}) - {j, k}):
                return i, j, k
    return None


def check_optimal(problem: str, instance: Instance, state: Sequence) -> Verdict:
    """Feasible plus locally optimal; the witness is the highest-ID violating node
    (or the first violating swap triple for 2ds)."""
    g = graph_of(instance)
    if problem == "gc":
        bad = [i for i in g.ids if any(state[j] == state[i] for j in g.adjacency[i])]
        if bad:
            return Verdict(False, False, max(bad))
        lowerable = [i for i in g.ids if _free_below(g, state, i)]
        return Verdict(True, not lowerable, max(lowerable) if lowerable else None)

    members = _members(state)
    if problem == "sdmds":
        inst = _sdmds(instance)
        ok = lambda s: _sdmds_ok(inst, s)  # noqa: E731
    elif problem == "mvc":
        ok = lambda s: _cover_ok(g, s)  # noqa: E731
    elif problem == "mis":
        ok = lambda s: _independent_ok(g, s)  # noqa: E731
    elif problem == "2ds":
        ok = lambda s: _dominating_ok(g, s)  # noqa: E731
    else:
        raise ValueError(f"unknown problem {problem!r}")

    if not ok(members):
        if problem == "mis":
            culprits = [u for e in g.edges if e[0] in members and e[1] in members for u in e]
        elif problem == "mvc":
            culprits = [u for e in g.edges if e[0] not in members and e[1] not in members for u in e]
        elif problem == "sdmds":
            culprits = _sdmds_undominated(_sdmds(instance), members)
        else:
            culprits = [i for i in g.ids if i not in members and g.adjacency[i].isdisjoint(members)]
        return Verdict(False, False, max(culprits))

    if problem == "mis":
        extra = [i for i in g.ids if i not in members and ok(members | {i})]
    else:
        extra = [i for i in members if ok(members - {i})]
    if extra:
        return Verdict(True, False, max(extra))
    if problem == "2ds":
        swap = find_swap(g, members)
        if swap is not None:
            return Verdict(True, False, swap)
    return Verdict(True, True, None)


# --- Rank and Badness ------------------------------------------------------

def rank(instance: Instance, state: Sequence) -> int:
    """Fewest nodes to add so the IN set dominates (SDMDS sense)."""
    inst = _sdmds(instance)
    if inst.graph.n > MAX_SUBSET_N:
        raise OracleSizeError(f"rank is exhaustive; n={inst.graph.n} exceeds {MAX_SUBSET_N}")
    members = _members(state)
    outside = [i for i in inst.graph.ids if i not in members]
    for k in range(len(outside) + 1):
        for extra in combinations(outside, k):
            if _sdmds_ok(inst, members.union(extra)):
                return k
    raise AssertionError("the full node set always dominates")


def badness(instance: Instance, state: Sequence) -> int:
    """Most nodes removable from a dominating IN set while it still dominates."""
    inst = _sdmds(instance)
    if inst.graph.n > MAX_SUBSET_N:
        raise OracleSizeError(f"badness is exhaustive; n={inst.graph.n} exceeds {MAX_SUBSET_N}")
    members = _members(state)
    if not _sdmds_ok(inst, members):
        raise InfeasibleStateError("badness is defined on dominating sets only")
    inside = sorted(members)
    for k in range(len(inside), -1, -1):
        for gone in combinations(inside, k):
            if _sdmds_ok(inst, members.difference(gone)):
                return k
    raise AssertionError("removing nothing always works")


# --- state spaces ----------------------------------------------------------

def colour_cap(g: Graph) -> int:
    return g.n + g.n  # n + max ID


def all_states(problem: str, g: Graph) -> Iterator[tuple]:
    """Every global state, as tuples with an unused slot 0."""
    if g.n > MAX_STATE_SPACE_N:
        raise OracleSizeError(f"state space enumeration capped at n={MAX_STATE_SPACE_N}, got n={g.n}")
    values = range(1, colour_cap(g) + 1) if problem == "gc" else (IN, OUT)
    for combo in product(values, repeat=g.n):
        yield (None, *combo)


def f2_successors(rules: RuleSet, state: tuple) -> list[tuple[int, tuple]]:
    """(node, next state) for every node whose lattice rule is enabled, fresh reads."""
    out = []
    f2 = rules.f2
    for i in rules.graph.ids:
        if f2.guard(state, i):
            nxt = list(state)
            for j, v in f2.action(state, i).items():
                nxt[j] = v
            out.append((i, tuple(nxt)))
    return out


@dataclass
class LatticeReport:
    problem: str
    states: int = 0
    feasible: int = 0
    suboptimal: int = 0
    counterexamples: list[tuple[tuple, str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.counterexamples


def check_lattice_linearity(problem: str, instance: Instance, rules: RuleSet | None = None) -> LatticeReport:
    """Every feasible non-optimal state has an enabled lattice-rule node, the
    lattice rule never leaves the feasible region, and every maximal path of
    lattice-rule moves ends in an optimal state."""
    g = graph_of(instance)
    rules = rules or make_rules(problem, instance)
    report = LatticeReport(problem)
    # memo: state -> True if every maximal F2 path from it ends optimal
    verdict: dict[tuple, bool] = {}
    on_stack: set[tuple] = set()

    def sound(s: tuple) -> bool:
        hit = verdict.get(s)
        if hit is not None:
            return hit
        if s in on_stack:
            report.counterexamples.append((s, "cycle of lattice-rule moves"))
            return False
        on_stack.add(s)
        succ = f2_successors(rules, s)
        if not succ:
            res = check_optimal(problem, instance, s).optimal
            if not res:
                report.counterexamples.append((s, "lattice-rule path stuck in a non-optimal state"))
        else:
            res = True
            for _, t in succ:
                if not check_feasible(problem, instance, t):
                    report.counterexamples.append((s, f"lattice-rule move leaves the feasible region to {t}"))
                    res = False
                elif not sound(t):
                    res = False
        on_stack.discard(s)
        verdict[s] = res
        return res

    for s in all_states(problem, g):
        report.states += 1
        if not check_feasible(problem, instance, s):
            continue
        report.feasible += 1
        if check_optimal(problem, instance, s).optimal:
            continue
        report.suboptimal += 1
        if not f2_successors(rules, s):
            report.counterexamples.append((s, "feasible, not optimal, but no impedensable node"))
            continue
        sound(s)
    return report


@dataclass
class LatticeDecomposition:
    problem: str
    feasible: list[tuple]
    infeasible: list[tuple]
    components: list[list[tuple]]
    suprema: list[tuple | None]
    edges: list[tuple[tuple, tuple, int]]

    def sizes(self) -> list[int]:
        return [len(c) for c in self.components]

    def to_dot(self) -> str:
        def label(s: tuple) -> str:
            return "(" + ",".join(str(v) for v in s[1:]) + ")"

        lines = [f'digraph "{self.problem}" {{', "  rankdir=BT;", "  node [shape=record];"]
        for k, comp in enumerate(self.components):
            lines.append(f"  subgraph cluster_{k} {{")
            lines.append(f'    label="lattice {k + 1}";')
            for s in comp:
                style = ", style=bold" if s == self.suprema[k] else ""
                lines.append(f'    "{label(s)}" [label="{label(s)}"{style}];')
            lines.append("  }")
        for s, t, i in self.edges:
            lines.append(f'  "{label(s)}" -> "{label(t)}" [label="{i}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def enumerate_lattices(problem: str, instance: Instance, rules: RuleSet | None = None) -> LatticeDecomposition:
    """Split the feasible states into components joined by single lattice-rule moves."""
    g = graph_of(instance)
    rules = rules or make_rules(problem, instance)
    feasible, infeasible = [], []
    for s in all_states(problem, g):
        (feasible if check_feasible(problem, instance, s) else infeasible).append(s)

    parent = {s: s for s in feasible}

    def find(s):
        while parent[s] != s:
            parent[s] = parent[parent[s]]
            s = parent[s]
        return s

    edges = []
    sinks = set()
    for s in feasible:
        succ = [(i, t) for i, t in f2_successors(rules, s) if t in parent]
        if not succ:
            sinks.add(s)
        for i, t in succ:
            edges.append((s, t, i))
            a, b = find(s), find(t)
            if a != b:
                parent[b] = a

    groups: dict[tuple, list[tuple]] = {}
    for s in feasible:
        groups.setdefault(find(s), []).append(s)
    components = list(groups.values())
    suprema = []
    for comp in components:
        tops = [s for s in comp if s in sinks]
        suprema.append(tops[0] if len(tops) == 1 else None)
    return LatticeDecomposition(problem, feasible, infeasible, components, suprema, edges)


# --- move bounds -----------------------------------------------------------

@dataclass(frozen=True)
class BoundCheck:
    ok: bool
    moves: int
    bound: int
    moves_after_first_round: int
    after_bound: int | None

    def __bool__(self) -> bool:
        return self.ok


def move_bounds(problem: str, g: Graph) -> tuple[int, int | None]:
    """(total move bound, bound on moves after the first round)."""
    n, m = g.n, g.m
    if problem in ("sdmds", "mvc", "mis"):
        return 2 * n, n
    if problem == "gc":
        return n + 4 * m, None
    if problem == "2ds":
        return 3 * n, 2 * n
    raise ValueError(f"unknown problem {problem!r}")


def check_bounds(problem: str, g: Graph, trace: Trace) -> BoundCheck:
    total, after = move_bounds(problem, g)
    ok = trace.moves <= total and (after is None or trace.moves_after_first_round <= after)
    return BoundCheck(ok, trace.moves, total, trace.moves_after_first_round, after)


# --- small-graph enumeration -----------------------------------------------

def nonisomorphic_graphs(n: int) -> list[Graph]:
    """One representative per isomorphism class of simple graphs on n nodes (n <= 7)."""
    if not 1 <= n <= 7:
        raise OracleSizeError(f"the graph atlas covers 1 <= n <= 7, got n={n}")
    return [
        Graph.from_edges(n, [(u + 1, v + 1) for u, v in h.edges()])
        for h in nx.graph_atlas_g()
        if h.number_of_nodes() == n
    ]
