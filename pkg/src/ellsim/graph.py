"""Graphs, SDMDS instances, instance file formats and random generation.

Node IDs are the integers 1..n.  Per-node tables are lists of length n + 1
with slot 0 unused, so ``adjacency[i]`` and ``state[i]`` line up with IDs.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class ParseError(ValueError):
    """Malformed instance text.  ``line`` is 1-based, or None for whole-document errors."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class HeaderError(ParseError):
    pass


class NodeRangeError(ParseError):
    pass


class SelfLoopError(ParseError):
    pass


class DuplicateEdgeError(ParseError):
    pass


class EdgeCountError(ParseError):
    pass


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset[tuple[int, int]]
    adjacency: tuple[frozenset[int], ...]
    _balls: dict = field(default_factory=dict, repr=False, compare=False, hash=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        if n < 1:
            raise ValueError(f"node count must be positive, got {n}")
        adj: list[set[int]] = [set() for _ in range(n + 1)]
        norm: set[tuple[int, int]] = set()
        for u, v in edges:
            if not (1 <= u <= n and 1 <= v <= n):
                raise ValueError(f"edge ({u}, {v}) out of range 1..{n}")
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            e = (u, v) if u < v else (v, u)
            if e in norm:
                raise ValueError(f"duplicate edge {e}")
            norm.add(e)
            adj[u].add(v)
            adj[v].add(u)
        return cls(n, frozenset(norm), tuple(frozenset(a) for a in adj))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def ids(self) -> range:
        return range(1, self.n + 1)

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def ball(self, i: int, k: int | None) -> frozenset[int]:
        """Nodes j != i within distance k of i; ``k=None`` means every other node.

        Cached, since the engine asks for the same balls on every activation.
        """
        key = (i, k)
        hit = self._balls.get(key)
        if hit is None:
            if k is None:
                hit = frozenset(j for j in self.ids if j != i)
            else:
                hit = frozenset(_bfs(self, i, k))
            self._balls[key] = hit
        return hit

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def edge_arrays(self) -> tuple[list[int], list[int]]:
        """Parallel endpoint lists (us[t], vs[t]) over the sorted edges."""
        hit = self._balls.get("edges")
        if hit is None:
            es = self.sorted_edges()
            hit = self._balls["edges"] = ([u for u, _ in es], [v for _, v in es])
        return hit


def _bfs(g: Graph, i: int, k: int) -> set[int]:
    seen = {i}
    frontier = deque([(i, 0)])
    while frontier:
        u, d = frontier.popleft()
        if d == k:
            continue
        for v in g.adjacency[u]:
            if v not in seen:
                seen.add(v)
                frontier.append((v, d + 1))
    seen.discard(i)
    return seen


def k_neighborhood(g: Graph, i: int, k: int) -> frozenset[int]:
    """All nodes j != i at shortest-path distance at most k from i."""
    if not 1 <= i <= g.n:
        raise KeyError(f"unknown node {i}")
    if k < 1:
        raise ValueError(f"radius must be >= 1, got {k}")
    return g.ball(i, k)


def parse_edge_list(text: str) -> Graph:
    """Parse the ``n m`` header + ``u v`` lines format.  '#' starts a comment."""
    header: tuple[int, int] | None = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if header is None:
            if len(parts) != 2:
                raise HeaderError(f"expected 'n m', got {line!r}", lineno)
            try:
                n, m = int(parts[0]), int(parts[1])
            except ValueError:
                raise HeaderError(f"non-integer header {line!r}", lineno) from None
            if n < 1 or m < 0:
                raise HeaderError(f"invalid header values n={n} m={m}", lineno)
            if m > n * (n - 1) // 2:
                raise HeaderError(f"m={m} exceeds the simple-graph maximum for n={n}", lineno)
            header = (n, m)
            continue
        n, m = header
        if len(parts) != 2:
            raise ParseError(f"expected 'u v', got {line!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer edge {line!r}", lineno) from None
        if not (1 <= u <= n and 1 <= v <= n):
            raise NodeRangeError(f"node ID out of range 1..{n} in {line!r}", lineno)
        if u == v:
            raise SelfLoopError(f"self-loop on node {u}", lineno)
        e = (u, v) if u < v else (v, u)
        if e in seen:
            raise DuplicateEdgeError(f"duplicate edge {e}", lineno)
        if len(edges) == m:
            raise EdgeCountError(f"more than the declared {m} edges", lineno)
        seen.add(e)
        edges.append(e)
    if header is None:
        raise HeaderError("missing 'n m' header")
    if len(edges) != header[1]:
        raise EdgeCountError(f"declared {header[1]} edges, found {len(edges)}")
    return Graph.from_edges(header[0], edges)


def write_edge_list(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.sorted_edges())
    return "\n".join(lines) + "\n"


def gen_gnm(n: int, m: int, seed: int) -> Graph:
    """Uniform simple graph with exactly m edges.  Same (n, m, seed), same graph."""
    if n < 1:
        raise ValueError(f"node count must be positive, got {n}")
    top = n * (n - 1) // 2
    if not 0 <= m <= top:
        raise ValueError(f"m={m} outside [0, {top}] for n={n}")
    rng = random.Random(seed)
    picks = sorted(rng.sample(range(top), m))
    edges = []
    # walk the sorted pair indices once instead of decoding each from scratch
    u, base, row = 1, 0, n - 1
    for t in picks:
        while t >= base + row:
            base += row
            u += 1
            row -= 1
        edges.append((u, u + 1 + t - base))
    return Graph.from_edges(n, edges)


@dataclass(frozen=True)
class SdmdsInstance:
    graph: Graph
    services: tuple[frozenset[str], ...]
    demands: tuple[frozenset[str], ...]

    @classmethod
    def build(cls, graph: Graph, services: dict[int, Iterable[str]] | None = None,
              demands: dict[int, Iterable[str]] | None = None) -> "SdmdsInstance":
        s: list[frozenset[str]] = [frozenset() for _ in range(graph.n + 1)]
        d: list[frozenset[str]] = [frozenset() for _ in range(graph.n + 1)]
        for table, out, what in ((services or {}, s, "services"), (demands or {}, d, "demands")):
            for node, tokens in table.items():
                if not 1 <= node <= graph.n:
                    raise ValueError(f"unknown node {node} in {what}")
                out[node] = frozenset(tokens)
        return cls(graph, tuple(s), tuple(d))

    @property
    def max_d(self) -> int:
        """Number of distinct demand tokens across all nodes."""
        return len(frozenset().union(*self.demands))


def uniform_instance(g: Graph, tokens: Iterable[str] = ("x",)) -> SdmdsInstance:
    """Every node offers and demands the same token set: plain minimal dominating set."""
    x = frozenset(tokens)
    return SdmdsInstance.build(g, {i: x for i in g.ids}, {i: x for i in g.ids})


def random_instance(g: Graph, alphabet: Sequence[str], seed: int) -> SdmdsInstance:
    """Each node gets a uniformly random subset of ``alphabet`` as services and as demands."""
    rng = random.Random(seed)
    services, demands = {}, {}
    for i in g.ids:
        services[i] = [t for t in alphabet if rng.random() < 0.5]
        demands[i] = [t for t in alphabet if rng.random() < 0.5]
    return SdmdsInstance.build(g, services, demands)


def parse_sdmds_instance(text: str) -> SdmdsInstance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(doc, dict) or "n" not in doc:
        raise ParseError("instance must be an object with at least 'n'")
    try:
        graph = Graph.from_edges(int(doc["n"]), [tuple(map(int, e)) for e in doc.get("edges", [])])
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad graph: {exc}") from None
    tables = {}
    for key in ("services", "demands"):
        raw = doc.get(key, {})
        if not isinstance(raw, dict):
            raise ParseError(f"'{key}' must be an object keyed by node ID")
        table = {}
        for node, tokens in raw.items():
            try:
                i = int(node)
            except ValueError:
                raise ParseError(f"non-integer node key {node!r} in '{key}'") from None
            if not 1 <= i <= graph.n:
                raise NodeRangeError(f"unknown node {i} in '{key}'")
            if not isinstance(tokens, list):
                raise ParseError(f"'{key}' entry for node {i} must be a list")
            table[i] = [str(t) for t in tokens]
        tables[key] = table
    return SdmdsInstance.build(graph, tables["services"], tables["demands"])


def write_sdmds_instance(inst: SdmdsInstance) -> str:
    g = inst.graph
    doc = {
        "n": g.n,
        "edges": [list(e) for e in g.sorted_edges()],
        "services": {str(i): sorted(inst.services[i]) for i in g.ids if inst.services[i]},
        "demands": {str(i): sorted(inst.demands[i]) for i in g.ids if inst.demands[i]},
    }
    return json.dumps(doc, indent=1) + "\n"
