"""Execution of two-rule algorithms under central, distributed, synchronous and
stale-read (AMR) schedulers.

Writes are serialised per activation.  Asynchrony enters only through reads:
under ``amr`` a node sees, for each node in its read set, some version of that
node's history no older than its previous read (monotonic) and no more than
``staleness`` versions behind the latest.  A node's own state is always read
fresh.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from ellsim.algorithms import IN, OUT, RuleSet

KINDS = ("central", "distributed", "synchronous", "amr")
_ALIASES = {"sync": "synchronous"}


class NonTermination(RuntimeError):
    """Step budget exhausted.  Carries the partial trace."""

    def __init__(self, trace: "Trace"):
        self.trace = trace
        super().__init__(
            f"{trace.problem}/{trace.scheduler}: no silent state after {trace.steps} steps "
            f"({trace.moves} moves, {trace.rounds} rounds)"
        )


@dataclass(frozen=True)
class SchedulerConfig:
    kind: str = "central"
    staleness: int = 0
    seed: int = 0
    max_steps: int | None = None

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ValueError(f"unknown scheduler {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        if self.staleness < 0:
            raise ValueError("staleness must be non-negative")
        if kind != "amr" and self.staleness != 0:
            raise ValueError(f"staleness applies to amr only, got B={self.staleness} for {kind}")
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError("max_steps must be positive")


def default_max_steps(n: int, m: int, kind: str) -> int:
    budget = 10 * (2 * n + 4 * m + 10)
    # a central step activates one node, so one round alone costs n steps
    return budget * n if kind == "central" else budget


class History:
    """Append-only per-node version history; version = index into the list."""

    def __init__(self, init: Sequence):
        self.values: list[list] = [[v] for v in init]

    def latest(self, j: int) -> int:
        return len(self.values[j]) - 1

    def at(self, j: int, version: int):
        return self.values[j][version]

    def append(self, j: int, value) -> int:
        self.values[j].append(value)
        return len(self.values[j]) - 1

    def writes(self) -> int:
        return sum(len(h) - 1 for h in self.values[1:])


class ViewTable:
    """Per-(reader, subject) read cursors enforcing the AMR contract.

    ``read_set(i)`` gives the subjects node i reads; it must be symmetric
    (j in read_set(i) iff i in read_set(j)), which holds for hop balls.  Pairs
    whose cursor lags the latest version are tracked in a per-reader dirty set
    so that a caught-up reader costs nothing to refresh.
    """

    def __init__(self, staleness: int, rng: random.Random,
                 read_set: Callable[[int], Iterable[int]] | None = None,
                 log: list | None = None):
        self.staleness = staleness
        self.rng = rng
        self.read_set = read_set
        self.cursors: dict[int, dict[int, int]] = {}
        self._dirty: dict[int, set[int]] = {}
        self.log = log

    def cursor(self, i: int, j: int) -> int:
        return self.cursors.get(i, {}).get(j, 0)

    def read(self, history: History, i: int, j: int) -> int:
        """Pick a version of j for reader i and advance the cursor to it."""
        row = self.cursors.setdefault(i, {})
        cur = row.get(j, 0)
        latest = history.latest(j)
        lo = max(cur, latest - self.staleness)
        v = lo if lo >= latest else self.rng.randint(lo, latest)
        row[j] = v
        if self.log is not None:
            self.log.append((i, j, v, latest))
        if v == latest:
            dirty = self._dirty.get(i)
            if dirty:
                dirty.discard(j)
        return v

    def snapshot_for(self, history: History, i: int, read_set: Iterable[int]) -> dict:
        """i's view of ``read_set`` plus its own fresh state."""
        snap = {j: history.at(j, self.read(history, i, j)) for j in sorted(read_set) if j != i}
        snap[i] = history.at(i, history.latest(i))
        return snap

    def note_write(self, history: History, j: int) -> None:
        if self.read_set is None:
            return
        latest = history.latest(j)
        for r in self.read_set(j):
            if self.cursor(r, j) < latest:
                self._dirty.setdefault(r, set()).add(j)

    def view(self, history: History, state: list, i: int) -> tuple[list, dict[int, int]]:
        """Full-length snapshot for reader i, plus the stale versions it used."""
        dirty = self._dirty.get(i)
        if not dirty:
            return state, {}
        snap = list(state)
        stale = {}
        for j in sorted(dirty):
            v = self.read(history, i, j)
            if v < history.latest(j):
                snap[j] = history.at(j, v)
                stale[j] = v
        return snap, stale

    def caught_up(self) -> bool:
        return not any(self._dirty.values())


@dataclass
class Activation:
    step: int
    nodes: tuple[int, ...]
    rules: tuple[str | None, ...]
    versions: dict[int, dict[int, int]]

    def to_json(self) -> str:
        return json.dumps(
            {
                "step": self.step,
                "nodes": list(self.nodes),
                "rules": list(self.rules),
                "versions": {str(r): {str(j): v for j, v in sorted(vs.items())}
                             for r, vs in sorted(self.versions.items())},
            },
            separators=(",", ":"),
        )


@dataclass
class Trace:
    """Outcome of one run.  ``activations`` holds one record per step
    (empty when recording is off); ``versions`` in a record lists only the
    reads that returned an out-of-date version."""

    problem: str
    scheduler: str
    staleness: int
    seed: int
    activations: list[Activation] = field(default_factory=list)
    steps: int = 0
    node_activations: int = 0
    moves: int = 0
    rounds: int = 0
    first_round_step: int | None = None
    moves_after_first_round: int = 0
    final: list = field(default_factory=list)
    converged: bool = False
    # live run internals, for continuing past convergence; not exported
    history: History | None = field(default=None, repr=False, compare=False)
    views: ViewTable | None = field(default=None, repr=False, compare=False)

    def final_digest(self) -> str:
        return hashlib.sha256(json.dumps(self.final[1:]).encode()).hexdigest()

    def summary(self) -> dict:
        return {
            "summary": True,
            "problem": self.problem,
            "scheduler": self.scheduler,
            "staleness": self.staleness,
            "seed": self.seed,
            "steps": self.steps,
            "activations": self.node_activations,
            "moves": self.moves,
            "rounds": self.rounds,
            "moves_after_first_round": self.moves_after_first_round,
            "converged": self.converged,
            "final_digest": self.final_digest(),
        }

    def to_jsonl(self) -> str:
        lines = [a.to_json() for a in self.activations]
        lines.append(json.dumps(self.summary(), sort_keys=True, separators=(",", ":")))
        return "\n".join(lines) + "\n"


def check_state(rules: RuleSet, state: Sequence) -> None:
    n = rules.graph.n
    if len(state) != n + 1:
        raise ValueError(f"state must have n + 1 = {n + 1} slots (slot 0 unused), got {len(state)}")
    for i in range(1, n + 1):
        v = state[i]
        if rules.colour:
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ValueError(f"node {i}: colour must be a positive integer, got {v!r}")
        elif v not in (IN, OUT):
            raise ValueError(f"node {i}: membership must be IN or OUT, got {v!r}")


def is_silent(rules: RuleSet, state: Sequence) -> bool:
    """No rule enabled anywhere, reading the exact current state."""
    return all(rules.enabled(state, i, check_exclusive=False) is None for i in rules.graph.ids)


def enabled_nodes(rules: RuleSet, state: Sequence, which: int | None = None) -> list[int]:
    """Nodes with some rule enabled, or only rule ``which`` (0 for F1, 1 for F2)."""
    if which is None:
        return [i for i in rules.graph.ids if rules.enabled(state, i) is not None]
    guard = rules.rules[which].guard
    return [i for i in rules.graph.ids if guard(state, i)]


def activate(rules: RuleSet, state: list, history: History, views: ViewTable | None, i: int,
             check_exclusive: bool = True) -> str | None:
    """Evaluate i's guards on its view and fire the first enabled rule in place.

    Returns the fired rule's name.  All writes of one action land together.
    """
    snap = state if views is None else views.view(history, state, i)[0]
    return _fire(rules, state, history, views, snap, i, check_exclusive)


def _fire(rules, state, history, views, snap, i, check_exclusive):
    rule = rules.enabled(snap, i, check_exclusive)
    if rule is None:
        return None
    for j, v in rule.action(snap, i).items():
        state[j] = v
        history.append(j, v)
        if views is not None:
            views.note_write(history, j)
    return rule.name


def execute_round(rules: RuleSet, state: Sequence, order: Iterable[int]) -> tuple[list, int]:
    """Activate nodes one by one in ``order`` with fresh reads.  Returns (state, moves)."""
    state = list(state)
    moves = 0
    for i in order:
        rule = rules.enabled(state, i)
        if rule is not None:
            for j, v in rule.action(state, i).items():
                state[j] = v
            moves += 1
    return state, moves


def synchronous_step(rules: RuleSet, state: Sequence) -> tuple[list, int]:
    """Every node evaluates on the same pre-step state, then all actions apply."""
    pre = list(state)
    post = list(state)
    moves = 0
    for i in rules.graph.ids:
        rule = rules.enabled(pre, i)
        if rule is not None:
            for j, v in rule.action(pre, i).items():
                post[j] = v
            moves += 1
    return post, moves


def run(rules: RuleSet, init: Sequence, cfg: SchedulerConfig, *, record: bool = True,
        check_exclusive: bool = True, read_log: list | None = None) -> Trace:
    """Run until the state is silent (and, under amr, every view has caught up).

    Silence is checked at round boundaries, so a run from a silent state takes
    exactly one round.  Raises NonTermination when ``cfg.max_steps`` runs out.
    """
    check_state(rules, init)
    g = rules.graph
    n = g.n
    ids = list(g.ids)
    state = list(init)
    history = History(state)
    rng = random.Random(cfg.seed)
    views = ViewTable(cfg.staleness, rng, rules.read_set, read_log) if cfg.kind == "amr" else None
    budget = cfg.max_steps or default_max_steps(n, g.m, cfg.kind)
    trace = Trace(rules.problem, cfg.kind, cfg.staleness, cfg.seed)

    pending = set(ids)
    round_age = 0
    for step in range(budget):
        nodes = _select(cfg.kind, rng, ids, pending, round_age)
        fired: list[str | None] = []
        stale_reads: dict[int, dict[int, int]] = {}
        step_moves = 0
        if cfg.kind == "synchronous":
            pre = list(state)
            writes: list[tuple[int, object]] = []
            for i in nodes:
                rule = rules.enabled(pre, i, check_exclusive)
                fired.append(rule.name if rule else None)
                if rule is not None:
                    writes.extend(rule.action(pre, i).items())
                    step_moves += 1
            for j, v in writes:
                state[j] = v
                history.append(j, v)
        else:
            for i in nodes:
                if views is None:
                    snap = state
                else:
                    snap, stale = views.view(history, state, i)
                    if stale:
                        stale_reads[i] = stale
                name = _fire(rules, state, history, views, snap, i, check_exclusive)
                fired.append(name)
                if name is not None:
                    step_moves += 1

        trace.steps = step + 1
        trace.node_activations += len(nodes)
        trace.moves += step_moves
        if trace.first_round_step is not None:
            trace.moves_after_first_round += step_moves
        if record:
            trace.activations.append(Activation(step, tuple(nodes), tuple(fired), stale_reads))

        pending.difference_update(nodes)
        round_age += 1
        if not pending:
            trace.rounds += 1
            if trace.first_round_step is None:
                trace.first_round_step = step
            pending = set(ids)
            round_age = 0
            if is_silent(rules, state) and (views is None or views.caught_up()):
                trace.converged = True
                break

    trace.final = state
    trace.history, trace.views = history, views
    if not trace.converged:
        raise NonTermination(trace)
    return trace


def _select(kind: str, rng: random.Random, ids: list[int], pending: set[int], round_age: int) -> list[int]:
    n = len(ids)
    overdue = round_age >= n
    if kind == "central":
        # weak fairness: a round that has dragged on for n steps gets its stragglers in ID order
        return [min(pending)] if overdue else [rng.randint(1, n)]
    if kind == "synchronous":
        return ids
    chosen = [i for i in ids if rng.random() < 0.5]
    if not chosen:
        chosen = [rng.randint(1, n)]
    if overdue:
        chosen = sorted(set(chosen) | pending)
    rng.shuffle(chosen)
    return chosen


def initial_state(rules: RuleSet, kind: str, seed: int = 0) -> list:
    """``random``, ``all-in`` or ``all-out``.  Random colours are uniform on [1, n]."""
    n = rules.graph.n
    if kind == "random":
        rng = random.Random(seed)
        if rules.colour:
            return [None] + [rng.randint(1, n) for _ in range(n)]
        return [None] + [IN if rng.random() < 0.5 else OUT for _ in range(n)]
    if rules.colour:
        raise ValueError(f"initial state {kind!r} is meaningless for colouring")
    if kind == "all-in":
        return [None] + [IN] * n
    if kind == "all-out":
        return [None] + [OUT] * n
    raise ValueError(f"unknown initial state kind {kind!r}")
