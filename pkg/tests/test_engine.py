from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ellsim.algorithms import IN, OUT, PROBLEMS, GuardConflict, make_rules
from ellsim.engine import (
    History,
    NonTermination,
    SchedulerConfig,
    ViewTable,
    activate,
    default_max_steps,
    initial_state,
    is_silent,
    run,
    synchronous_step,
)
from ellsim.graph import Graph, gen_gnm
from ellsim.oracle import check_optimal

K2 = Graph.from_edges(2, [(1, 2)])
G4 = Graph.from_edges(4, [(1, 2), (3, 4)])
TRIANGLE = Graph.from_edges(3, [(1, 2), (1, 3), (2, 3)])

SCHEDULES = [("central", 0), ("distributed", 0), ("synchronous", 0), ("amr", 1), ("amr", 4), ("amr", 16)]


@st.composite
def small_graphs(draw, lo=1, hi=14):
    n = draw(st.integers(lo, hi))
    m = draw(st.integers(0, min(3 * n, n * (n - 1) // 2)))
    return gen_gnm(n, m, draw(st.integers(0, 2**32)))


class TestConfig:
    def test_sync_alias(self):
        assert SchedulerConfig("sync").kind == "synchronous"

    @pytest.mark.parametrize(
        "kwargs",
        [dict(kind="lazy"), dict(kind="central", staleness=2), dict(kind="amr", staleness=-1),
         dict(kind="amr", max_steps=0)],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            SchedulerConfig(**kwargs)

    def test_default_budget(self):
        assert default_max_steps(5, 3, "distributed") == 10 * (10 + 12 + 10)
        assert default_max_steps(5, 3, "central") == 5 * default_max_steps(5, 3, "amr")


class TestSnapshot:
    def _history(self, values):
        h = History([None, values[0]])
        for v in values[1:]:
            h.append(1, v)
        return h

    def test_fresh_when_b_zero(self):
        state = [None, IN, OUT, IN, OUT]
        h = History(state)
        views = ViewTable(0, random.Random(0))
        assert views.snapshot_for(h, 1, {2, 3}) == {1: IN, 2: OUT, 3: IN}

    def test_cursor_at_latest_pins_read(self):
        h = History([None, OUT, OUT])
        h.append(2, IN)
        for b in (0, 1, 5):
            views = ViewTable(b, random.Random(b))
            views.cursors[1] = {2: 1}
            assert views.snapshot_for(h, 1, {2})[2] == IN

    def test_admissible_window(self):
        # subject at version 5, cursor 2, B = 1: only 4 or 5 are allowed
        seen = set()
        for seed in range(200):
            h = self._history([OUT, IN, OUT, IN, OUT, IN])
            views = ViewTable(1, random.Random(seed))
            views.cursors[2] = {1: 2}
            v = views.read(h, 2, 1)
            assert v in (4, 5)
            assert views.cursor(2, 1) == v
            seen.add(v)
        assert seen == {4, 5}

    @given(st.integers(0, 6), st.lists(st.integers(0, 3), min_size=1, max_size=40), st.integers(0, 999))
    def test_monotone_and_bounded(self, b, appends, seed):
        h = History([None, 0, 0])
        views = ViewTable(b, random.Random(seed))
        last = 0
        for k in appends:
            for _ in range(k):
                h.append(2, 0)
            v = views.read(h, 1, 2)
            assert last <= v <= h.latest(2)
            assert v >= h.latest(2) - b
            last = v


class TestActivate:
    def test_mis_k2_higher_id_joins(self):
        rules = make_rules("mis", K2)
        state = [None, OUT, OUT]
        fired = activate(rules, state, History(state), None, 2)
        assert fired == "Impedensable-MIS"
        assert state == [None, OUT, IN]

    def test_mvc_isolated_node_leaves(self):
        rules = make_rules("mvc", Graph.from_edges(1, []))
        state = [None, IN]
        assert activate(rules, state, History(state), None, 1) == "Impedensable-MVC"
        assert state == [None, OUT]

    def test_mds_g4_node3_waits_for_node4(self):
        rules = make_rules("sdmds", G4)
        state = [None, IN, IN, IN, IN]
        assert activate(rules, state, History(state), None, 3) is None
        assert state == [None, IN, IN, IN, IN]

    def test_tds_swap_is_one_activation(self):
        # centre 1 OUT, leaves 2..4; {2,3,4} IN is minimal but swappable for {1}
        g = Graph.from_edges(4, [(1, 2), (1, 3), (1, 4)])
        rules = make_rules("2ds", g)
        state = [None, OUT, IN, IN, IN]
        h = History(state)
        before = [len(x) for x in h.values]
        fired = activate(rules, state, h, None, 1)
        assert fired == "Impedensable-2DS"
        assert state == [None, IN, OUT, OUT, IN]
        grew = [len(x) - b for x, b in zip(h.values, before)]
        assert grew == [0, 1, 1, 1, 0]


class TestSilence:
    def test_mvc_k2(self):
        rules = make_rules("mvc", K2)
        assert is_silent(rules, [None, IN, OUT])
        assert not is_silent(rules, [None, IN, IN])

    def test_mis_empty_graph(self):
        rules = make_rules("mis", Graph.from_edges(5, []))
        assert is_silent(rules, [None] + [IN] * 5)


class TestRun:
    def test_mis_g4_central(self):
        rules = make_rules("mis", G4)
        tr = run(rules, initial_state(rules, "all-out"), SchedulerConfig("central", seed=3))
        assert tr.converged
        assert tr.moves <= 8
        ins = {i for i in G4.ids if tr.final[i] == IN}
        assert len(ins & {1, 2}) == 1 and len(ins & {3, 4}) == 1
        assert check_optimal("mis", G4, tr.final).optimal

    def test_gc_triangle_sync(self):
        rules = make_rules("gc", TRIANGLE)
        tr = run(rules, [None, 1, 1, 1], SchedulerConfig("sync"))
        assert sorted(tr.final[1:]) == [1, 2, 3]
        assert tr.moves <= 3 + 4 * 3

    @pytest.mark.parametrize("problem", PROBLEMS)
    @pytest.mark.parametrize("kind,b", SCHEDULES)
    def test_optimal_start_is_one_quiet_round(self, problem, kind, b):
        g = gen_gnm(9, 14, 5)
        rules = make_rules(problem, g)
        first = run(rules, initial_state(rules, "random", 1), SchedulerConfig("central", seed=1))
        tr = run(rules, first.final, SchedulerConfig(kind, b, seed=2))
        assert tr.moves == 0 and tr.rounds == 1 and tr.converged

    def test_budget_exhaustion_carries_trace(self):
        rules = make_rules("mis", G4)
        with pytest.raises(NonTermination) as info:
            run(rules, [None, IN, IN, IN, IN], SchedulerConfig("central", max_steps=1))
        assert info.value.trace.steps == 1
        assert not info.value.trace.converged

    def test_init_validated(self):
        with pytest.raises(ValueError):
            run(make_rules("mis", K2), [None, IN], SchedulerConfig())
        with pytest.raises(ValueError):
            run(make_rules("gc", K2), [None, 0, 1], SchedulerConfig())
        with pytest.raises(ValueError):
            initial_state(make_rules("gc", K2), "all-in")

    def test_trace_export(self):
        rules = make_rules("mis", G4)
        tr = run(rules, [None, OUT, OUT, OUT, OUT], SchedulerConfig("amr", 2, seed=4))
        lines = [json.loads(x) for x in tr.to_jsonl().splitlines()]
        assert len(lines) == tr.steps + 1
        assert {"step", "nodes", "rules", "versions"} <= set(lines[0])
        summary = lines[-1]
        assert summary["moves"] == tr.moves and summary["rounds"] == tr.rounds
        assert summary["converged"] is True and len(summary["final_digest"]) == 64

    def test_exclusivity_asserted(self):
        rules = make_rules("mis", K2)
        both = rules.rules[0].__class__("always", lambda s, i: True, lambda s, i: {})
        broken = rules.__class__("mis", K2, (both, both), 2)
        with pytest.raises(GuardConflict):
            run(broken, [None, IN, IN], SchedulerConfig())


class TestProperties:
    @settings(max_examples=40, deadline=None)
    @given(small_graphs(), st.sampled_from(PROBLEMS), st.sampled_from(SCHEDULES), st.integers(0, 999))
    def test_deterministic(self, g, problem, sched, seed):
        rules = make_rules(problem, g)
        init = initial_state(rules, "random", seed)
        cfg = SchedulerConfig(sched[0], sched[1], seed)
        assert run(rules, init, cfg).to_jsonl() == run(rules, init, cfg).to_jsonl()

    @settings(max_examples=40, deadline=None)
    @given(small_graphs(), st.sampled_from(PROBLEMS), st.integers(0, 999))
    def test_sync_rounds_equal_steps(self, g, problem, seed):
        rules = make_rules(problem, g)
        tr = run(rules, initial_state(rules, "random", seed), SchedulerConfig("sync", seed=seed))
        assert tr.rounds == tr.steps

    @settings(max_examples=40, deadline=None)
    @given(small_graphs(), st.sampled_from(PROBLEMS), st.sampled_from(SCHEDULES), st.integers(0, 999))
    def test_moves_at_most_activations(self, g, problem, sched, seed):
        rules = make_rules(problem, g)
        tr = run(rules, initial_state(rules, "random", seed), SchedulerConfig(sched[0], sched[1], seed))
        assert tr.moves <= tr.node_activations
        fired = sum(r is not None for a in tr.activations for r in a.rules)
        assert fired == tr.moves

    @settings(max_examples=40, deadline=None)
    @given(small_graphs(lo=2), st.sampled_from(PROBLEMS), st.integers(0, 16), st.integers(0, 999))
    def test_amr_reads_monotone_and_within_bound(self, g, problem, b, seed):
        rules = make_rules(problem, g)
        log: list = []
        run(rules, initial_state(rules, "random", seed), SchedulerConfig("amr", b, seed), read_log=log)
        last: dict = {}
        for reader, subject, version, latest in log:
            assert latest - b <= version <= latest
            assert version >= last.get((reader, subject), 0)
            last[reader, subject] = version

    @settings(max_examples=30, deadline=None)
    @given(small_graphs(), st.sampled_from(PROBLEMS), st.integers(0, 999))
    def test_write_atomicity(self, g, problem, seed):
        # every history entry past the first comes from exactly one fired action,
        # and 2ds swaps write three nodes in one activation
        rules = make_rules(problem, g)
        tr = run(rules, initial_state(rules, "random", seed), SchedulerConfig("amr", 3, seed))
        per_rule = {rules.f1.name: 0, rules.f2.name: 0}
        for a in tr.activations:
            for r in a.rules:
                if r is not None:
                    per_rule[r] += 1
        writes = tr.history.writes()
        if problem == "2ds":
            assert per_rule[rules.f1.name] + per_rule[rules.f2.name] <= writes <= (
                per_rule[rules.f1.name] + 3 * per_rule[rules.f2.name])
        else:
            assert writes == tr.moves
        for i in g.ids:
            assert tr.history.values[i][-1] == tr.final[i]

    @settings(max_examples=25, deadline=None)
    @given(small_graphs(lo=2), st.sampled_from(PROBLEMS), st.integers(0, 999))
    def test_closure_after_convergence(self, g, problem, seed):
        rules = make_rules(problem, g)
        tr = run(rules, initial_state(rules, "random", seed), SchedulerConfig("amr", 16, seed))
        state = list(tr.final)
        rng = random.Random(seed)
        for _ in range(10 * g.n):
            assert activate(rules, state, tr.history, tr.views, rng.randint(1, g.n)) is None
        assert state == tr.final

    @settings(max_examples=30, deadline=None)
    @given(small_graphs(), st.sampled_from(PROBLEMS), st.integers(0, 999))
    def test_synchronous_step_matches_engine(self, g, problem, seed):
        rules = make_rules(problem, g)
        init = initial_state(rules, "random", seed)
        tr = run(rules, init, SchedulerConfig("sync", max_steps=1000))
        state = list(init)
        for _ in range(tr.steps):
            state, _ = synchronous_step(rules, state)
        assert state == tr.final
