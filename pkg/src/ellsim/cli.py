"""Command-line front end: gen, run, bench, verify.

Exit codes: 0 success, 2 parse/usage error, 3 non-termination, 4 oracle violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
import time
from dataclasses import astuple, dataclass, fields
from pathlib import Path

from ellsim.algorithms import IN, OUT, PROBLEMS, make_rules
from ellsim.engine import KINDS, NonTermination, SchedulerConfig, initial_state, run
from ellsim.graph import (
    Graph,
    ParseError,
    SdmdsInstance,
    gen_gnm,
    parse_edge_list,
    parse_sdmds_instance,
    uniform_instance,
    write_edge_list,
)
from ellsim.oracle import (
    OracleSizeError,
    check_bounds,
    check_lattice_linearity,
    check_optimal,
    enumerate_lattices,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NONTERM = 3
EXIT_ORACLE = 4

SCHEDULERS = ("central", "distributed", "sync", "amr")
# "mds" is the uniform SDMDS reduction, accepted wherever a problem is named
_PROBLEM_ALIASES = {"mds": "sdmds"}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass
class BenchRecord:
    algorithm: str
    scheduler: str
    staleness: int
    seed: int
    n: int
    m: int
    moves: int
    rounds: int
    activations: int
    wall_ns: int
    optimal: bool


BENCH_COLUMNS = tuple(f.name for f in fields(BenchRecord))


# --- input helpers ----------------------------------------------------------

def _problem(name: str) -> str:
    p = _PROBLEM_ALIASES.get(name, name)
    if p not in PROBLEMS:
        raise CliError(f"unknown problem {name!r}", EXIT_PARSE)
    return p


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror}", EXIT_PARSE) from None


def load_instance(problem: str, graph_path: str | None, instance_path: str | None):
    """Graph (or SdmdsInstance for sdmds) from whichever file was given."""
    if (graph_path is None) == (instance_path is None):
        raise CliError("give exactly one of --graph or --instance", EXIT_PARSE)
    if instance_path is not None:
        inst = parse_sdmds_instance(_read(instance_path))
        return inst if problem == "sdmds" else inst.graph
    g = parse_edge_list(_read(graph_path))
    return uniform_instance(g) if problem == "sdmds" else g


def parse_state(text: str, n: int, colour: bool) -> list:
    """One token per node in ID order: IN/OUT, or a positive colour.  '#' starts a comment."""
    tokens = []
    for line in text.splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    if len(tokens) != n:
        raise ParseError(f"state file has {len(tokens)} entries, graph has {n} nodes")
    state: list = [None]
    for pos, tok in enumerate(tokens, 1):
        if colour:
            if not tok.isdigit() or int(tok) < 1:
                raise ParseError(f"node {pos}: colour must be a positive integer, got {tok!r}")
            state.append(int(tok))
        else:
            t = tok.upper()
            if t not in (IN, OUT):
                raise ParseError(f"node {pos}: expected IN or OUT, got {tok!r}")
            state.append(t)
    return state


def _initial(rules, spec: str, seed: int) -> list:
    if spec.startswith("file:"):
        return parse_state(_read(spec[5:]), rules.graph.n, rules.colour)
    try:
        return initial_state(rules, spec, seed)
    except ValueError as e:
        raise CliError(str(e), EXIT_PARSE) from None


def _int_list(text: str) -> list[int]:
    """``a,b,c`` or an inclusive range ``lo:hi:step``."""
    try:
        if ":" in text:
            lo, hi, step = (int(x) for x in text.split(":"))
            return list(range(lo, hi + 1, step))
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


def _str_list(text: str) -> list[str]:
    return [x for x in text.split(",") if x]


# --- commands -----------------------------------------------------------------

def cmd_gen(args) -> int:
    try:
        g = gen_gnm(args.n, args.m, args.seed)
    except ValueError as e:
        raise CliError(str(e), EXIT_PARSE) from None
    text = write_edge_list(g)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        try:
            Path(args.out).write_text(text)
        except OSError as e:
            raise CliError(f"cannot write {args.out}: {e.strerror}", EXIT_PARSE) from None
    return EXIT_OK


def cmd_run(args) -> int:
    problem = _problem(args.algo)
    inst = load_instance(problem, args.graph, args.instance)
    rules = make_rules(problem, inst)
    g = rules.graph
    try:
        cfg = SchedulerConfig(args.scheduler, args.staleness, args.seed, args.max_steps)
    except ValueError as e:
        raise CliError(str(e), EXIT_PARSE) from None
    init = _initial(rules, args.init, args.seed)
    try:
        trace = run(rules, init, cfg, record=args.trace is not None)
    except NonTermination as e:
        trace = e.trace
        _write_trace(args.trace, trace)
        print(json.dumps(trace.summary(), sort_keys=True))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NONTERM
    except ValueError as e:
        raise CliError(str(e), EXIT_PARSE) from None
    _write_trace(args.trace, trace)
    verdict = check_optimal(problem, inst, trace.final)
    bounds = check_bounds(problem, g, trace)
    out = trace.summary()
    out.update(
        n=g.n,
        m=g.m,
        optimal=verdict.optimal,
        bound_ok=bounds.ok,
        move_bound=bounds.bound,
        after_first_round_bound=bounds.after_bound,
        final=[x for x in trace.final[1:]],
    )
    print(json.dumps(out, sort_keys=True))
    if not verdict.optimal:
        print(f"error: final state not optimal (witness {verdict.witness})", file=sys.stderr)
        return EXIT_ORACLE
    return EXIT_OK


def _write_trace(path: str | None, trace) -> None:
    if path is None:
        return
    try:
        Path(path).write_text(trace.to_jsonl())
    except OSError as e:
        raise CliError(f"cannot write {path}: {e.strerror}", EXIT_PARSE) from None


def derive_seed(master: int, *parts) -> int:
    # str seeding is stable across runs and platforms
    return random.Random(":".join(map(str, (master, *parts)))).getrandbits(32)


def bench(algos, n: int, ms, trials: int, schedulers, stalenesses, seed: int,
          timing: bool = False) -> list[BenchRecord]:
    """One record per (algorithm, m, trial, scheduler, B), in that nesting order.

    The graph and initial state depend only on (m, trial), so every algorithm and
    scheduler sees the same inputs.  ``wall_ns`` stays 0 unless ``timing`` is set,
    keeping default output byte-deterministic.
    """
    problems = [_problem(a) for a in algos]
    configs = []
    for kind in schedulers:
        if kind not in SCHEDULERS and kind not in KINDS:
            raise CliError(f"unknown scheduler {kind!r}", EXIT_PARSE)
        for b in (stalenesses if kind == "amr" else [0]):
            configs.append((kind, b))
    rows = []
    for problem in problems:
        for m in ms:
            for trial in range(trials):
                try:
                    g = gen_gnm(n, m, derive_seed(seed, "graph", m, trial))
                except ValueError as e:
                    raise CliError(str(e), EXIT_PARSE) from None
                inst = uniform_instance(g) if problem == "sdmds" else g
                rules = make_rules(problem, inst)
                init = initial_state(rules, "random", derive_seed(seed, "init", m, trial))
                for kind, b in configs:
                    run_seed = derive_seed(seed, "run", m, trial, kind, b)
                    cfg = SchedulerConfig(kind, b, run_seed)
                    t0 = time.perf_counter_ns()
                    try:
                        trace = run(rules, init, cfg, record=False)
                    except NonTermination as e:
                        raise CliError(
                            f"{problem} {kind} B={b} n={n} m={m} trial={trial} seed={run_seed}: {e}",
                            EXIT_NONTERM,
                        ) from None
                    wall = time.perf_counter_ns() - t0 if timing else 0
                    ok = check_optimal(problem, inst, trace.final).optimal
                    rows.append(BenchRecord(problem, cfg.kind, b, run_seed, n, g.m, trace.moves,
                                            trace.rounds, trace.node_activations, wall, ok))
    return rows


def bench_csv(rows: list[BenchRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_COLUMNS)
    for r in rows:
        w.writerow(["true" if v is True else "false" if v is False else v for v in astuple(r)])
    return buf.getvalue()


def cmd_bench(args) -> int:
    rows = bench(args.algo, args.n, args.m, args.trials, args.scheduler, args.staleness,
                 args.seed, args.timing)
    text = bench_csv(rows)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        try:
            Path(args.out).write_text(text)
        except OSError as e:
            raise CliError(f"cannot write {args.out}: {e.strerror}", EXIT_PARSE) from None
    bad = [r for r in rows if not r.optimal]
    if bad:
        print(f"error: {len(bad)} runs ended in a non-optimal state", file=sys.stderr)
        return EXIT_ORACLE
    return EXIT_OK


def cmd_verify(args) -> int:
    problem = _problem(args.problem)
    inst = load_instance(problem, args.graph, args.instance)
    try:
        report = check_lattice_linearity(problem, inst)
        dec = enumerate_lattices(problem, inst)
    except OracleSizeError as e:
        raise CliError(f"size cap exceeded: {e}", EXIT_PARSE) from None
    verdict = "pass" if report.passed else "fail"
    print(f"{len(dec.feasible)} feasible / {len(dec.components)} lattices / "
          f"{len(dec.infeasible)} infeasible / lattice-linear: {verdict}")
    if args.dot:
        Path(args.dot).write_text(dec.to_dot())
    return EXIT_OK if report.passed else EXIT_ORACLE


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ellsim", description="Two-rule self-stabilizing algorithm lab.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a seeded G(n, m) edge list")
    g.add_argument("n", type=int)
    g.add_argument("m", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", help="output file (default stdout)")
    g.set_defaults(func=cmd_gen)

    problems = sorted(PROBLEMS) + sorted(_PROBLEM_ALIASES)

    r = sub.add_parser("run", help="simulate one algorithm until silent")
    r.add_argument("--algo", required=True, choices=problems)
    r.add_argument("--graph")
    r.add_argument("--instance", help="SDMDS JSON instance")
    r.add_argument("--scheduler", default="central", choices=SCHEDULERS)
    r.add_argument("--staleness", type=int, default=0, help="AMR staleness bound B")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--init", default="random", help="random | all-in | all-out | file:PATH")
    r.add_argument("--max-steps", type=int)
    r.add_argument("--trace", help="write the full trace as JSON lines")
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bench", help="sweep algorithms and schedulers, write CSV")
    b.add_argument("--algo", type=_str_list, default=["mis"], help="comma list")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--m", type=_int_list, required=True, help="a,b,c or lo:hi:step")
    b.add_argument("--trials", type=int, default=16)
    b.add_argument("--scheduler", type=_str_list, default=["sync", "amr"], help="comma list")
    b.add_argument("--staleness", type=_int_list, default=[1], help="B values for amr")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", help="CSV file (default stdout)")
    b.add_argument("--timing", action="store_true", help="fill wall_ns (output no longer reproducible)")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", help="exhaustive lattice check on a small instance")
    v.add_argument("problem", choices=problems)
    v.add_argument("graph", nargs="?")
    v.add_argument("--instance")
    v.add_argument("--dot", help="write the lattice decomposition as Graphviz")
    v.set_defaults(func=cmd_verify, graph=None)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
