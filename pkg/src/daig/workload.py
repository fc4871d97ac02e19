"""Synthetic edit/query workloads and the four analysis configurations.

A workload grows a program from ``fn main() { skip; }`` by seeded random
insertions (plain statement, if, or while, with configurable mix), issuing
a fixed number of location queries between edits.  The same seed produces
identical edit and query streams in every configuration, so answers can be
compared exactly while the amount of reused work differs.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from typing import Iterable, Optional

from .batch import batch_analyze
from .engine import Engine
from .lang.cfg import Cfg, Loc
from .lang.edits import InsertIf, InsertStmtAfter, InsertWhile, ProgramEdit, apply_edit
from .lang.loops import analyze_loops
from .lang.parser import parse_program
from .lang.syntax import (
    And,
    ArrayRead,
    ArrayWrite,
    Assign,
    Binop,
    Expr,
    IntLit,
    Not,
    Or,
    Print,
    Skip,
    Stmt,
    Var,
)
from .domains import domain_by_name

CONFIGS = ("Batch", "Incremental", "DemandDriven", "IncrementalDemandDriven")

EMPTY_MAIN = "fn main() { skip; }"

# Base program for the interprocedural workload mode: edits still target
# main, but inserted statements may call the helper procedures.
INTERPROC_BASE = """
fn main() { x0 = 1; }
fn inc(p) { ret = p + 1; }
fn clamp(p) { if (p < 0) { ret = 0; } else { ret = p; } }
"""
INTERPROC_CALLEES = ("inc", "clamp")


@dataclass(frozen=True)
class WorkloadSpec:
    seed: int
    edit_count: int
    queries_per_edit: int = 5
    p_stmt: float = 0.85
    p_if: float = 0.10
    p_while: float = 0.05
    domain: str = "interval"
    config: str = "IncrementalDemandDriven"
    mode: str = "eq"
    trial: int = 0
    # Separate flagged mode: grow main inside a small multi-procedure
    # program, with inserted statements occasionally calling the helpers.
    interproc: bool = False

    def __post_init__(self):
        if abs(self.p_stmt + self.p_if + self.p_while - 1.0) > 1e-9:
            raise ValueError("edit-kind probabilities must sum to 1")
        if self.config not in CONFIGS:
            raise ValueError(f"unknown configuration {self.config!r}")


@dataclass(frozen=True)
class LatencyRecord:
    trial: int
    seed: int
    config: str
    edit_index: int
    op: str  # "edit" | "query"
    latency_ns: int
    program_locs: int
    transfer_evals: int
    join_evals: int
    widen_evals: int
    memo_hits: int
    cells_dirtied: int
    answer: str = ""

    CSV_FIELDS = (
        "trial", "seed", "config", "edit_index", "op", "latency_ns",
        "program_locs", "transfer_evals", "join_evals", "widen_evals",
        "memo_hits", "cells_dirtied", "answer",
    )

    def csv_row(self) -> str:
        return ",".join(str(getattr(self, f)) for f in self.CSV_FIELDS)


# -- random program and edit generation -----------------------------------

VAR_POOL = tuple(f"x{i}" for i in range(8))
CONST_RANGE = (-100, 100)


def gen_expr(rng: random.Random, depth: int = 3, vars: tuple[str, ...] = VAR_POOL) -> Expr:
    if depth <= 0 or rng.random() < 0.35:
        if rng.random() < 0.5:
            c = rng.randint(*CONST_RANGE)
            return IntLit(c) if c >= 0 else Binop("-", IntLit(0), IntLit(-c))
        return Var(rng.choice(vars))
    roll = rng.random()
    if roll < 0.75:
        op = rng.choice(("+", "-", "*", "/"))
        return Binop(op, gen_expr(rng, depth - 1, vars), gen_expr(rng, depth - 1, vars))
    if roll < 0.85:
        return ArrayRead(rng.choice(vars), gen_expr(rng, depth - 1, vars))
    return gen_cond(rng, depth - 1, vars)


def gen_cond(rng: random.Random, depth: int = 2, vars: tuple[str, ...] = VAR_POOL) -> Expr:
    roll = rng.random()
    if roll < 0.70 or depth <= 0:
        op = rng.choice(("<", "<=", ">", ">=", "==", "!="))
        lhs = Var(rng.choice(vars))
        if rng.random() < 0.6:
            c = rng.randint(*CONST_RANGE)
            rhs: Expr = IntLit(c) if c >= 0 else Binop("-", IntLit(0), IntLit(-c))
        else:
            rhs = Var(rng.choice(vars))
        return Binop(op, lhs, rhs)
    if roll < 0.80:
        return Not(gen_cond(rng, depth - 1, vars))
    if roll < 0.90:
        return And(gen_cond(rng, depth - 1, vars), gen_cond(rng, depth - 1, vars))
    return Or(gen_cond(rng, depth - 1, vars), gen_cond(rng, depth - 1, vars))


def gen_simple_stmt(
    rng: random.Random,
    vars: tuple[str, ...] = VAR_POOL,
    callees: tuple[str, ...] = (),
) -> Stmt:
    roll = rng.random()
    if callees and roll < 0.12:
        from .lang.syntax import Call

        return Call(rng.choice(vars), rng.choice(callees), gen_expr(rng, 1, vars))
    if roll < 0.70:
        return Assign(rng.choice(vars), gen_expr(rng, 3, vars))
    if roll < 0.80:
        return Print(gen_expr(rng, 2, vars))
    if roll < 0.90:
        return ArrayWrite(rng.choice(vars), gen_expr(rng, 1, vars), gen_expr(rng, 2, vars))
    return Skip()


def gen_edit(rng: random.Random, cfg: Cfg, spec: Optional[WorkloadSpec] = None) -> ProgramEdit:
    """One random insertion at a uniformly random existing location."""
    p_stmt = spec.p_stmt if spec else 0.85
    p_if = spec.p_if if spec else 0.10
    callees = INTERPROC_CALLEES if (spec and spec.interproc) else ()
    loc = rng.choice(sorted(cfg.locs))
    roll = rng.random()
    if roll < p_stmt:
        return InsertStmtAfter(loc, gen_simple_stmt(rng, callees=callees))
    if roll < p_stmt + p_if:
        then_stmts = (gen_simple_stmt(rng, callees=callees),)
        else_stmts = (gen_simple_stmt(rng, callees=callees),) if rng.random() < 0.5 else ()
        return InsertIf(loc, gen_cond(rng), then_stmts, else_stmts)
    return InsertWhile(loc, gen_cond(rng), (gen_simple_stmt(rng, callees=callees),))


def gen_program_source(
    rng: random.Random,
    *,
    max_stmts: int = 10,
    max_depth: int = 2,
    loop_budget: int = 3,
    vars: tuple[str, ...] = VAR_POOL[:4],
    input_vars: tuple[str, ...] = (),
) -> str:
    """Random single-procedure source text for the consistency suites."""
    budget = [loop_budget]

    def block(depth: int, count: int) -> list[str]:
        lines = []
        for _ in range(count):
            roll = rng.random()
            if roll < 0.62 or depth >= max_depth:
                s = gen_simple_stmt(rng, vars)
                lines.append(stmt_source(s))
            elif roll < 0.85 or budget[0] <= 0:
                inner = block(depth + 1, rng.randint(1, 2))
                lines.append(f"if ({cond_source(rng)}) {{ {' '.join(inner)} }}")
                if rng.random() < 0.5:
                    other = block(depth + 1, rng.randint(1, 2))
                    lines[-1] += f" else {{ {' '.join(other)} }}"
            else:
                budget[0] -= 1
                inner = block(depth + 1, rng.randint(1, 2))
                lines.append(f"while ({cond_source(rng)}) {{ {' '.join(inner)} }}")
        return lines

    def stmt_source(s: Stmt) -> str:
        from .lang.syntax import stmt_text

        return stmt_text(s)

    def cond_source(r: random.Random) -> str:
        from .lang.syntax import expr_text

        return expr_text(gen_cond(r, 1, vars + input_vars or vars))

    body = block(0, rng.randint(3, max_stmts))
    for v in input_vars:
        # Touch inputs so they appear in the analysis; they stay unassigned
        # before first read, reading as unknown abstractly and 0 concretely.
        body.insert(rng.randrange(len(body) + 1), f"print({v});")
    return "fn main() { " + " ".join(body) + " }"


# -- the four configurations ------------------------------------------------


def _summary_op(config: str) -> str:
    """The operation kind whose latency characterizes a configuration:
    exhaustive configurations are measured per edit (re-analysis), the
    demand-driven ones per query."""
    return "edit" if config in ("Batch", "Incremental") else "query"


class _Runner:
    """Shared driver: applies the edit stream, answering queries per config."""

    def __init__(self, spec: WorkloadSpec):
        self.spec = spec
        self.domain = domain_by_name(spec.domain)
        self.records: list[LatencyRecord] = []
        self.answers: list[str] = []
        self.program = parse_program(INTERPROC_BASE if spec.interproc else EMPTY_MAIN)
        self.cfg = self.program.proc("main").cfg
        self.base = dict.fromkeys(
            ("transfer_evals", "join_evals", "widen_evals", "memo_hits", "cells_dirtied"), 0
        )
        self.engine: Optional[Engine] = None
        self.forest = None
        self.batch_result = None
        if spec.config != "Batch":
            if spec.interproc:
                from .interproc import DaigForest

                self.forest = DaigForest(self.program, self.domain, policy_k=1, mode=spec.mode)
            else:
                self.engine = Engine(self.cfg, self.domain, mode=spec.mode)

    def counters(self) -> dict[str, int]:
        out = dict(self.base)
        snap = None
        if self.forest is not None:
            snap = self.forest.metrics().snapshot()
        elif self.engine is not None:
            snap = self.engine.metrics.snapshot()
        if snap is not None:
            for k in out:
                out[k] += snap[k]
        return out

    def _record(self, op: str, edit_index: int, latency_ns: int, answer: str = "") -> None:
        c = self.counters()
        self.records.append(
            LatencyRecord(
                trial=self.spec.trial,
                seed=self.spec.seed,
                config=self.spec.config,
                edit_index=edit_index,
                op=op,
                latency_ns=latency_ns,
                program_locs=len(self.cfg.locs),
                transfer_evals=c["transfer_evals"],
                join_evals=c["join_evals"],
                widen_evals=c["widen_evals"],
                memo_hits=c["memo_hits"],
                cells_dirtied=c["cells_dirtied"],
                answer=answer,
            )
        )

    def apply_edit_op(self, edit_index: int, edit: ProgramEdit) -> None:
        spec = self.spec
        t0 = time.perf_counter_ns()
        if spec.config == "Batch":
            self.cfg, _ = apply_edit(self.cfg, edit, validate=False)
            self.program.replace_cfg("main", self.cfg)
            target = self.program
            if spec.interproc:
                from .lang.inline import inline_program

                target = inline_program(self.program)
            flat_cfg = target.proc("main").cfg
            res = batch_analyze(flat_cfg, analyze_loops(flat_cfg), self.domain, spec.mode)
            self.batch_result = res
            for k in ("transfer_evals", "join_evals", "widen_evals"):
                self.base[k] += getattr(res, k)
        elif self.forest is not None:
            if spec.config == "DemandDriven":
                from .interproc import DaigForest

                self.forest.apply_program_edit("main", edit)
                snap = self.forest.metrics()
                for k in self.base:
                    self.base[k] += getattr(snap, k)
                self.forest = DaigForest(
                    self.program, self.domain, policy_k=1, mode=spec.mode
                )
            else:
                self.forest.apply_program_edit("main", edit)
                if spec.config == "Incremental":
                    for loc in sorted(self.program.proc("main").cfg.locs):
                        self.forest.query_loc("main", loc)
            self.cfg = self.program.proc("main").cfg
        else:
            self.engine.apply_program_edit(edit)
            self.cfg = self.engine.cfg
            if spec.config == "Incremental":
                for loc in sorted(self.cfg.locs):
                    self.engine.query_loc(loc)
            elif spec.config == "DemandDriven":
                self.engine.rebuild(clear_memo=True)
        self._record("edit", edit_index, time.perf_counter_ns() - t0)

    def query_op(self, edit_index: int, loc: Loc) -> str:
        t0 = time.perf_counter_ns()
        if self.spec.config == "Batch":
            value = self.batch_result.invariants[loc]
            if self.spec.interproc and not self.domain.is_bot(value):
                from .lang.inline import is_inline_var

                for var in [v for v in value.bindings if is_inline_var(v)]:
                    value = self.domain.drop_var(value, var)
        elif self.forest is not None:
            value = self.forest.query_loc("main", loc)
        else:
            value = self.engine.query_loc(loc)
        answer = self.domain.to_text(value)
        self._record("query", edit_index, time.perf_counter_ns() - t0, answer)
        self.answers.append(answer)
        return answer


def run_config(spec: WorkloadSpec) -> tuple[list[LatencyRecord], list[str]]:
    """Execute one configuration over the seeded edit/query stream.

    Returns the per-operation latency records and the flat answer list;
    identical seeds yield identical streams across configurations.
    """
    rng = random.Random(spec.seed)
    runner = _Runner(spec)
    for i in range(spec.edit_count):
        edit = gen_edit(rng, runner.cfg, spec)
        runner.apply_edit_op(i, edit)
        locs = sorted(runner.cfg.locs)
        for _ in range(spec.queries_per_edit):
            runner.query_op(i, rng.choice(locs))
    return runner.records, runner.answers


# -- summaries ---------------------------------------------------------------


def nearest_rank(sorted_values: list, q: float):
    """Nearest-rank percentile: the ceil(q/100 * n)-th smallest value."""
    if not sorted_values:
        raise ValueError("no values")
    n = len(sorted_values)
    rank = max(1, math.ceil(q * n / 100))
    return sorted_values[min(rank, n) - 1]


@dataclass
class ConfigSummary:
    config: str
    op: str
    count: int
    mean_ns: float
    p50_ns: int
    p90_ns: int
    p95_ns: int
    p99_ns: int

    CSV_FIELDS = ("config", "op", "count", "mean_ns", "p50_ns", "p90_ns", "p95_ns", "p99_ns")

    def csv_row(self) -> str:
        return ",".join(str(getattr(self, f)) for f in self.CSV_FIELDS)


def summarize(records: Iterable[LatencyRecord]) -> list[ConfigSummary]:
    """Mean and nearest-rank percentiles of each configuration's
    characteristic operation latency."""
    records = list(records)
    if not records:
        raise ValueError("no records to summarize")
    out = []
    for config in CONFIGS:
        lats = sorted(
            r.latency_ns for r in records if r.config == config and r.op == _summary_op(config)
        )
        if not lats:
            continue
        out.append(
            ConfigSummary(
                config=config,
                op=_summary_op(config),
                count=len(lats),
                mean_ns=sum(lats) / len(lats),
                p50_ns=nearest_rank(lats, 50),
                p90_ns=nearest_rank(lats, 90),
                p95_ns=nearest_rank(lats, 95),
                p99_ns=nearest_rank(lats, 99),
            )
        )
    return out


def render_summary(summaries: list[ConfigSummary]) -> str:
    header = f"{'config':<26}{'op':<7}{'n':>7}{'mean':>12}{'p50':>12}{'p90':>12}{'p95':>12}{'p99':>12}"
    lines = [header, "-" * len(header)]
    for s in summaries:
        lines.append(
            f"{s.config:<26}{s.op:<7}{s.count:>7}"
            f"{s.mean_ns / 1e6:>11.3f}m{s.p50_ns / 1e6:>11.3f}m"
            f"{s.p90_ns / 1e6:>11.3f}m{s.p95_ns / 1e6:>11.3f}m{s.p99_ns / 1e6:>11.3f}m"
        )
    return "\n".join(lines)
