"""Concrete semantics: single steps and a bounded collecting oracle.

Execution is total up to the distinguished Stuck outcome: failed assumes,
division by zero, and out-of-bounds array accesses have no successor state.
Scalars read as 0 before their first assignment, matching the abstract
domains' treatment of unbound variables as unknown-but-present.
"""

from __future__ import annotations

from typing import Iterable, Optional, Union

from ..lang.cfg import Loc, Program
from ..lang.syntax import (
    And,
    ArrayRead,
    ArrayWrite,
    Assign,
    Assume,
    Binop,
    Call,
    Expr,
    IntLit,
    Not,
    Or,
    Print,
    Skip,
    Stmt,
    Var,
)


class _Stuck:
    __slots__ = ()

    def __repr__(self):
        return "Stuck"


STUCK = _Stuck()


class ConcreteState:
    """Immutable environment of integer scalars and integer arrays."""

    __slots__ = ("env", "arrays", "_key")

    def __init__(self, env: Optional[dict[str, int]] = None,
                 arrays: Optional[dict[str, tuple[int, ...]]] = None):
        self.env = dict(env or {})
        self.arrays = {a: tuple(vs) for a, vs in (arrays or {}).items()}
        self._key = (tuple(sorted(self.env.items())), tuple(sorted(self.arrays.items())))

    def value_of(self, var: str) -> int:
        return self.env.get(var, 0)

    def with_var(self, var: str, value: int) -> "ConcreteState":
        env = dict(self.env)
        env[var] = value
        return ConcreteState(env, self.arrays)

    def with_array(self, arr: str, values: tuple[int, ...]) -> "ConcreteState":
        arrays = dict(self.arrays)
        arrays[arr] = values
        return ConcreteState(self.env, arrays)

    def __eq__(self, other):
        return isinstance(other, ConcreteState) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        parts = [f"{v}:{n}" for v, n in sorted(self.env.items())]
        parts += [f"{a}:{list(vs)}" for a, vs in sorted(self.arrays.items())]
        return "{" + ", ".join(parts) + "}"


def eval_concrete(e: Expr, sigma: ConcreteState) -> Union[int, _Stuck]:
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, Var):
        return sigma.value_of(e.name)
    if isinstance(e, ArrayRead):
        idx = eval_concrete(e.index, sigma)
        if idx is STUCK:
            return STUCK
        arr = sigma.arrays.get(e.array)
        if arr is None or not (0 <= idx < len(arr)):
            return STUCK
        return arr[idx]
    if isinstance(e, Binop):
        a = eval_concrete(e.lhs, sigma)
        if a is STUCK:
            return STUCK
        b = eval_concrete(e.rhs, sigma)
        if b is STUCK:
            return STUCK
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            return STUCK if b == 0 else a // b
        return int({
            "<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b,
            "==": a == b, "!=": a != b,
        }[e.op])
    if isinstance(e, Not):
        v = eval_concrete(e.operand, sigma)
        return STUCK if v is STUCK else int(v == 0)
    if isinstance(e, And):
        a = eval_concrete(e.lhs, sigma)
        if a is STUCK:
            return STUCK
        if a == 0:
            return 0
        b = eval_concrete(e.rhs, sigma)
        return STUCK if b is STUCK else int(b != 0)
    if isinstance(e, Or):
        a = eval_concrete(e.lhs, sigma)
        if a is STUCK:
            return STUCK
        if a != 0:
            return 1
        b = eval_concrete(e.rhs, sigma)
        return STUCK if b is STUCK else int(b != 0)
    raise TypeError(e)


def concrete_step(stmt: Stmt, sigma: ConcreteState) -> Union[ConcreteState, _Stuck]:
    """One statement of the denotational semantics; Stuck models no successor."""
    if isinstance(stmt, Skip):
        return sigma
    if isinstance(stmt, Assign):
        v = eval_concrete(stmt.rhs, sigma)
        return STUCK if v is STUCK else sigma.with_var(stmt.var, v)
    if isinstance(stmt, Assume):
        v = eval_concrete(stmt.cond, sigma)
        if v is STUCK or v == 0:
            return STUCK
        return sigma
    if isinstance(stmt, Print):
        v = eval_concrete(stmt.arg, sigma)
        return STUCK if v is STUCK else sigma
    if isinstance(stmt, ArrayWrite):
        idx = eval_concrete(stmt.index, sigma)
        val = eval_concrete(stmt.rhs, sigma)
        if idx is STUCK or val is STUCK:
            return STUCK
        arr = sigma.arrays.get(stmt.array)
        if arr is None or not (0 <= idx < len(arr)):
            return STUCK
        return sigma.with_array(stmt.array, arr[:idx] + (val,) + arr[idx + 1:])
    if isinstance(stmt, Call):
        raise ValueError("call statements require whole-program execution")
    raise TypeError(stmt)


class _Budget:
    __slots__ = ("left",)

    def __init__(self, steps: int):
        self.left = steps

    def spend(self) -> bool:
        if self.left <= 0:
            return False
        self.left -= 1
        return True


def _run_callee(program: Program, name: str, arg: Optional[int],
                budget: _Budget) -> set[int]:
    """All return values of a callee run to completion (within budget)."""
    proc = program.proc(name)
    sigma0 = ConcreteState({proc.param: arg} if proc.param is not None else {})
    results: set[int] = set()
    frontier: list[tuple[Loc, ConcreteState]] = [(proc.cfg.entry, sigma0)]
    seen: set[tuple[Loc, ConcreteState]] = set()
    while frontier:
        loc, sigma = frontier.pop()
        if loc == proc.cfg.exit:
            results.add(sigma.value_of("ret"))
            continue
        for e in proc.cfg.out_edges(loc):
            if not budget.spend():
                return results
            for nxt in _step_edge(program, e.stmt, sigma, budget):
                key = (e.dst, nxt)
                if key not in seen:
                    seen.add(key)
                    frontier.append((e.dst, nxt))
    return results


def _step_edge(program: Program, stmt: Stmt, sigma: ConcreteState,
               budget: _Budget) -> list[ConcreteState]:
    if isinstance(stmt, Call):
        arg: Optional[int] = None
        if stmt.actual is not None:
            v = eval_concrete(stmt.actual, sigma)
            if v is STUCK:
                return []
            arg = v
        return [sigma.with_var(stmt.lhs, r)
                for r in sorted(_run_callee(program, stmt.callee, arg, budget))]
    nxt = concrete_step(stmt, sigma)
    return [] if nxt is STUCK else [nxt]


def collecting_bounded(
    program: Program,
    input_space: Iterable[ConcreteState],
    step_limit: int,
) -> dict[Loc, set[ConcreteState]]:
    """Concrete states witnessed at each location of main, by enumeration.

    Explores every execution prefix of at most ``step_limit`` statement
    steps from each initial state (calls execute transitively and count
    against the same budget).  Under-approximates the true collecting
    semantics, which suffices for membership-based soundness checks.
    """
    main = program.proc(program.main)
    witnessed: dict[Loc, set[ConcreteState]] = {l: set() for l in main.cfg.locs}
    for sigma0 in input_space:
        frontier: list[tuple[Loc, ConcreteState, int]] = [(main.cfg.entry, sigma0, 0)]
        seen: set[tuple[Loc, ConcreteState]] = {(main.cfg.entry, sigma0)}
        witnessed[main.cfg.entry].add(sigma0)
        while frontier:
            loc, sigma, steps = frontier.pop(0)
            if steps >= step_limit:
                continue
            for e in main.cfg.out_edges(loc):
                budget = _Budget(step_limit - steps)
                for nxt in _step_edge(program, e.stmt, sigma, budget):
                    witnessed[e.dst].add(nxt)
                    key = (e.dst, nxt)
                    if key not in seen:
                        seen.add(key)
                        frontier.append((e.dst, nxt, steps + 1))
    return witnessed
