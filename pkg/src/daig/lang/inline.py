"""Bottom-up call inlining.

Produces a call-free program whose main keeps its original locations, used
as the independent oracle for interprocedural results.  Each inlined call
gets a fresh variable namespace so callee effects cannot leak into caller
variables.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cfg import Cfg, Edge, Loc, Proc, Program
from .syntax import (
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

INLINE_PREFIX = "__inl"


def rename_expr(e: Expr, ren) -> Expr:
    if isinstance(e, IntLit):
        return e
    if isinstance(e, Var):
        return Var(ren(e.name))
    if isinstance(e, ArrayRead):
        return ArrayRead(ren(e.array), rename_expr(e.index, ren))
    if isinstance(e, Binop):
        return Binop(e.op, rename_expr(e.lhs, ren), rename_expr(e.rhs, ren))
    if isinstance(e, Not):
        return Not(rename_expr(e.operand, ren))
    if isinstance(e, And):
        return And(rename_expr(e.lhs, ren), rename_expr(e.rhs, ren))
    if isinstance(e, Or):
        return Or(rename_expr(e.lhs, ren), rename_expr(e.rhs, ren))
    raise TypeError(e)


def rename_stmt(s: Stmt, ren) -> Stmt:
    if isinstance(s, Skip):
        return s
    if isinstance(s, Assign):
        return Assign(ren(s.var), rename_expr(s.rhs, ren))
    if isinstance(s, Assume):
        return Assume(rename_expr(s.cond, ren))
    if isinstance(s, Print):
        return Print(rename_expr(s.arg, ren))
    if isinstance(s, ArrayWrite):
        return ArrayWrite(ren(s.array), rename_expr(s.index, ren), rename_expr(s.rhs, ren))
    if isinstance(s, Call):
        actual = rename_expr(s.actual, ren) if s.actual is not None else None
        return Call(ren(s.lhs), s.callee, actual)
    raise TypeError(s)


def is_inline_var(name: str) -> bool:
    return name.startswith(INLINE_PREFIX)


@dataclass
class _Splicer:
    next_loc: int
    next_instance: int = 0

    def splice(self, cfg: Cfg, callees: dict[str, Proc]) -> Cfg:
        """Replace each call edge with a renamed copy of the callee body."""
        edges = set(cfg.edges)
        locs = set(cfg.locs)
        for e in sorted(cfg.edges, key=Edge.sort_key):
            s = e.stmt
            if not isinstance(s, Call):
                continue
            callee = callees[s.callee]
            prefix = f"{INLINE_PREFIX}{self.next_instance}_"
            self.next_instance += 1
            loc_map: dict[Loc, Loc] = {}
            for l in sorted(callee.cfg.locs):
                loc_map[l] = self.next_loc
                self.next_loc += 1
            locs.update(loc_map.values())

            def ren(name: str, _p=prefix) -> str:
                return _p + name

            edges.remove(e)
            if callee.param is not None:
                bind: Stmt = Assign(prefix + callee.param, s.actual)
            else:
                bind = Skip()
            edges.add(Edge(e.src, bind, loc_map[callee.cfg.entry]))
            for ce in callee.cfg.edges:
                edges.add(Edge(loc_map[ce.src], rename_stmt(ce.stmt, ren), loc_map[ce.dst]))
            edges.add(Edge(loc_map[callee.cfg.exit], Assign(s.lhs, Var(prefix + "ret")), e.dst))
        return Cfg(frozenset(locs), frozenset(edges), cfg.entry, cfg.exit)


def inline_program(program: Program) -> Program:
    """Inline all calls bottom-up; the result has a single call-free main."""
    inlined: dict[str, Proc] = {}
    order = program.call_order()
    max_loc = 0
    for proc in program.procedures.values():
        max_loc = max(max_loc, max(proc.cfg.locs))
    splicer = _Splicer(next_loc=max_loc + 1)
    for name in order:
        proc = program.proc(name)
        cfg = splicer.splice(proc.cfg, inlined)
        inlined[name] = Proc(proc.name, proc.param, cfg)
    main = inlined[program.main]
    return Program(procedures={program.main: main}, main=program.main)
