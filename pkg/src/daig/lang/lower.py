"""Lowering of structured statements onto flow-graph edges.

Shared by the source parser and by structural program edits so both produce
identically shaped graphs.  Two shape guarantees matter downstream:

* each loop head has exactly one incoming back edge, carried by the final
  simple statement of the loop body (or an inserted ``skip`` bridge), and
* every edge that leaves a natural loop originates at the loop's head.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .cfg import Edge, Loc
from .syntax import SKIP, Assume, Expr, Not, Stmt, is_stmt


@dataclass(frozen=True)
class IfBlock:
    cond: Expr
    then_body: tuple["BlockItem", ...]
    else_body: tuple["BlockItem", ...]


@dataclass(frozen=True)
class WhileBlock:
    cond: Expr
    body: tuple["BlockItem", ...]


BlockItem = Union[Stmt, IfBlock, WhileBlock]


@dataclass
class GraphBuilder:
    """Accumulates locations and edges while lowering a statement block."""

    next_id: int
    locs: set[Loc] = field(default_factory=set)
    edges: list[Edge] = field(default_factory=list)
    # Locations that must not become loop heads (the procedure entry, whose
    # cell is pre-filled and so cannot double as an iterate cell).
    protected: set[Loc] = field(default_factory=set)

    def fresh(self) -> Loc:
        loc = self.next_id
        self.next_id += 1
        self.locs.add(loc)
        return loc

    def edge(self, src: Loc, stmt: Stmt, dst: Loc) -> None:
        self.edges.append(Edge(src, stmt, dst))

    # -- lowering ----------------------------------------------------------

    def lower_seq(
        self,
        items: Sequence[BlockItem],
        cur: Loc,
        target: Loc,
        target_is_head: bool = False,
    ) -> None:
        """Lower ``items`` starting at ``cur`` so control ends at ``target``.

        When ``target`` is a loop head, the landing edge is the loop's back
        edge: a trailing simple statement carries it directly, while a
        trailing compound statement (or an empty body) lands on a ``skip``
        bridge so the head keeps a single back edge.
        """
        if not items:
            self.edge(cur, SKIP, target)
            return
        for item in items[:-1]:
            cur = self.lower_item(item, cur)
        last = items[-1]
        if is_stmt(last):
            self.edge(cur, last, target)
        elif not target_is_head:
            self.lower_item(last, cur, into=target)
        else:
            end = self.lower_item(last, cur)
            self.edge(end, SKIP, target)

    def lower_item(
        self, item: BlockItem, cur: Loc, into: Optional[Loc] = None
    ) -> Loc:
        """Lower one item from ``cur``; control continues at the returned
        location (``into`` when supplied)."""
        if is_stmt(item):
            nxt = self.fresh() if into is None else into
            self.edge(cur, item, nxt)
            return nxt
        if isinstance(item, IfBlock):
            join = self.fresh() if into is None else into
            self._lower_branch(cur, item.cond, item.then_body, join)
            self._lower_branch(cur, Not(item.cond), item.else_body, join)
            return join
        if isinstance(item, WhileBlock):
            head = cur
            if head in self.protected:
                head = self.fresh()
                self.edge(cur, SKIP, head)
            body_start = self.fresh()
            self.edge(head, Assume(item.cond), body_start)
            self.lower_seq(item.body, body_start, head, target_is_head=True)
            exit_loc = self.fresh() if into is None else into
            self.edge(head, Assume(Not(item.cond)), exit_loc)
            return exit_loc
        raise TypeError(f"cannot lower {item!r}")

    def _lower_branch(
        self, src: Loc, guard: Expr, body: tuple[BlockItem, ...], join: Loc
    ) -> None:
        if not body:
            self.edge(src, Assume(guard), join)
        else:
            start = self.fresh()
            self.edge(src, Assume(guard), start)
            self.lower_seq(body, start, join)
