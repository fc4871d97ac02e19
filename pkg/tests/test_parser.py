import random

import pytest

from daig.lang.cfg import CfgError
from daig.lang.loops import analyze_loops
from daig.lang.parser import ParseError, parse_expr_text, parse_program, parse_stmt_text
from daig.lang.syntax import Assign, Assume, Call, IntLit, Not, expr_text, stmt_text
from daig.workload import gen_program_source, gen_simple_stmt, gen_cond

from helpers import APPEND_SRC


def test_minimal_program():
    prog = parse_program("fn main() { x = 1; }")
    cfg = prog.proc("main").cfg
    assert len(cfg.locs) == 2
    (edge,) = cfg.edges
    assert edge.stmt == Assign("x", IntLit(1))
    assert edge.src == cfg.entry and edge.dst == cfg.exit


def test_if_else_compiles_to_paired_assumes():
    prog = parse_program("fn main() { if (x < 1) { y = 1; } else { y = 2; } }")
    cfg = prog.proc("main").cfg
    guards = [e for e in cfg.edges if isinstance(e.stmt, Assume)]
    assert len(guards) == 2
    assert {e.src for e in guards} == {cfg.entry}
    conds = {stmt_text(e.stmt) for e in guards}
    assert conds == {"assume((x < 1));", "assume(!(x < 1));"}


def test_append_program_shape():
    cfg = parse_program(APPEND_SRC).proc("main").cfg
    assert len(cfg.locs) == 8
    loops = analyze_loops(cfg)
    assert len(loops.back_edges) == 1
    (back,) = loops.back_edges
    head = back.dst
    assert loops.natural_loops[head] == frozenset({back.src})
    # the return location joins the two branches
    assert len(loops.join_indices[cfg.exit]) == 2
    # loop statements: stay-in guard and exit guard both leave the head
    head_out = {stmt_text(e.stmt) for e in cfg.out_edges(head)}
    assert head_out == {"assume((rn != 0));", "assume(!(rn != 0));"}


def test_comments_and_empty_blocks():
    prog = parse_program(
        """
        // entry procedure
        fn main() {
          skip; // nothing
          if (x == 0) { }   // empty branches are fine
        }
        """
    )
    cfg = prog.proc("main").cfg
    assert cfg.entry in cfg.locs


def test_while_as_first_statement_keeps_entry_plain():
    prog = parse_program("fn main() { while (x < 3) { x = x + 1; } }")
    cfg = prog.proc("main").cfg
    loops = analyze_loops(cfg)
    assert cfg.entry not in loops.natural_loops
    assert not loops.enclosing_heads(cfg.entry)


def test_syntax_error_carries_position():
    with pytest.raises(ParseError) as exc:
        parse_program("fn main() {\n  x = ;\n}")
    assert exc.value.line == 2
    assert exc.value.col > 0


def test_duplicate_procedure_rejected():
    with pytest.raises(ParseError, match="duplicate"):
        parse_program("fn main() { skip; } fn main() { skip; }")


def test_unresolved_call_rejected():
    with pytest.raises(CfgError, match="unknown procedure"):
        parse_program("fn main() { x = nope(1); }")


def test_call_arity_checked():
    with pytest.raises(CfgError, match="requires an argument"):
        parse_program("fn main() { x = f(); } fn f(p) { ret = p; }")
    with pytest.raises(CfgError, match="takes no argument"):
        parse_program("fn main() { x = f(1); } fn f() { ret = 0; }")


def test_recursive_cycle_rejected():
    src = """
    fn main() { x = f(1); }
    fn f(p) { ret = g(p); }
    fn g(p) { ret = f(p); }
    """
    with pytest.raises(CfgError, match="recursive"):
        parse_program(src)


def test_missing_main_rejected():
    with pytest.raises(CfgError, match="main"):
        parse_program("fn helper() { skip; }")


def test_call_statement_parses():
    prog = parse_program("fn main() { x = f(y + 1); } fn f(p) { ret = p; }")
    cfg = prog.proc("main").cfg
    (edge,) = [e for e in cfg.edges if isinstance(e.stmt, Call)]
    assert edge.stmt.lhs == "x" and edge.stmt.callee == "f"


def test_statement_text_round_trips():
    rng = random.Random(2024)
    for _ in range(300):
        s = gen_simple_stmt(rng)
        assert parse_stmt_text(stmt_text(s)) == s
    for _ in range(300):
        e = gen_cond(rng)
        assert parse_expr_text(expr_text(e)) == e


def test_negative_literals_render_parsably():
    assert expr_text(IntLit(-5)) == "(0 - 5)"
    assert parse_expr_text("!x") == Not(parse_expr_text("x"))


def test_generated_programs_parse_and_are_reducible():
    rng = random.Random(11)
    for _ in range(120):
        src = gen_program_source(rng)
        prog = parse_program(src)
        for proc in prog.procedures.values():
            proc.cfg.validate()
            analyze_loops(proc.cfg)  # raises if irreducible or unspanned
