import random

import pytest

from daig.lang.cfg import Cfg, CfgError, Edge
from daig.lang.loops import IrreducibleError, analyze_loops
from daig.lang.parser import parse_program
from daig.lang.syntax import SKIP, Assign, IntLit

from helpers import APPEND_SRC, brute_force_dominators, brute_force_natural_loops
from daig.workload import gen_program_source


def diamond() -> Cfg:
    s = Assign("x", IntLit(1))
    edges = {Edge(0, s, 1), Edge(0, SKIP, 2), Edge(1, SKIP, 3), Edge(2, s, 3)}
    return Cfg(frozenset({0, 1, 2, 3}), frozenset(edges), entry=0, exit=3)


def test_acyclic_diamond():
    loops = analyze_loops(diamond())
    assert not loops.back_edges
    assert loops.fwd_edges == diamond().edges
    assert list(loops.join_indices) == [3]
    assert len(loops.join_indices[3]) == 2
    # ascending source id: the edge from l1 gets index 1
    assert [e.src for e in loops.join_indices[3]] == [1, 2]


def test_append_loop_structure():
    cfg = parse_program(APPEND_SRC).proc("main").cfg
    loops = analyze_loops(cfg)
    (back,) = loops.back_edges
    assert loops.natural_loops[back.dst] >= {back.src}
    assert back.dst not in loops.natural_loops[back.dst]


def test_two_sequential_loops_are_disjoint():
    src = """
    fn main() {
      i = 0;
      while (i < 3) { i = i + 1; }
      j = 0;
      while (j < 4) { j = j + 1; }
    }
    """
    cfg = parse_program(src).proc("main").cfg
    loops = analyze_loops(cfg)
    assert len(loops.natural_loops) == 2
    bodies = list(loops.natural_loops.values())
    assert not (bodies[0] & bodies[1])
    # agree with the definition-level loop finder
    assert {h: set(b) for h, b in loops.natural_loops.items()} == brute_force_natural_loops(cfg)


def test_dominators_match_brute_force_on_random_programs():
    rng = random.Random(31)
    for _ in range(25):
        cfg = parse_program(gen_program_source(rng)).proc("main").cfg
        loops = analyze_loops(cfg)
        assert {l: set(d) for l, d in loops.dominators.items()} == brute_force_dominators(cfg)
        assert {h: set(b) for h, b in loops.natural_loops.items()} == brute_force_natural_loops(cfg)


def test_purity_and_determinism():
    cfg = parse_program(APPEND_SRC).proc("main").cfg
    a = analyze_loops(cfg)
    b = analyze_loops(cfg)
    assert a.fwd_edges == b.fwd_edges
    assert a.back_edges == b.back_edges
    assert a.natural_loops == b.natural_loops
    assert a.join_indices == b.join_indices
    assert a.idom == b.idom


def test_irreducible_graph_reports_offending_edge():
    # Two entries into a cycle; neither cycle node dominates the other.
    s = SKIP
    edges = {Edge(0, s, 1), Edge(0, s, 2), Edge(1, s, 2), Edge(2, s, 1), Edge(1, s, 3)}
    cfg = Cfg(frozenset({0, 1, 2, 3}), frozenset(edges), entry=0, exit=3)
    with pytest.raises(IrreducibleError) as exc:
        analyze_loops(cfg)
    bad = exc.value.edge
    assert {bad.src, bad.dst} <= {1, 2}


def test_unreachable_location_rejected():
    edges = {Edge(0, SKIP, 1)}
    cfg = Cfg(frozenset({0, 1, 9}), frozenset(edges), entry=0, exit=1)
    with pytest.raises(CfgError, match="unreachable"):
        analyze_loops(cfg)


def test_double_back_edge_rejected():
    s1 = Assign("x", IntLit(1))
    edges = {
        Edge(0, SKIP, 1),
        Edge(1, SKIP, 2),
        Edge(2, s1, 1),
        Edge(2, SKIP, 1),  # second back edge into l1
        Edge(1, s1, 3),
    }
    cfg = Cfg(frozenset({0, 1, 2, 3}), frozenset(edges), entry=0, exit=3)
    with pytest.raises(CfgError, match="more than one"):
        analyze_loops(cfg)


def test_enclosing_heads_order_is_outermost_first():
    src = """
    fn main() {
      i = 0;
      while (i < 3) {
        j = 0;
        while (j < 3) { j = j + 1; }
        i = i + 1;
      }
    }
    """
    cfg = parse_program(src).proc("main").cfg
    loops = analyze_loops(cfg)
    heads = sorted(loops.natural_loops, key=lambda h: len(loops.natural_loops[h]))
    inner, outer = heads[0], heads[-1]
    assert inner in loops.natural_loops[outer]
    for loc in loops.natural_loops[inner]:
        assert loops.enclosing_heads(loc) == (outer, inner)
