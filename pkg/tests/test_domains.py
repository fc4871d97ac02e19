import pytest
from hypothesis import given, settings, strategies as st

from daig.domains import CONST, INTERVAL, SIGN, ConcreteState, STUCK, collecting_bounded, concrete_step
from daig.domains.base import ContractViolation
from daig.domains.interval import INTERVAL_BOTTOM, NEG_INF, POS_INF, IntervalState
from daig.lang.parser import parse_program, parse_stmt_text
from daig.lang.syntax import (
    And,
    ArrayRead,
    ArrayWrite,
    Assign,
    Assume,
    Binop,
    Call,
    IntLit,
    Not,
    Or,
    Print,
    Skip,
    Var,
)

from helpers import ivl

VARS = ("x", "y", "z")


# -- strategies ----------------------------------------------------------------

exprs = st.recursive(
    st.one_of(
        st.integers(-20, 20).map(IntLit),
        st.sampled_from(VARS).map(Var),
    ),
    lambda sub: st.one_of(
        st.builds(Binop, st.sampled_from(("+", "-", "*", "/")), sub, sub),
        st.builds(Binop, st.sampled_from(("<", "<=", ">", ">=", "==", "!=")), sub, sub),
        st.builds(Not, sub),
        st.builds(And, sub, sub),
        st.builds(Or, sub, sub),
        st.builds(ArrayRead, st.sampled_from(("arr",)), sub),
    ),
    max_leaves=6,
)

stmts = st.one_of(
    st.just(Skip()),
    st.builds(Assign, st.sampled_from(VARS), exprs),
    st.builds(Assume, exprs),
    st.builds(Print, exprs),
    st.builds(ArrayWrite, st.just("arr"), exprs, exprs),
)


@st.composite
def interval_states(draw):
    out = {}
    for v in VARS:
        if draw(st.booleans()):
            continue  # unbound: unknown
        lo = draw(st.one_of(st.none(), st.integers(-25, 25)))
        hi = draw(st.one_of(st.none(), st.integers(-25, 25)))
        lo_b = NEG_INF if lo is None else lo
        hi_b = POS_INF if hi is None else hi
        if not isinstance(lo_b, type(NEG_INF)) and not isinstance(hi_b, type(NEG_INF)):
            if lo_b > hi_b:
                lo_b, hi_b = hi_b, lo_b
        out[v] = (lo_b, hi_b)
    return IntervalState(out)


@st.composite
def modeled_pairs(draw):
    """A concrete state together with an interval state it models."""
    phi = draw(interval_states())
    env = {}
    for v in VARS:
        lo, hi = phi.get(v)
        low = -40 if isinstance(lo, type(NEG_INF)) else lo
        high = 40 if isinstance(hi, type(NEG_INF)) else hi
        if low > high:
            low, high = high, min(high + 5, low)
        env[v] = draw(st.integers(min(low, high), max(low, high)))
    arrays = {"arr": tuple(draw(st.lists(st.integers(-5, 5), max_size=3)))}
    return ConcreteState(env, arrays), phi


# -- interval transfer examples ----------------------------------------------


def test_assign_increments():
    out = INTERVAL.transfer(parse_stmt_text("x = x + 1;"), ivl(x=(0, 0)))
    assert out == ivl(x=(1, 1))


def test_assume_refines_upper_bound():
    out = INTERVAL.transfer(parse_stmt_text("assume(x < 10);"), ivl(x=(0, None)))
    assert out == ivl(x=(0, 9))


def test_assume_unsatisfiable_gives_bottom():
    out = INTERVAL.transfer(parse_stmt_text("assume(x < 0);"), ivl(x=(0, 5)))
    assert INTERVAL.is_bot(out)


def test_call_rejected_by_domain():
    with pytest.raises(ContractViolation):
        INTERVAL.transfer(Call("x", "f", IntLit(1)), ivl())


def test_array_ops_identity_on_scalars():
    st1 = ivl(x=(1, 2))
    assert INTERVAL.transfer(parse_stmt_text("a[x] = 3;"), st1) == st1
    out = INTERVAL.transfer(parse_stmt_text("y = a[0];"), st1)
    assert out.get("y") == (NEG_INF, POS_INF)


def test_division_by_zero_interval_is_top():
    out = INTERVAL.transfer(parse_stmt_text("y = 1 / x;"), ivl(x=(-1, 1)))
    assert out.get("y") == (NEG_INF, POS_INF)
    out = INTERVAL.transfer(parse_stmt_text("y = 7 / x;"), ivl(x=(2, 3)))
    assert out.get("y") == (2, 3)


# -- join / widen / leq ---------------------------------------------------------


def test_join_is_pointwise_hull():
    assert INTERVAL.join(ivl(x=(0, 1)), ivl(x=(3, 5))) == ivl(x=(0, 5))


def test_widen_unstable_bound_to_infinity():
    out = INTERVAL.widen(ivl(x=(0, 0)), ivl(x=(1, 1)))
    assert out == ivl(x=(0, None))


def test_widen_stability():
    for phi in (ivl(), ivl(x=(0, 3), y=(None, 2)), INTERVAL_BOTTOM):
        assert INTERVAL.widen(phi, phi) == phi


def test_bottom_is_identity_for_join_and_widen():
    phi = ivl(x=(1, 2))
    assert INTERVAL.join(INTERVAL_BOTTOM, phi) == phi
    assert INTERVAL.join(phi, INTERVAL_BOTTOM) == phi
    assert INTERVAL.widen(INTERVAL_BOTTOM, phi) == phi
    assert INTERVAL.widen(phi, INTERVAL_BOTTOM) == phi


def test_canonical_serialization():
    assert INTERVAL.to_text(ivl(y=(None, 3), x=(0, 9))) == "{x:[0,9], y:[-inf,3]}"
    assert INTERVAL.to_text(ivl(x=(None, None))) == "{}"
    assert INTERVAL.to_text(INTERVAL_BOTTOM) == "bot"
    assert SIGN.to_text(SIGN.transfer(parse_stmt_text("x = 3;"), SIGN.init())) == "{x:pos}"
    assert CONST.to_text(CONST.transfer(parse_stmt_text("x = 3;"), CONST.init())) == "{x:3}"


# -- lattice properties -----------------------------------------------------------


@settings(max_examples=200, derandomize=True)
@given(interval_states(), interval_states())
def test_join_is_upper_bound(a, b):
    j = INTERVAL.join(a, b)
    assert INTERVAL.leq(a, j) and INTERVAL.leq(b, j)
    assert INTERVAL.leq(j, INTERVAL.widen(a, b))


@settings(max_examples=100, derandomize=True)
@given(st.lists(interval_states(), min_size=1, max_size=6))
def test_widening_chains_stabilize(chain):
    # make the chain increasing, then widen along it
    asc = [chain[0]]
    for s in chain[1:] + chain:  # revisit to force repeats too
        asc.append(INTERVAL.join(asc[-1], s))
    w = asc[0]
    changes = 0
    for s in asc[1:]:
        nxt = INTERVAL.widen(w, s)
        if not INTERVAL.equal(nxt, w):
            changes += 1
        w = nxt
    assert changes <= 2 * len(VARS) + 2
    assert INTERVAL.equal(INTERVAL.widen(w, w), w)


@settings(max_examples=400, derandomize=True)
@given(modeled_pairs(), stmts)
def test_local_soundness(pair, stmt):
    sigma, phi = pair
    assert INTERVAL.models(sigma, phi)
    post = concrete_step(stmt, sigma)
    if post is STUCK:
        return
    assert INTERVAL.models(post, INTERVAL.transfer(stmt, phi))


@settings(max_examples=400, derandomize=True)
@given(interval_states(), interval_states(), stmts)
def test_transfer_monotone(a, b, stmt):
    lo = INTERVAL.join(a, b) if not INTERVAL.leq(a, b) else b
    hi = INTERVAL.join(lo, b)
    assert INTERVAL.leq(INTERVAL.transfer(stmt, lo), INTERVAL.transfer(stmt, hi)) or not INTERVAL.leq(lo, hi)
    # and against an explicitly smaller state
    small = a
    big = INTERVAL.join(a, b)
    assert INTERVAL.leq(INTERVAL.transfer(stmt, small), INTERVAL.transfer(stmt, big))


@settings(max_examples=200, derandomize=True)
@given(interval_states(), interval_states())
def test_digest_respects_equality(a, b):
    if INTERVAL.equal(a, b):
        assert INTERVAL.digest(a) == INTERVAL.digest(b)
    if INTERVAL.digest(a) == INTERVAL.digest(b):
        assert INTERVAL.equal(a, b)


@settings(max_examples=300, derandomize=True)
@given(modeled_pairs(), stmts)
def test_local_soundness_sign_and_const(pair, stmt):
    sigma, phi = pair
    for dom in (SIGN, CONST):
        abstracted = dom.init()
        for v in VARS:
            if dom is SIGN:
                from daig.domains.finite import sign_of

                abstracted = abstracted.bind(v, sign_of(sigma.value_of(v)))
            else:
                abstracted = abstracted.bind(v, sigma.value_of(v))
        assert dom.models(sigma, abstracted)
        post = concrete_step(stmt, sigma)
        if post is STUCK:
            continue
        assert dom.models(post, dom.transfer(stmt, abstracted))


# -- concrete semantics ----------------------------------------------------------


def test_concrete_step_examples():
    out = concrete_step(parse_stmt_text("x = 2 * 3;"), ConcreteState())
    assert out.value_of("x") == 6
    assert concrete_step(parse_stmt_text("assume(x > 0);"), ConcreteState({"x": 0})) is STUCK
    out = concrete_step(parse_stmt_text("a[1] = 5;"), ConcreteState({}, {"a": (0, 0, 0)}))
    assert out.arrays["a"] == (0, 5, 0)


def test_concrete_stuck_cases():
    assert concrete_step(parse_stmt_text("x = 1 / 0;"), ConcreteState()) is STUCK
    assert concrete_step(parse_stmt_text("x = a[7];"), ConcreteState({}, {"a": (1,)})) is STUCK
    assert concrete_step(parse_stmt_text("a[0] = 1;"), ConcreteState()) is STUCK


def test_collecting_straight_line():
    prog = parse_program("fn main() { x = 1; y = x + 1; }")
    wit = collecting_bounded(prog, [ConcreteState()], 100)
    exit_states = wit[prog.proc("main").cfg.exit]
    assert exit_states == {ConcreteState({"x": 1, "y": 2})}


def test_collecting_loop_head_witnesses():
    prog = parse_program("fn main() { x = 0; while (x < 3) { x = x + 1; } }")
    cfg = prog.proc("main").cfg
    from daig.lang.loops import analyze_loops

    (head,) = analyze_loops(cfg).natural_loops
    wit = collecting_bounded(prog, [ConcreteState()], 1000)
    assert {s.value_of("x") for s in wit[head]} == {0, 1, 2, 3}


def test_collecting_branches_and_inputs():
    prog = parse_program("fn main() { if (x > 0) { y = 1; } else { y = 2; } }")
    cfg = prog.proc("main").cfg
    inputs = [ConcreteState({"x": v}) for v in (-1, 0, 1)]
    wit = collecting_bounded(prog, inputs, 100)
    ys = {s.value_of("y") for s in wit[cfg.exit]}
    assert ys == {1, 2}


def test_collecting_executes_calls():
    prog = parse_program("fn main() { y = 3; x = dbl(y); } fn dbl(p) { ret = p * 2; }")
    cfg = prog.proc("main").cfg
    wit = collecting_bounded(prog, [ConcreteState()], 1000)
    assert {s.value_of("x") for s in wit[cfg.exit]} == {6}


# -- models ---------------------------------------------------------------------


def test_models_examples():
    assert INTERVAL.models(ConcreteState({"x": 3}), ivl(x=(0, 5)))
    assert not INTERVAL.models(ConcreteState({"x": 7}), ivl(x=(0, 5)))
    assert not INTERVAL.models(ConcreteState({"x": 0}), INTERVAL_BOTTOM)
    # unbound concrete scalars read as zero
    assert INTERVAL.models(ConcreteState(), ivl(y=(0, 0)))
    assert not INTERVAL.models(ConcreteState(), ivl(y=(1, 2)))
