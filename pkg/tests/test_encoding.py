import random
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pysat.solvers import Solver

from helpers import (brute_force_optimum, waiter_machine, system_weight,
                     waiter_problem)
from maxreal.encoding import (ProblemAutomata, VarTable, WcnfInstance,
                              _Builder, bit_width, decode_claims, encode,
                              expected_claims, parse_varmap, parse_wdimacs,
                              scheme_weights, stats, to_wdimacs, var_name)
from maxreal.ltl import SoftSpec, SpecProblem, parse
from maxreal.maxsat import HARD_UNSAT, OPTIMUM, solve_builtin
from maxreal.transition_system import (TransitionSystem, model_check,
                                       random_system)


def fix_system(enc, ts):
    """Unit clauses pinning the encoding's machine to ``ts`` (which must
    have exactly ``enc.bound`` states)."""
    vt = enc.vt
    units = []
    for s in range(ts.n_states):
        for i in range(1 << len(ts.inputs)):
            for t in range(enc.bound):
                v = vt.get("Trans", s, i, t)
                units.append([v if ts.succ[s][i] == t else -v])
            for k, o in enumerate(ts.outputs):
                v = vt.get("Out", o, s, i)
                units.append([v if ts.out[s][i] >> k & 1 else -v])
    return units


def pinned_optimum(enc, ts):
    w = WcnfInstance(enc.wcnf.nvars, enc.wcnf.hard + fix_system(enc, ts), enc.wcnf.soft)
    return solve_builtin(w)


# ---------------------------------------------------------------------------
# variables and files

def test_var_table():
    vt = VarTable()
    a = vt("Trans", 0, 1, 0)
    assert vt("Trans", 0, 1, 0) == a == 1
    assert vt.get("Trans", 1, 1, 1) is None
    f = vt.fresh()
    assert f == 2 and vt.key(f)[0] == "Aux"
    assert var_name(vt.key(a)) == "Trans(0,1,0)"
    assert parse_varmap(vt.to_varmap()) == {"Trans(0,1,0)": 1, "Aux(2)": 2}


def test_wdimacs_example():
    w = WcnfInstance(2)
    w.add_hard([1, -2])
    w.add_soft(3, [2])
    assert to_wdimacs(w) == "p wcnf 2 2 4\n4 1 -2 0\n3 2 0\n"
    assert to_wdimacs(WcnfInstance()) == "p wcnf 0 0 1\n"
    assert stats(w) == (2, 2, 3)


def test_wdimacs_rejects_bad_clauses():
    w = WcnfInstance(1)
    with pytest.raises(ValueError):
        w.add_hard([])
    with pytest.raises(ValueError):
        w.add_soft(0, [1])
    with pytest.raises(ValueError):
        parse_wdimacs("p wcnf 1 1 2\n2 1\n")


def test_wdimacs_header_less_format():
    w = parse_wdimacs("c comment\nh 1 2 0\n5 -1 0\n")
    assert w.hard == [[1, 2]] and w.soft == [(5, [-1])] and w.nvars == 2


@settings(max_examples=80, deadline=None)
@given(st.lists(st.lists(st.integers(-6, 6).filter(bool), min_size=1, max_size=4), max_size=6),
       st.lists(st.tuples(st.integers(1, 9), st.lists(st.integers(-6, 6).filter(bool),
                                                       min_size=1, max_size=3)), max_size=6))
def test_wdimacs_round_trip(hard, soft):
    w = WcnfInstance(6, [list(c) for c in hard], [(wt, list(c)) for wt, c in soft])
    back = parse_wdimacs(to_wdimacs(w))
    assert (back.nvars, back.hard, back.soft) == (w.nvars, w.hard, w.soft)


def test_encoding_file_round_trip():
    enc = encode(waiter_problem(), 2)
    back = parse_wdimacs(to_wdimacs(enc.wcnf))
    assert back.hard == enc.wcnf.hard and back.soft == enc.wcnf.soft


# ---------------------------------------------------------------------------
# weights

def test_default_weights():
    assert scheme_weights("default", 2, 3) == ((1, 2, 4), (1, 2, 4))
    for n in range(1, 12):
        total = sum(map(sum, scheme_weights("default", n, 3)))
        assert total == n + n ** 2 + n ** 3


def test_priority_weights_verbatim_example():
    assert scheme_weights("priority", 2, 3) == ((1, 1, 4), (1, 1, 1))


def test_priority_strict_dominates():
    for n in range(1, 5):
        for m in range(1, 4):
            w = scheme_weights("priority_strict", n, m)
            for j in range(n):
                assert min(w[j]) > sum(sum(row) for row in w[j + 1:])


def test_user_weights():
    assert scheme_weights("user", 1, 2, [(3, 5)]) == ((3, 5),)
    with pytest.raises(ValueError):
        scheme_weights("user", 2, 2, [(1, 1)])
    with pytest.raises(ValueError):
        scheme_weights("lexi", 1, 1)


def test_bit_width():
    assert [bit_width(k) for k in (0, 1, 2, 3, 4, 7, 8)] == [0, 1, 2, 2, 3, 3, 4]


# ---------------------------------------------------------------------------
# circuit pieces, checked exhaustively with a SAT solver

def _value_lits(bits, value):
    return [b if value >> k & 1 else -b for k, b in enumerate(bits)]


@pytest.mark.parametrize("width", [1, 2, 3, 4])
@pytest.mark.parametrize("strict", [False, True])
def test_comparator_exhaustive(width, strict):
    bl = _Builder(waiter_problem(), 1)
    a = tuple(bl.vt.fresh() for _ in range(width))
    b = tuple(bl.vt.fresh() for _ in range(width))
    c = bl.compare(a, b, strict)
    with Solver(name="cadical195", bootstrap_with=bl.w.hard) as s:
        for x, y in product(range(1 << width), repeat=2):
            holds = x > y if strict else x >= y
            ok = s.solve(assumptions=_value_lits(a, x) + _value_lits(b, y) + [c])
            assert ok == holds, (x, y)
    assert bl.compare(a, b, strict) == c  # cached


def test_comparator_constant_cases():
    bl = _Builder(waiter_problem(), 1)
    a = (bl.vt.fresh(),)
    assert bl.compare(a, a, True) is False
    assert bl.compare(a, a, False) is True
    assert bl.compare((), (), True) is False


@pytest.mark.parametrize("width,k", [(w, k) for w in (1, 2, 3, 4) for k in range((1 << w))])
def test_at_most_exhaustive(width, k):
    bl = _Builder(waiter_problem(), 1)
    g = bl.vt.fresh()
    bits = tuple(bl.vt.fresh() for _ in range(width))
    bl.at_most(g, bits, k)
    with Solver(name="cadical195", bootstrap_with=bl.w.hard or [[g, -g]]) as s:
        for x in range(1 << width):
            assert s.solve(assumptions=[g] + _value_lits(bits, x)) == (x <= k)
            assert s.solve(assumptions=[-g] + _value_lits(bits, x))


# ---------------------------------------------------------------------------
# whole encodings

def test_input_enabled_clause_count():
    problem = waiter_problem()
    for b in (1, 2, 3):
        enc = encode(problem, b)
        trans = [c for c in enc.wcnf.hard
                 if all(enc.vt.key(abs(l))[0] == "Trans" and l > 0 for l in c) and len(c) == b]
        assert len(trans) == b * 4


def test_soft_clause_layout():
    enc = encode(waiter_problem(), 2)
    assert enc.soft_tags == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]
    assert [w for w, _ in enc.wcnf.soft] == [1, 2, 4, 1, 2, 4]
    assert enc.wcnf.total_soft_weight == 14


def test_indicator_is_one_sided():
    # the two-state waiter machine violates both G specs: the indicator can be false but
    # never true, while FG-level claims stay free to be dropped
    problem = waiter_problem()
    ts = waiter_machine()
    enc = encode(problem, ts.n_states)
    pinned = enc.wcnf.hard + fix_system(enc, ts)
    with Solver(name="cadical195", bootstrap_with=pinned) as s:
        for j in range(2):
            ind = enc.vt.get("SoftInd", j, 0)
            fg0 = enc.wcnf.soft[3 * j + 1][1][0]
            assert s.solve(assumptions=[-ind, -fg0])
            assert not s.solve(assumptions=[ind])


def test_waiter_optimum_by_bound():
    problem = waiter_problem()
    automata = ProblemAutomata.build(problem)
    expected = {1: 7, 2: 8, 3: 8}
    for b, want in expected.items():
        out = solve_builtin(encode(problem, b, automata).wcnf)
        assert out.status == OPTIMUM and out.satisfied_weight == want


def test_pinned_waiter_machine():
    problem = waiter_problem()
    ts = waiter_machine()
    enc = encode(problem, ts.n_states)
    out = pinned_optimum(enc, ts)
    assert out.status == OPTIMUM
    assert out.satisfied_weight == system_weight(ts, problem) == 8
    levels = [(False, False, True)] * 2
    assert decode_claims(enc, out.model) == expected_claims(levels)


def test_pinned_machine_violating_hard_spec():
    problem = waiter_problem()
    # serves both tables at once
    ts = TransitionSystem(problem.inputs, problem.outputs, ((0, 0, 0, 0),), ((3, 3, 3, 3),))
    out = pinned_optimum(encode(problem, 1), ts)
    assert out.status == HARD_UNSAT


def test_pinned_weights_match_model_checker():
    """Soundness and completeness per machine: the optimum with the machine
    fixed equals the weight the model checker assigns it."""
    from maxreal.transition_system import model_check, random_system
    rng = random.Random(13)
    problem = SpecProblem(("p",), ("q",), (parse("G (p -> F q)"),),
                          (SoftSpec.default(parse("G (p -> q)")),
                           SoftSpec.default(parse("G (q -> X !q)"))))
    automata = ProblemAutomata.build(problem)
    encs = {b: encode(problem, b, automata) for b in (1, 2, 3)}
    for _ in range(60):
        b = rng.randint(1, 3)
        ts = random_system(rng, b, ("p",), ("q",))
        out = pinned_optimum(encs[b], ts)
        if model_check(ts, problem.hard_formula):
            assert out.status == OPTIMUM
            assert out.satisfied_weight == system_weight(ts, problem)
        else:
            assert out.status == HARD_UNSAT


def test_general_scheme_encoding():
    chain = (parse("G q"), parse("F G q"), parse("G F q"))
    problem = SpecProblem(("p",), ("q",), (parse("G (p -> X !q)"),),
                          (SoftSpec(chain[0], chain),), scheme="general")
    enc = encode(problem, 2)
    out = solve_builtin(enc.wcnf)
    assert out.satisfied_weight == brute_force_optimum(problem, 2)
    assert enc.soft_tags == [(0, 0), (0, 1), (0, 2)]


def test_bound_must_be_positive():
    with pytest.raises(ValueError):
        encode(waiter_problem(), 0)
