import math
import shutil
from dataclasses import replace

import pytest

from helpers import brute_force_optimum, waiter_machine, waiter_problem
from maxreal.encoding import encode
from maxreal.ltl import TRUE, Finally, Globally, SoftSpec, SpecProblem, parse
from maxreal.maxsat import solve_builtin
from maxreal.synth import (CertificationFailure, SynthesisOptions,
                           achieved_relaxations, certify, extract,
                           implementation_dot, max_subformula_count,
                           parse_report, parse_schedule, reachable_part,
                           run_report, synthesize_max, theoretical_bound,
                           value_from_levels)
from maxreal.transition_system import (TransitionSystem, from_dot,
                                       model_check)


def test_schedules():
    assert list(SynthesisOptions(2, 8).bounds()) == [2, 4, 6, 8]
    assert list(SynthesisOptions(1, 8, "x2").bounds()) == [1, 2, 4, 8]
    assert list(SynthesisOptions(3, 5, "+1").bounds()) == [3, 4, 5]
    assert parse_schedule("+3")(4) == 7
    for bad in ("+0", "*3", "2", "-1"):
        with pytest.raises(ValueError):
            parse_schedule(bad)
    with pytest.raises(ValueError):
        SynthesisOptions(0, 3)
    with pytest.raises(ValueError):
        SynthesisOptions(4, 3)


def test_waiter_loop():
    r = synthesize_max(waiter_problem(), SynthesisOptions(1, 3, "+1"))
    assert [(x.bound, x.status, x.weight) for x in r.records] == \
        [(1, "optimum", 7), (2, "optimum", 8), (3, "optimum", 8)]
    assert r.weight == 8 and r.bound == 2 and r.value == (2, 0, 0)
    assert r.stop_reason == "bound schedule exhausted"
    assert r.realizable and model_check(r.implementation, waiter_problem().hard_formula)
    body = [s.formula.arg for s in waiter_problem().soft]
    assert r.achieved == [Globally(Finally(x)) for x in body]
    assert r.certificate is not None


def test_threshold_stops_early():
    r = synthesize_max(waiter_problem(), SynthesisOptions(1, 3, "+1", threshold=7))
    assert len(r.records) == 1 and r.stop_reason == "threshold reached"


def test_all_soft_satisfied_stops():
    p = SpecProblem(("p",), ("q",), (), (SoftSpec.default(parse("G (p -> q)")),))
    r = synthesize_max(p, SynthesisOptions(1, 4, "+1"))
    assert len(r.records) == 1 and r.weight == 3
    assert r.stop_reason == "all soft constraints satisfied"
    assert r.value == (1, 1, 1)


def test_hard_spec_false():
    p = SpecProblem((), ("q",), (parse("G q & F !q"),))
    r = synthesize_max(p, SynthesisOptions(1, 3, "+1"))
    assert [x.status for x in r.records] == ["hard_unsat"] * 3
    assert not r.realizable and r.weight is None
    assert "result: none" in run_report(r)


def test_time_limit_zero():
    r = synthesize_max(waiter_problem(), SynthesisOptions(1, 3, "+1", time_limit=0))
    assert r.records == [] and r.stop_reason == "time limit"


def test_empty_soft_list():
    p = SpecProblem(("p",), ("q",), (parse("G (p -> X q)"),))
    r = synthesize_max(p, SynthesisOptions(1, 1))
    assert r.weight == 0 and r.value == ()


def _solved_waiter(b=3):
    enc = encode(waiter_problem(), b)
    out = solve_builtin(enc.wcnf)
    return enc, out


def test_extract_and_certify():
    enc, out = _solved_waiter()
    ts = extract(out.model, enc)
    assert ts.n_states == 3
    levels = certify(enc, ts, out.model, optimal=True)
    assert levels == [(False, False, True)] * 2


def test_certify_rejects_overclaims():
    enc, out = _solved_waiter()
    ts = extract(out.model, enc)
    forged = out.model | {enc.vt.get("SoftInd", 0, 0)}
    with pytest.raises(CertificationFailure, match="claimed but not satisfied"):
        certify(enc, ts, forged, optimal=False)


def test_certify_rejects_underclaims_only_at_optimum():
    enc, out = _solved_waiter()
    ts = extract(out.model, enc)
    clause = enc.wcnf.soft[2][1]  # GF level of the first spec
    weakened = out.model - set(clause)
    certify(enc, ts, weakened, optimal=False)
    with pytest.raises(CertificationFailure, match="not claimed"):
        certify(enc, ts, weakened, optimal=True)


def test_certify_rejects_hard_violations():
    enc, out = _solved_waiter(1)
    bad = TransitionSystem(enc.problem.inputs, enc.problem.outputs, ((0, 0, 0, 0),), ((3, 3, 3, 3),))
    with pytest.raises(CertificationFailure, match="hard"):
        certify(enc, bad, out.model, optimal=False)


def test_extract_needs_successors():
    enc, out = _solved_waiter(1)
    trans = {v for v in out.model if enc.vt.key(v)[0] == "Trans"}
    with pytest.raises(CertificationFailure, match="successor"):
        extract(out.model - trans, enc)


def test_reachable_part_renumbers():
    ts = TransitionSystem(("p",), ("q",), ((2, 2), (0, 1), (2, 0)), ((0, 1), (1, 1), (1, 0)))
    r = reachable_part(ts)
    assert r.n_states == 2
    assert r.succ == ((1, 1), (1, 0))
    assert r.out == ((0, 1), (1, 0))


def test_achieved_relaxations_waiter_machine():
    spec = waiter_problem().soft
    got = achieved_relaxations(waiter_machine(), spec)
    assert got == [s.relax_chain[2] for s in spec]
    trivially = SoftSpec(parse("G req1"), (parse("G req1"),))
    assert achieved_relaxations(waiter_machine(), [trivially]) == [TRUE]


def test_value_from_levels():
    levels = [(False, True, True), (False, False, True)]
    assert value_from_levels(levels, "default") == (2, 1, 0)
    assert value_from_levels(levels, "priority") == (2, 1)


def test_priority_strict_against_brute_force():
    p = replace(waiter_problem(), scheme="priority_strict")
    r = synthesize_max(p, SynthesisOptions(1, 1))
    assert r.weight == brute_force_optimum(p, 1)
    # the first table wins outright
    assert r.levels[0][0]


def test_theoretical_bound_small_cases():
    p = SpecProblem((), ("q",), (TRUE,))
    est = theoretical_bound(p)
    assert est.b == 1 and est.exact == 4 and str(est) == "4"
    w = waiter_problem()
    b, exact = max_subformula_count(w)
    assert exact
    est = theoretical_bound(w)
    assert est.b == b and est.exact is None
    assert est.log10 == pytest.approx(2 * math.lgamma(b * 2 ** b + 1) / math.log(10))
    assert str(est).startswith("10^")


def test_report_round_trip(tmp_path):
    r = synthesize_max(waiter_problem(), SynthesisOptions(1, 2, "+1"))
    text = run_report(r, "implementation.dot")
    blocks = parse_report(text)
    assert [b["bound"] for b in blocks[1:3]] == ["1", "2"]
    final = blocks[-1]
    assert final["result_weight"] == "8" and final["value"] == "2 0 0"
    assert final["implementation"] == "implementation.dot"
    ts = from_dot(implementation_dot(r))
    assert ts == r.implementation
    with pytest.raises(ValueError):
        parse_report("no colon here\n")


@pytest.mark.skipif(shutil.which("rc2.py") is None, reason="rc2.py not on PATH")
def test_external_backend_agrees():
    r = synthesize_max(waiter_problem(), SynthesisOptions(2, 2, backend="external"))
    assert r.weight == 8 and r.value == (2, 0, 0)
