"""Shared oracles and generators for the test suites."""

from __future__ import annotations

import random
from itertools import product

from hypothesis import strategies as st

from maxreal.encoding import expected_claims, scheme_weights
from maxreal.ltl import (And, Atom, Finally, Globally, Implies, Next, Not, Or,
                         Release, SoftSpec, SpecProblem, Until, parse)
from maxreal.transition_system import (TransitionSystem, all_systems,
                                       model_check, satisfied_levels)

WAITER_IN = ("req1", "req2")
WAITER_OUT = ("table1", "table2")


def waiter_problem() -> SpecProblem:
    return SpecProblem(WAITER_IN, WAITER_OUT, (parse("G (!table1 | !table2)"),),
                       (SoftSpec.default(parse("G (req1 -> X table1)")),
                        SoftSpec.default(parse("G (req2 -> X table2)"))),
                       name="waiter")


def waiter_machine() -> TransitionSystem:
    """Three-state waiter: serve the table whose request came last, with
    req2 winning ties."""
    succ, out = [], []
    for s in range(3):
        rs, os_ = [], []
        for i in range(4):
            r1, r2 = i & 1, i >> 1 & 1
            if s in (0, 1):
                t = 2 if r2 else (1 if r1 else 0)
            else:
                t = 1 if r1 else 0
            o = 1 if (s == 1 and r1) else (2 if (s == 2 and r2) else 0)
            rs.append(t)
            os_.append(o)
        succ.append(tuple(rs))
        out.append(tuple(os_))
    return TransitionSystem(WAITER_IN, WAITER_OUT, tuple(succ), tuple(out))


# ---------------------------------------------------------------------------
# formula generators

def random_formula(rng: random.Random, props, depth: int, safe: bool = False):
    """Random formula; with ``safe`` only operators that keep it
    syntactically safe (literals, &, |, X, R, G)."""
    if depth == 0 or rng.random() < 0.25:
        a = Atom(rng.choice(props))
        return Not(a) if rng.random() < 0.4 else a
    ops = ["and", "or", "X", "R", "G"] if safe else \
        ["and", "or", "not", "imp", "X", "F", "G", "U", "R"]
    op = rng.choice(ops)
    sub = lambda: random_formula(rng, props, depth - 1, safe)  # noqa: E731
    if op == "and":
        return And(sub(), sub())
    if op == "or":
        return Or(sub(), sub())
    if op == "not":
        return Not(sub())
    if op == "imp":
        return Implies(sub(), sub())
    if op == "X":
        return Next(sub())
    if op == "F":
        return Finally(sub())
    if op == "G":
        return Globally(sub())
    if op == "U":
        return Until(sub(), sub())
    return Release(sub(), sub())


def formulas(props=("p", "q"), max_leaves: int = 8):
    """Hypothesis strategy over arbitrary LTL formulas."""
    leaf = st.sampled_from([Atom(p) for p in props]) | st.sampled_from([parse("true"), parse("false")])
    return st.recursive(
        leaf,
        lambda kids: st.one_of(
            st.builds(Not, kids), st.builds(Next, kids), st.builds(Finally, kids),
            st.builds(Globally, kids), st.builds(And, kids, kids), st.builds(Or, kids, kids),
            st.builds(Implies, kids, kids), st.builds(Until, kids, kids),
            st.builds(Release, kids, kids)),
        max_leaves=max_leaves)


# ---------------------------------------------------------------------------
# trace enumeration

def trace_lassos(ts: TransitionSystem, max_prefix: int = 2, max_loop: int = 2):
    """Ultimately periodic traces of ``ts`` driven by input lassos ``u v^w``.

    The machine state at the start of each ``v`` block eventually repeats,
    which turns the output trace into an exact lasso of letter sets.
    """
    width = 1 << len(ts.inputs)
    for lu in range(max_prefix + 1):
        for u in product(range(width), repeat=lu):
            for lv in range(1, max_loop + 1):
                for v in product(range(width), repeat=lv):
                    yield _lasso_of(ts, u, v)


def _lasso_of(ts, u, v):
    s = ts.initial
    prefix = []
    for i in u:
        prefix.append(ts.letter_set(ts.letter(s, i)))
        s = ts.succ[s][i]
    starts = {}
    blocks = []
    while s not in starts:
        starts[s] = len(blocks)
        block = []
        for i in v:
            block.append(ts.letter_set(ts.letter(s, i)))
            s = ts.succ[s][i]
        blocks.append(block)
    k = starts[s]
    for block in blocks[:k]:
        prefix += block
    loop = [a for block in blocks[k:] for a in block]
    return prefix, loop


# ---------------------------------------------------------------------------
# brute-force maximum realizability

def system_weight(ts: TransitionSystem, problem: SpecProblem) -> int:
    levels = [satisfied_levels(ts, s) for s in problem.soft]
    weights = scheme_weights(problem.scheme, problem.n, 3 if problem.scheme == "default"
                             else problem.soft[0].m) if problem.soft else ()
    return sum(w for row_w, row_c in zip(weights, expected_claims(levels))
               for w, c in zip(row_w, row_c) if c)


def systems_up_to(b: int, inputs, outputs):
    for k in range(1, b + 1):
        yield from all_systems(k, inputs, outputs)


def brute_force_optimum(problem: SpecProblem, b: int) -> int | None:
    """Best satisfied weight over every system with at most ``b`` states
    satisfying the hard spec, ``None`` if there is none."""
    best = None
    for ts in systems_up_to(b, problem.inputs, problem.outputs):
        if not model_check(ts, problem.hard_formula):
            continue
        w = system_weight(ts, problem)
        if best is None or w > best:
            best = w
    return best


HARD_POOL = ["true", "G (p -> q)", "G F q", "F G !q", "G (p -> X q)", "q", "G (q -> X !q)",
             "G (p -> F q)", "F q", "G !q", "X q & G (q -> X q)"]
SOFT_POOL = ["G q", "G !q", "G (p -> q)", "G (p -> X q)", "G (q -> X !q)", "G (p R q)",
             "G (!p | X X q)", "G (q -> p)", "G (X q | !q)", "G (q & X !q)"]


def random_small_problem(rng: random.Random) -> SpecProblem:
    """|I| = |O| = 1, at most two soft specs from a pool plus random ones."""
    hard = parse(rng.choice(HARD_POOL))
    n = rng.randint(1, 2)
    soft = []
    for _ in range(n):
        if rng.random() < 0.5:
            f = parse(rng.choice(SOFT_POOL))
        else:
            f = Globally(random_formula(rng, ("p", "q"), 2, safe=True))
        soft.append(SoftSpec.default(f))
    return SpecProblem(("p",), ("q",), (hard,), tuple(soft))
