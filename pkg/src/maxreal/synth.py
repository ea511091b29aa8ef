"""The bounded maximum-realizability loop.

For growing implementation bounds: encode, solve, extract the machine,
certify it with the model checker and stop once the target weight is
reached, the bound schedule is exhausted or the time budget runs out.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Iterator, Sequence

from .encoding import (Encoding, ProblemAutomata, decode_claims, encode,
                       expected_claims)
from .ltl.formula import TRUE, Formula, conj, subformulas
from .ltl.problem import SoftSpec, SpecProblem
from .maxsat import HARD_UNSAT, OPTIMUM, UNKNOWN, solve
from .transition_system import (TransitionSystem,
                                counterexample, format_lasso, model_check,
                                satisfied_levels, to_dot)


class CertificationFailure(RuntimeError):
    """A solver model decoded to a machine the model checker rejects."""


@dataclass(frozen=True)
class SynthesisOptions:
    min_bound: int = 2
    max_bound: int = 8
    schedule: str = "+2"  # "+k" adds k to the bound, "x2" doubles it
    threshold: int | None = None  # stop once this satisfied weight is reached
    time_limit: float | None = None  # seconds, whole run
    backend: str = "builtin"
    solver_cmd: str | None = None

    def __post_init__(self):
        if self.min_bound < 1:
            raise ValueError("min_bound must be at least 1")
        if self.max_bound < self.min_bound:
            raise ValueError("max_bound must not be below min_bound")
        parse_schedule(self.schedule)

    def bounds(self) -> Iterator[int]:
        step = parse_schedule(self.schedule)
        b = self.min_bound
        while b <= self.max_bound:
            yield b
            b = step(b)


def parse_schedule(text: str):
    text = text.strip()
    if text.startswith("+") and text[1:].isdigit() and int(text[1:]) > 0:
        k = int(text[1:])
        return lambda b: b + k
    if text in ("x2", "*2", "double"):
        return lambda b: 2 * b
    raise ValueError(f"unknown bound schedule {text!r}; use '+k' or 'x2'")


@dataclass
class BoundRecord:
    bound: int
    status: str
    weight: int | None
    weight_bound: int
    encode_ms: int
    solve_ms: int
    nvars: int = 0
    nclauses: int = 0


@dataclass
class SynthesisResult:
    problem: SpecProblem
    records: list[BoundRecord] = field(default_factory=list)
    implementation: TransitionSystem | None = None
    bound: int | None = None
    weight: int | None = None
    value: tuple[int, ...] | None = None
    levels: list[tuple[bool, ...]] | None = None
    achieved: list[Formula] | None = None
    stop_reason: str = ""

    @property
    def realizable(self) -> bool:
        return self.implementation is not None

    @property
    def certificate(self) -> Formula | None:
        """Conjunction of the achieved relaxations."""
        return None if self.achieved is None else conj(self.achieved)


def extract(model: frozenset | set, enc: Encoding) -> TransitionSystem:
    """Machine described by a model: least successor with a true transition
    variable, outputs read from the output variables."""
    p, b, vt = enc.problem, enc.bound, enc.vt
    width = 1 << len(p.inputs)
    succ = []
    out = []
    for s in range(b):
        row_s = []
        row_o = []
        for i in range(width):
            nxt = next((t for t in range(b) if vt.get("Trans", s, i, t) in model), None)
            if nxt is None:
                raise CertificationFailure(f"model leaves state {s} without successor on input {i}")
            row_s.append(nxt)
            mask = 0
            for k, o in enumerate(p.outputs):
                if vt.get("Out", o, s, i) in model:
                    mask |= 1 << k
            row_o.append(mask)
        succ.append(tuple(row_s))
        out.append(tuple(row_o))
    return TransitionSystem(p.inputs, p.outputs, tuple(succ), tuple(out))


def reachable_part(ts: TransitionSystem) -> TransitionSystem:
    """Drop unreachable states and renumber in discovery order."""
    order = ts.reachable()
    idx = {s: k for k, s in enumerate(order)}
    return TransitionSystem(ts.inputs, ts.outputs,
                            tuple(tuple(idx[t] for t in ts.succ[s]) for s in order),
                            tuple(ts.out[s] for s in order))


def achieved_relaxations(ts: TransitionSystem, soft: Sequence[SoftSpec]) -> list[Formula]:
    """Strongest chain member satisfied per soft spec, ``true`` if none."""
    out = []
    for spec in soft:
        hit = next((f for f in spec.relax_chain if model_check(ts, f)), TRUE)
        out.append(hit)
    return out


def certify(enc: Encoding, ts: TransitionSystem, model, optimal: bool) -> list[tuple[bool, ...]]:
    """Model-check the hard spec and every chain level; compare with the
    soft clauses the model claims. Returns the satisfied levels."""
    p = enc.problem
    cex = counterexample(ts, p.hard_formula)
    if cex is not None:
        raise CertificationFailure(f"extracted machine violates the hard spec on {format_lasso(*cex)}")
    levels = [satisfied_levels(ts, s) for s in p.soft]
    claimed = decode_claims(enc, model)
    actual = expected_claims(levels)
    for j, (c_row, a_row) in enumerate(zip(claimed, actual)):
        for k, (c, a) in enumerate(zip(c_row, a_row)):
            if c and not a:
                raise CertificationFailure(
                    f"soft spec {j + 1} level {k + 1} claimed but not satisfied")
            if optimal and a and not c:
                raise CertificationFailure(
                    f"soft spec {j + 1} level {k + 1} satisfied but not claimed by an optimal model")
    return levels


def synthesize_max(problem: SpecProblem, opts: SynthesisOptions | None = None,
                   automata: ProblemAutomata | None = None, log=None) -> SynthesisResult:
    opts = opts or SynthesisOptions()
    t_start = time.monotonic()
    automata = automata or ProblemAutomata.build(problem)
    result = SynthesisResult(problem)
    for b in opts.bounds():
        remaining = None
        if opts.time_limit is not None:
            remaining = opts.time_limit - (time.monotonic() - t_start)
            if remaining <= 0:
                result.stop_reason = "time limit"
                break
        t0 = time.monotonic()
        enc = encode(problem, b, automata)
        t1 = time.monotonic()
        outcome = solve(enc.wcnf, opts.backend, opts.solver_cmd, remaining)
        t2 = time.monotonic()
        rec = BoundRecord(b, outcome.status, outcome.satisfied_weight if outcome.status == OPTIMUM else None,
                          enc.wcnf.total_soft_weight, round((t1 - t0) * 1000), round((t2 - t1) * 1000),
                          enc.wcnf.nvars, len(enc.wcnf.hard) + len(enc.wcnf.soft))
        result.records.append(rec)
        if log:
            log(rec)
        if outcome.status == HARD_UNSAT:
            continue
        if outcome.status == UNKNOWN:
            result.stop_reason = "timeout" if outcome.timed_out else "solver gave no answer"
            break
        ts = extract(outcome.model, enc)
        levels = certify(enc, ts, outcome.model, optimal=True)
        if result.weight is None or outcome.satisfied_weight > result.weight:
            result.implementation = reachable_part(ts)
            result.bound = b
            result.weight = outcome.satisfied_weight
            result.levels = levels
            result.value = value_from_levels(levels, problem.scheme)
            result.achieved = achieved_relaxations(ts, problem.soft)
        if opts.threshold is not None and outcome.satisfied_weight >= opts.threshold:
            result.stop_reason = "threshold reached"
            break
        if outcome.satisfied_weight == enc.wcnf.total_soft_weight:
            result.stop_reason = "all soft constraints satisfied"
            break
    else:
        result.stop_reason = "bound schedule exhausted"
    return result


def value_from_levels(levels: list[tuple[bool, ...]], scheme: str) -> tuple[int, ...]:
    rows = expected_claims(levels)
    if scheme in ("priority", "priority_strict"):
        return tuple(sum(r) for r in rows)
    m = len(rows[0]) if rows else 0
    # most significant position is the weakest level
    return tuple(sum(r[m - 1 - p] for r in rows) for p in range(m))


# ---------------------------------------------------------------------------
# theoretical bound

@dataclass(frozen=True)
class BoundEstimate:
    """``((b * 2**b)!)**2`` with ``b`` the largest subformula count over all
    relaxation selections. ``exact`` holds the integer when it is small
    enough to write down."""

    b: int
    log10: float
    exact: int | None
    b_exact: bool = True

    def __str__(self):
        if self.exact is not None:
            return str(self.exact)
        return f"10^{self.log10:.4g}"


_EXACT_LIMIT = 1500
_ENUM_LIMIT = 20000


def max_subformula_count(problem: SpecProblem) -> tuple[int, bool]:
    """Largest number of distinct subformulas of the hard spec conjoined with
    one chain member per soft spec. Exact by enumeration when feasible,
    otherwise a per-spec greedy choice (flagged as not exact)."""
    base = list(problem.hard)
    chains = [s.relax_chain for s in problem.soft]
    combos = math.prod(len(c) for c in chains) if chains else 1
    if combos <= _ENUM_LIMIT:
        best = 0
        for pick in product(*chains):
            best = max(best, len(set(subformulas(conj(base + list(pick))))))
        return best, True
    pick = []
    for chain in chains:
        pick.append(max(chain, key=lambda f: len(set(subformulas(conj(base + pick + [f]))))))
    return len(set(subformulas(conj(base + pick)))), False


def theoretical_bound(problem: SpecProblem) -> BoundEstimate:
    b, exact_b = max_subformula_count(problem)
    n = b * 2 ** b
    log10 = 2 * math.lgamma(n + 1) / math.log(10)
    exact = math.factorial(n) ** 2 if n <= _EXACT_LIMIT else None
    return BoundEstimate(b, log10, exact, exact_b)


# ---------------------------------------------------------------------------
# report

def run_report(result: SynthesisResult, dot_path: str | None = None) -> str:
    lines = [f"problem: {result.problem.name or '-'}",
             f"scheme: {result.problem.scheme}",
             f"soft_specs: {result.problem.n}",
             ""]
    for r in result.records:
        lines += [f"bound: {r.bound}",
                  f"status: {r.status}",
                  f"weight: {'-' if r.weight is None else r.weight}",
                  f"weight_bound: {r.weight_bound}",
                  f"encode_ms: {r.encode_ms}",
                  f"solve_ms: {r.solve_ms}",
                  f"vars: {r.nvars}",
                  f"clauses: {r.nclauses}",
                  ""]
    lines.append(f"stop_reason: {result.stop_reason}")
    if result.implementation is not None:
        lines += [f"result_bound: {result.bound}",
                  f"result_states: {result.implementation.n_states}",
                  f"result_weight: {result.weight}",
                  f"value: {' '.join(map(str, result.value))}",
                  f"achieved: {' ; '.join(str(f) for f in result.achieved)}"]
        if dot_path:
            lines.append(f"implementation: {dot_path}")
    else:
        lines.append("result: none")
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> list[dict[str, str]]:
    """Blocks of ``key: value`` lines separated by blank lines."""
    blocks: list[dict[str, str]] = []
    cur: dict[str, str] = {}
    for line in text.splitlines():
        if not line.strip():
            if cur:
                blocks.append(cur)
                cur = {}
            continue
        key, sep, val = line.partition(":")
        if not sep:
            raise ValueError(f"report line without 'key: value': {line!r}")
        cur[key.strip()] = val.strip()
    if cur:
        blocks.append(cur)
    return blocks


def with_scheme(problem: SpecProblem, scheme: str) -> SpecProblem:
    return replace(problem, scheme=scheme)


def implementation_dot(result: SynthesisResult) -> str | None:
    if result.implementation is None:
        return None
    return to_dot(result.implementation, result.problem.name or "implementation")
