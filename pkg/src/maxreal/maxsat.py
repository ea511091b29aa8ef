"""MaxSAT backends for :class:`~maxreal.encoding.WcnfInstance`.

``solve_builtin`` drives CaDiCaL (via python-sat) with a generalized
totalizer over soft-clause relaxation literals and binary-searches the
falsified weight. CaDiCaL cannot be interrupted through python-sat, so runs
with a time limit use Glucose instead. ``solve_external`` runs any solver
that reads WDIMACS and prints MaxSAT-Evaluation style ``s``/``o``/``v``
lines.
"""

from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass, field

from pysat.solvers import Solver

from .encoding import WcnfInstance, to_wdimacs

OPTIMUM = "optimum"
HARD_UNSAT = "hard_unsat"
UNKNOWN = "unknown"

DEFAULT_EXTERNAL = "rc2.py -vv"
SAT_ENGINE = "cadical195"
INTERRUPTIBLE_ENGINE = "glucose42"


class SolverCrash(RuntimeError):
    pass


class MaxSatParseError(ValueError):
    pass


@dataclass
class MaxSatOutcome:
    status: str
    model: frozenset = frozenset()  # variables assigned true
    cost: int | None = None
    total_soft: int = 0
    timed_out: bool = False
    sat_calls: int = 0
    seconds: float = 0.0
    log: list[str] = field(default_factory=list)

    @property
    def satisfied_weight(self) -> int | None:
        return None if self.cost is None else self.total_soft - self.cost


# ---------------------------------------------------------------------------
# built-in

class _Totalizer:
    """Generalized totalizer: ``out[v]`` is implied whenever the weight of
    true inputs reaches ``v`` (sums at or above ``cap`` collapse to ``cap``)."""

    def __init__(self, items: list[tuple[int, int]], cap: int, new_var, add):
        self.new_var = new_var
        self.add = add
        self.cap = cap
        self.out = self._build(items) if items else {}

    def _build(self, items):
        if len(items) == 1:
            w, lit = items[0]
            return {min(w, self.cap): lit}
        mid = len(items) // 2
        left = self._build(items[:mid])
        right = self._build(items[mid:])
        out: dict[int, int] = {}

        def node(v):
            if v not in out:
                out[v] = self.new_var()
            return out[v]

        for a, la in left.items():
            self.add([-la, node(a)])
        for b, lb in right.items():
            self.add([-lb, node(b)])
        for a, la in left.items():
            for b, lb in right.items():
                self.add([-la, -lb, node(min(a + b, self.cap))])
        return out


def solve_builtin(w: WcnfInstance, timeout: float | None = None) -> MaxSatOutcome:
    """Exact optimum by binary search over the falsified soft weight."""
    t0 = time.monotonic()
    total = w.total_soft_weight
    next_var = [w.nvars]

    def new_var():
        next_var[0] += 1
        return next_var[0]

    engine = SAT_ENGINE if timeout is None else INTERRUPTIBLE_ENGINE
    solver = Solver(name=engine, bootstrap_with=w.hard)
    timer = None
    expired = threading.Event()
    if timeout is not None:
        def fire():
            expired.set()
            solver.interrupt()
        timer = threading.Timer(timeout, fire)
        timer.daemon = True
        timer.start()
    out = MaxSatOutcome(UNKNOWN, total_soft=total)
    try:
        # relaxation literal r is forced true when the soft clause is false
        relax: list[tuple[int, int]] = []
        for weight, clause in w.soft:
            if len(clause) == 1:
                relax.append((weight, -clause[0]))
            else:
                r = new_var()
                solver.add_clause(clause + [r])
                relax.append((weight, r))

        def call(assumptions=()):
            out.sat_calls += 1
            if timer is None:
                return solver.solve(assumptions=list(assumptions))
            res = solver.solve_limited(assumptions=list(assumptions), expect_interrupt=True)
            if expired.is_set():
                return None
            return res

        res = call()
        if res is None:
            out.timed_out = True
            return out
        if res is False:
            out.status = HARD_UNSAT
            return out
        best = _true_vars(solver.get_model(), w.nvars)
        hi = w.cost(best)
        out.model, out.cost = best, hi
        lo = 0
        if hi > 0:
            tot = _Totalizer(relax, hi, new_var, solver.add_clause)
            while lo < hi:
                mid = (lo + hi) // 2
                assume = [-lit for v, lit in tot.out.items() if v > mid]
                res = call(assume)
                if res is None:
                    out.timed_out = True
                    out.log.append(f"timeout with cost in [{lo}, {hi}]")
                    return out
                if res:
                    model = _true_vars(solver.get_model(), w.nvars)
                    hi = w.cost(model)
                    out.model, out.cost = model, hi
                else:
                    lo = mid + 1
        out.status = OPTIMUM
        return out
    finally:
        if timer is not None:
            timer.cancel()
        solver.delete()
        out.seconds = time.monotonic() - t0


def _true_vars(model, nvars: int) -> frozenset:
    return frozenset(l for l in model if 0 < l <= nvars)


# ---------------------------------------------------------------------------
# external

def parse_solver_output(text: str, nvars: int) -> tuple[str | None, int | None, frozenset | None]:
    """``(status, last cost, model)`` from MaxSAT Evaluation style output."""
    status = None
    cost = None
    lits: list[int] = []
    binary: str | None = None
    saw_v = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] == "c":
            continue
        tag, _, rest = line.partition(" ")
        rest = rest.strip()
        if tag == "s":
            status = rest
        elif tag == "o":
            try:
                cost = int(rest.split()[0])
            except (ValueError, IndexError):
                raise MaxSatParseError(f"line {lineno}: bad cost line {raw!r}") from None
        elif tag == "v":
            saw_v = True
            toks = rest.split()
            if len(toks) == 1 and set(toks[0]) <= {"0", "1"} and (len(toks[0]) > 1 or nvars == 1):
                binary = (binary or "") + toks[0]
                continue
            for t in toks:
                try:
                    lit = int(t)
                except ValueError:
                    raise MaxSatParseError(f"line {lineno}: bad literal {t!r}") from None
                if lit != 0:
                    lits.append(lit)
    model = None
    if binary is not None:
        model = frozenset(i + 1 for i, ch in enumerate(binary) if ch == "1")
    elif saw_v:
        model = frozenset(l for l in lits if l > 0)
    return status, cost, model


def solve_external(w: WcnfInstance, command: str | list[str] = DEFAULT_EXTERNAL,
                   timeout: float | None = None) -> MaxSatOutcome:
    """Run ``<command> <wcnf-path>`` and parse its answer."""
    argv = shlex.split(command) if isinstance(command, str) else list(command)
    t0 = time.monotonic()
    total = w.total_soft_weight
    fd, path = tempfile.mkstemp(suffix=".wcnf")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(to_wdimacs(w))
        try:
            proc = subprocess.run(argv + [path], capture_output=True, text=True, timeout=timeout)
        except subprocess.TimeoutExpired:
            return MaxSatOutcome(UNKNOWN, total_soft=total, timed_out=True,
                                 seconds=time.monotonic() - t0)
        except OSError as exc:
            raise SolverCrash(f"cannot run {argv[0]}: {exc}") from exc
    finally:
        os.unlink(path)
    status, cost, model = parse_solver_output(proc.stdout, w.nvars)
    elapsed = time.monotonic() - t0
    if status is None:
        raise SolverCrash(f"{argv[0]} exited with {proc.returncode} and no status line:\n"
                          f"{proc.stderr.strip()[-2000:]}")
    if status == "UNSATISFIABLE":
        return MaxSatOutcome(HARD_UNSAT, total_soft=total, seconds=elapsed)
    if status in ("OPTIMUM FOUND", "SATISFIABLE"):
        if model is None:
            raise MaxSatParseError("solver reported a solution but printed no model")
        if not w.hard_satisfied(model):
            raise MaxSatParseError("solver model violates a hard clause")
        real = w.cost(model)
        if cost is not None and status == "OPTIMUM FOUND" and cost != real:
            raise MaxSatParseError(f"reported cost {cost} but model falsifies weight {real}")
        return MaxSatOutcome(OPTIMUM if status == "OPTIMUM FOUND" else UNKNOWN,
                             model=model, cost=real, total_soft=total, seconds=elapsed)
    return MaxSatOutcome(UNKNOWN, total_soft=total, seconds=elapsed)


def solve(w: WcnfInstance, backend: str = "builtin", solver_cmd: str | None = None,
          timeout: float | None = None) -> MaxSatOutcome:
    if backend == "builtin":
        return solve_builtin(w, timeout)
    if backend == "external":
        return solve_external(w, solver_cmd or DEFAULT_EXTERNAL, timeout)
    raise ValueError(f"unknown backend {backend!r}")
