"""Partial weighted MaxSAT encoding of bounded maximum realizability.

Variables describe a transition system with ``b`` states (successor
relation and outputs per state and input valuation) and annotations of the
run graphs of the hard automaton and of each soft specification's automata.
Hard clauses make every model an implementation of the hard specification;
soft clauses reward the relaxation levels the implementation certifiably
reaches.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil, log2
from typing import Iterable, Sequence

from .automata import (COBUCHI, RelaxedAutomaton, SymbolicAutomaton,
                       build_b_gpsi, relax_fg, to_cubes, ucw_for)
from .ltl.formula import Finally, Globally
from .ltl.problem import SpecProblem


# ---------------------------------------------------------------------------
# variables and instances

class VarTable:
    """Bijection between semantic keys (tuples) and DIMACS variable ids."""

    def __init__(self):
        self._ids: dict[tuple, int] = {}
        self._keys: list[tuple] = []

    def __call__(self, *key) -> int:
        v = self._ids.get(key)
        if v is None:
            self._keys.append(key)
            v = self._ids[key] = len(self._keys)
        return v

    def get(self, *key) -> int | None:
        return self._ids.get(key)

    def fresh(self, kind: str = "Aux") -> int:
        return self(kind, len(self._keys) + 1)

    def key(self, var: int) -> tuple:
        return self._keys[var - 1]

    def __len__(self) -> int:
        return len(self._keys)

    def items(self) -> Iterable[tuple[str, int]]:
        for i, key in enumerate(self._keys, 1):
            yield var_name(key), i

    def to_varmap(self) -> str:
        return "".join(f"{name} {i}\n" for name, i in self.items())


def var_name(key: tuple) -> str:
    return f"{key[0]}({','.join(str(x) for x in key[1:])})"


def parse_varmap(text: str) -> dict[str, int]:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"varmap line {lineno}: expected 'name id'")
        out[parts[0]] = int(parts[1])
    return out


@dataclass
class WcnfInstance:
    nvars: int = 0
    hard: list[list[int]] = field(default_factory=list)
    soft: list[tuple[int, list[int]]] = field(default_factory=list)

    @property
    def top(self) -> int:
        return 1 + self.total_soft_weight

    @property
    def total_soft_weight(self) -> int:
        return sum(w for w, _ in self.soft)

    def add_hard(self, clause: list[int]) -> None:
        if not clause:
            raise ValueError("empty hard clause")
        self.hard.append(clause)

    def add_soft(self, weight: int, clause: list[int]) -> None:
        if weight < 1:
            raise ValueError("soft weights must be positive")
        self.soft.append((weight, clause))

    def cost(self, model: dict[int, bool] | set[int]) -> int:
        """Weight of soft clauses falsified by ``model``."""
        return sum(w for w, c in self.soft if not _clause_true(c, model))

    def hard_satisfied(self, model) -> bool:
        return all(_clause_true(c, model) for c in self.hard)


def _clause_true(clause, model) -> bool:
    if isinstance(model, dict):
        return any(model.get(abs(l), False) == (l > 0) for l in clause)
    return any((l in model) if l > 0 else (-l not in model) for l in clause)


def stats(w: WcnfInstance) -> tuple[int, int, int]:
    return w.nvars, len(w.hard) + len(w.soft), w.total_soft_weight


def to_wdimacs(w: WcnfInstance) -> str:
    top = w.top
    lines = [f"p wcnf {w.nvars} {len(w.hard) + len(w.soft)} {top}"]
    lines.extend(f"{top} {' '.join(map(str, c))} 0" for c in w.hard)
    lines.extend(f"{wt} {' '.join(map(str, c))} 0" for wt, c in w.soft)
    return "\n".join(line.replace("  ", " ") for line in lines) + "\n"


def parse_wdimacs(text: str) -> WcnfInstance:
    """Read classic (``p wcnf`` header) or header-less (``h`` marks hard
    clauses) WDIMACS."""
    w = WcnfInstance()
    top = None
    nvars = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) < 4 or parts[1] != "wcnf":
                raise ValueError(f"line {lineno}: bad header")
            w.nvars = int(parts[2])
            top = int(parts[4]) if len(parts) > 4 else None
            continue
        parts = line.split()
        if parts[-1] != "0":
            raise ValueError(f"line {lineno}: clause must end with 0")
        lits = [int(x) for x in parts[1:-1]]
        nvars = max([nvars] + [abs(l) for l in lits])
        if parts[0] == "h" or (top is not None and int(parts[0]) >= top):
            w.hard.append(lits)
        else:
            w.soft.append((int(parts[0]), lits))
    w.nvars = max(w.nvars, nvars)
    return w


# ---------------------------------------------------------------------------
# weight schemes

def scheme_weights(scheme: str, n: int, m: int, user=None) -> tuple[tuple[int, ...], ...]:
    """``w[j][k]`` for spec ``j`` and level ``k`` (both 0-based)."""
    if scheme in ("default", "general"):
        return tuple(tuple(n ** k for k in range(m)) for _ in range(n))
    if scheme == "priority":
        w = [[0] * m for _ in range(n)]
        for j in range(n - 1, -1, -1):
            for k in range(m):
                if j == n - 1 or k < m - 1:
                    w[j][k] = 1
                else:
                    w[j][k] = sum(sum(w[jj]) for jj in range(j + 1, n)) + 1
        return tuple(map(tuple, w))
    if scheme == "priority_strict":
        per_spec = [0] * n
        for j in range(n - 1, -1, -1):
            per_spec[j] = m * sum(per_spec[j + 1:]) + 1 if j < n - 1 else 1
        # every level of spec j outweighs all levels of lower-priority specs
        return tuple((per_spec[j],) * m for j in range(n))
    if scheme == "user":
        if user is None or len(user) != n:
            raise ValueError("user scheme needs one weight row per soft spec")
        return tuple(tuple(row) for row in user)
    raise ValueError(f"unknown scheme {scheme!r}")


# ---------------------------------------------------------------------------
# automata bundle (independent of the bound)

@dataclass(frozen=True)
class SoftAutomata:
    relaxed: RelaxedAutomaton | None = None  # default scheme: B_j
    gf: SymbolicAutomaton | None = None  # default scheme: UCW for GF psi
    levels: tuple[SymbolicAutomaton, ...] = ()  # other schemes: one UCW per level


@dataclass(frozen=True)
class ProblemAutomata:
    hard: SymbolicAutomaton
    soft: tuple[SoftAutomata, ...]

    @classmethod
    def build(cls, problem: SpecProblem) -> "ProblemAutomata":
        hard = ucw_for(problem.hard_formula)
        soft = []
        for spec in problem.soft:
            if problem.scheme == "default":
                body = spec.formula.arg
                soft.append(SoftAutomata(
                    relaxed=relax_fg(build_b_gpsi(body)),
                    gf=ucw_for(Globally(Finally(body)))))
            else:
                soft.append(SoftAutomata(levels=tuple(ucw_for(f) for f in spec.relax_chain)))
        return cls(hard, tuple(soft))


# ---------------------------------------------------------------------------
# the encoder

def bit_width(limit: int) -> int:
    """Bits needed to represent 0..limit."""
    return ceil(log2(limit + 1)) if limit > 0 else 0


@dataclass
class Encoding:
    problem: SpecProblem
    bound: int
    vt: VarTable
    wcnf: WcnfInstance
    soft_tags: list[tuple[int, int]]  # (spec, level) per soft clause, 0-based
    weights: tuple[tuple[int, ...], ...]


class _Builder:
    def __init__(self, problem: SpecProblem, b: int):
        if b < 1:
            raise ValueError("bound must be at least 1")
        self.p = problem
        self.b = b
        self.vt = VarTable()
        self.w = WcnfInstance()
        self.ni = len(problem.inputs)
        self._cmp_cache: dict = {}
        self._cube_cache: dict = {}

    # transition system
    def tau(self, s, i, t):
        return self.vt("Trans", s, i, t)

    def out(self, o, s, i):
        return self.vt("Out", o, s, i)

    def encode_input_enabled(self):
        for s in range(self.b):
            for i in range(1 << self.ni):
                self.w.add_hard([self.tau(s, i, t) for t in range(self.b)])
        # outputs get ids even when no guard mentions them, so decoding is total
        for s in range(self.b):
            for i in range(1 << self.ni):
                for o in self.p.outputs:
                    self.out(o, s, i)

    # comparators
    def compare(self, a: tuple[int, ...], b: tuple[int, ...], strict: bool):
        """Literal implying ``a > b`` (or ``a >= b``); ``True``/``False`` when
        the relation is decided without a variable."""
        if a == b:
            return not strict
        if not a:
            return not strict
        key = (a, b, strict)
        hit = self._cmp_cache.get(key)
        if hit is not None:
            return hit
        prev: int | bool = not strict
        for ai, bi in zip(a, b):
            x = self.vt.fresh()
            for extra in ([ai, -bi], [ai, prev], [-bi, prev]):
                lits = [-x]
                for lit in extra:
                    if lit is True:
                        lits = None
                        break
                    if lit is not False:
                        lits.append(lit)
                if lits is not None:
                    self.w.add_hard(lits)
            prev = x
        self._cmp_cache[key] = prev
        return prev

    def at_most(self, guard: int, bits: tuple[int, ...], k: int):
        """Hard clauses ``guard -> value(bits) <= k`` (bits LSB first)."""
        for i, bit in enumerate(bits):
            if k >> i & 1:
                continue
            higher = [-bits[j] for j in range(i + 1, len(bits)) if k >> j & 1]
            self.w.add_hard([-guard, -bit] + higher)

    # annotations
    def _edge_cubes(self, guard, s: int, i: int):
        """Guard cubes specialized at input ``i`` as lists of output literals
        for state ``s``."""
        key = (guard, i)
        cubes = self._cube_cache.get(key)
        if cubes is None:
            cubes = []
            for cube in to_cubes(guard):
                ok = True
                outs = []
                for name, val in cube.items():
                    if name in self.p.inputs:
                        if bool(i >> self.p.inputs.index(name) & 1) != val:
                            ok = False
                            break
                    else:
                        outs.append((name, val))
                if ok:
                    cubes.append(outs)
            self._cube_cache[key] = cubes
        return [[-self.out(n, s, i) if v else self.out(n, s, i) for n, v in c] for c in cubes]

    def annotate(self, tag: tuple, aut: SymbolicAutomaton, strict_edges: frozenset | None,
                 limit: int, enforce_limit: bool = False) -> int:
        """Valid-annotation constraints for ``aut``; returns the initial reach
        variable. Strictness comes from rejecting targets (co-Buchi) or from
        ``strict_edges`` (Rej edges of a relaxed automaton)."""
        width = bit_width(limit)
        b = self.b

        def reach(s, q):
            return self.vt("Reach", *tag, s, q)

        def bits(s, q):
            return tuple(self.vt("Bound", *tag, s, q, k) for k in range(width))

        for s in range(b):
            for q in aut.states:
                reach(s, q)
                bits(s, q)
        init = reach(0, aut.initial)
        cobuchi = aut.acceptance == COBUCHI
        for s in range(b):
            for q in aut.states:
                lam = reach(s, q)
                src_bits = bits(s, q)
                if enforce_limit:
                    self.at_most(lam, src_bits, limit)
                for ei in aut.out_edges[q]:
                    e = aut.edges[ei]
                    strict = (e.dst in aut.marked) if cobuchi else (ei in strict_edges)
                    for i in range(1 << self.ni):
                        for cube in self._edge_cubes(e.guard, s, i):
                            for t in range(b):
                                prefix = [-lam, -self.tau(s, i, t)] + cube
                                self.w.add_hard(prefix + [reach(t, e.dst)])
                                c = self.compare(bits(t, e.dst), src_bits, strict)
                                if c is True:
                                    continue
                                self.w.add_hard(prefix if c is False else prefix + [c])
        return init

    def bits_of(self, tag, s, q, width):
        return tuple(self.vt("Bound", *tag, s, q, k) for k in range(width))


def encode(problem: SpecProblem, b: int, automata: ProblemAutomata | None = None) -> Encoding:
    """Build the MaxSAT instance for implementation bound ``b``."""
    if automata is None:
        automata = ProblemAutomata.build(problem)
    bl = _Builder(problem, b)
    bl.encode_input_enabled()

    hard = automata.hard
    h0 = bl.annotate(("H",), hard, None, b * len(hard.marked))
    bl.w.add_hard([h0])

    n = problem.n
    m = 3 if problem.scheme == "default" else (problem.soft[0].m if problem.soft else 0)
    user = [s.weights for s in problem.soft] if problem.scheme == "user" else None
    weights = scheme_weights(problem.scheme, n, m, user) if n else ()
    tags: list[tuple[int, int]] = []
    for j, sa in enumerate(automata.soft):
        wj = weights[j]
        if problem.scheme == "default":
            fg0 = bl.annotate(("FG", j), sa.relaxed.base, sa.relaxed.rej_edges, b,
                              enforce_limit=True)
            gf0 = bl.annotate(("GF", j), sa.gf, None, b * len(sa.gf.marked))
            ind = bl.vt("SoftInd", j, 0)
            bl.w.add_hard([-ind, fg0])
            init_bits = bl.bits_of(("FG", j), 0, sa.relaxed.base.initial, bit_width(b))
            for k, bit in enumerate(init_bits):
                bl.w.add_hard([-ind, bit if b >> k & 1 else -bit])
            bl.w.add_soft(wj[0], [ind])
            bl.w.add_soft(wj[1], [fg0])
            bl.w.add_soft(wj[2], [fg0, gf0])
            tags += [(j, 0), (j, 1), (j, 2)]
        else:
            inits = [bl.annotate(("L", j, l), a, None, b * len(a.marked))
                     for l, a in enumerate(sa.levels)]
            for k in range(len(inits)):
                bl.w.add_soft(wj[k], inits[: k + 1])
                tags.append((j, k))
    bl.w.nvars = len(bl.vt)
    return Encoding(problem, b, bl.vt, bl.w, tags, weights)


def decode_claims(enc: Encoding, model: set[int]) -> list[list[bool]]:
    """Which soft clauses the model satisfies, as ``claims[j][k]``."""
    claims = [[False] * (3 if enc.problem.scheme == "default" else s.m)
              for s in enc.problem.soft]
    for (j, k), (_, clause) in zip(enc.soft_tags, enc.wcnf.soft):
        claims[j][k] = _clause_true(clause, model)
    return claims


def expected_claims(levels: Sequence[Sequence[bool]]) -> list[list[bool]]:
    """Soft clauses an implementation with the given satisfied chain levels
    can make true: level ``k`` needs some member at least as strong."""
    return [[any(row[: k + 1]) for k in range(len(row))] for row in levels]
