"""Mealy-style implementations, run graphs, annotations and model checking.

Letters are bitmasks over ``inputs + outputs`` (inputs in the low bits).
A state ``s`` reading input mask ``i`` moves to ``succ[s][i]`` and emits
output mask ``out[s][i]``; the letter of that step is
``i | out[s][i] << len(inputs)``.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from itertools import product
from typing import Iterator, Sequence

from .automata import (COBUCHI, RelaxedAutomaton, SymbolicAutomaton,
                       compile_guard, guard_holds, ltl_to_nba, scc_ids)
from .ltl import formula as L
from .ltl.formula import Formula
from .ltl.problem import SoftSpec


@dataclass(frozen=True)
class TransitionSystem:
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    succ: tuple[tuple[int, ...], ...]
    out: tuple[tuple[int, ...], ...]
    initial: int = 0

    def __post_init__(self):
        n = len(self.succ)
        width = 1 << len(self.inputs)
        if n == 0:
            raise ValueError("a transition system needs at least one state")
        if len(self.out) != n:
            raise ValueError("succ and out must cover the same states")
        for s in range(n):
            if len(self.succ[s]) != width or len(self.out[s]) != width:
                raise ValueError(f"state {s} is not input-enabled")
            for t, o in zip(self.succ[s], self.out[s]):
                if not 0 <= t < n:
                    raise ValueError(f"successor {t} of state {s} out of range")
                if not 0 <= o < 1 << len(self.outputs):
                    raise ValueError(f"output mask {o} of state {s} out of range")
        if not 0 <= self.initial < n:
            raise ValueError("initial state out of range")

    @property
    def n_states(self) -> int:
        return len(self.succ)

    @property
    def props(self) -> tuple[str, ...]:
        return self.inputs + self.outputs

    def letter(self, s: int, i: int) -> int:
        return i | self.out[s][i] << len(self.inputs)

    def letter_set(self, mask: int) -> frozenset:
        return frozenset(p for k, p in enumerate(self.props) if mask >> k & 1)

    def steps(self, s: int) -> Iterator[tuple[int, int, int]]:
        """``(input mask, letter, successor)`` for every input valuation."""
        for i in range(1 << len(self.inputs)):
            yield i, self.letter(s, i), self.succ[s][i]

    def reachable(self) -> list[int]:
        seen = {self.initial}
        order = [self.initial]
        for s in order:
            for t in self.succ[s]:
                if t not in seen:
                    seen.add(t)
                    order.append(t)
        return order


def format_valuation(props: Sequence[str], mask: int) -> str:
    if not props:
        return "true"
    return " & ".join(p if mask >> k & 1 else "!" + p for k, p in enumerate(props))


# ---------------------------------------------------------------------------
# run graphs

@dataclass(frozen=True)
class RunGraph:
    """Product of a universal automaton and a transition system, restricted
    to nodes reachable from the initial pair. Each edge carries the input
    mask and a flag: rejecting target (co-Buchi) or Rej-edge instance."""

    nodes: tuple[tuple[int, int], ...]
    edges: tuple[tuple[int, int, int, bool], ...]  # (src, input, dst, flag)

    @property
    def index(self) -> dict[tuple[int, int], int]:
        return {v: k for k, v in enumerate(self.nodes)}

    def successors(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in self.nodes]
        for u, _, v, _ in self.edges:
            out[u].append(v)
        return out


def run_graph(aut: SymbolicAutomaton | RelaxedAutomaton, ts: TransitionSystem) -> RunGraph:
    if isinstance(aut, RelaxedAutomaton):
        base, rej = aut.base, aut.rej_edges
    else:
        base, rej = aut, frozenset()
    props = ts.props
    guards = [compile_guard(e.guard, props) for e in base.edges]
    cobuchi = base.acceptance == COBUCHI
    start = (ts.initial, base.initial)
    index = {start: 0}
    nodes = [start]
    edges = []
    k = 0
    while k < len(nodes):
        s, q = nodes[k]
        for i, letter, t in ts.steps(s):
            for ei in base.out_edges[q]:
                if not guard_holds(guards[ei], letter):
                    continue
                e = base.edges[ei]
                dst = (t, e.dst)
                j = index.get(dst)
                if j is None:
                    j = index[dst] = len(nodes)
                    nodes.append(dst)
                flag = (e.dst in base.marked) if cobuchi else (ei in rej)
                edges.append((k, i, j, flag))
        k += 1
    return RunGraph(tuple(nodes), tuple(edges))


def _longest_flag_count(rg: RunGraph) -> list[int] | None:
    """Maximum number of flagged edges on a path from the initial node to
    each node, or ``None`` if a flagged edge lies on a cycle."""
    n = len(rg.nodes)
    succ = rg.successors()
    comp = scc_ids(n, succ)
    for u, _, v, flag in rg.edges:
        if flag and comp[u] == comp[v]:
            return None
    # Tarjan numbers components in reverse topological order
    ncomp = max(comp) + 1 if comp else 0
    members: list[list[int]] = [[] for _ in range(ncomp)]
    for v in range(n):
        members[comp[v]].append(v)
    out_by_src: list[list[tuple[int, bool]]] = [[] for _ in range(n)]
    for u, _, v, flag in rg.edges:
        out_by_src[u].append((v, flag))
    val = [0] * n
    for c in range(ncomp - 1, -1, -1):
        # inside a component no edge is flagged, so values are uniform
        best = max(val[v] for v in members[c])
        for v in members[c]:
            val[v] = best
        for v in members[c]:
            for w, flag in out_by_src[v]:
                if comp[w] != c:
                    val[w] = max(val[w], best + flag)
    return val


@dataclass(frozen=True)
class Annotation:
    """Node labelling of a run graph; nodes absent from ``values`` are bottom."""

    values: dict
    bound: int

    def headroom(self) -> int:
        """Largest value the initial node may take when the annotation is
        shifted up as far as the bound allows."""
        return self.bound - max(self.values.values(), default=0)

    def saturated(self) -> "Annotation":
        """Shift so the largest value meets the bound."""
        shift = self.headroom()
        return Annotation({k: v + shift for k, v in self.values.items()}, self.bound)


def check_annotation(rg: RunGraph, ann: Annotation) -> bool:
    """Validity edge by edge: defined at the root, closed under successors,
    non-decreasing, strictly increasing on flagged edges, within the bound."""
    vals = ann.values
    if rg.nodes[0] not in vals:
        return False
    for u, _, v, flag in rg.edges:
        a = vals.get(rg.nodes[u])
        if a is None:
            continue
        b = vals.get(rg.nodes[v])
        if b is None or b < a or (flag and b == a):
            return False
    return all(0 <= x <= ann.bound for x in vals.values())


def compute_annotation(aut: SymbolicAutomaton, ts: TransitionSystem) -> Annotation | None:
    """Least valid ``|T|*|F|``-bounded annotation of a co-Buchi run graph."""
    rg = run_graph(aut, ts)
    vals = _longest_flag_count(rg)
    if vals is None:
        return None
    return Annotation(dict(zip(rg.nodes, vals)), ts.n_states * len(aut.marked))


def compute_fg_annotation(aut: RelaxedAutomaton, ts: TransitionSystem) -> Annotation | None:
    """Least fg-valid ``|T|``-bounded annotation, or ``None`` when some
    reachable cycle traverses a Rej edge."""
    rg = run_graph(aut, ts)
    vals = _longest_flag_count(rg)
    if vals is None:
        return None
    ann = Annotation(dict(zip(rg.nodes, vals)), ts.n_states)
    if ann.headroom() < 0:  # cannot happen for a genuine Relax_FG automaton
        return None
    return ann


def universal_accepts(aut: SymbolicAutomaton | RelaxedAutomaton, ts: TransitionSystem) -> bool:
    """Acceptance of ``ts`` by a universal automaton.

    co-Buchi: no reachable cycle through a rejecting node. Buchi: no
    reachable cycle avoiding accepting states. Relaxed automata are read as
    safety automata: no Rej edge reachable.
    """
    rg = run_graph(aut, ts)
    if isinstance(aut, RelaxedAutomaton):
        return not any(flag for *_, flag in rg.edges)
    if aut.acceptance == COBUCHI:
        return _longest_flag_count(rg) is not None
    keep = [aut.marked.__contains__(q) is False for _, q in rg.nodes]
    return not _has_cycle_within(rg, keep)


def _has_cycle_within(rg: RunGraph, allowed: list[bool]) -> bool:
    n = len(rg.nodes)
    succ: list[list[int]] = [[] for _ in range(n)]
    for u, _, v, _ in rg.edges:
        if allowed[u] and allowed[v]:
            succ[u].append(v)
    comp = scc_ids(n, succ)
    sizes: dict[int, int] = {}
    for c in comp:
        sizes[c] = sizes.get(c, 0) + 1
    for v in range(n):
        if allowed[v] and (sizes[comp[v]] > 1 or v in succ[v]):
            return True
    return False


# ---------------------------------------------------------------------------
# model checking

_nba_cache: dict = {}


def _negated_nba(f: Formula) -> SymbolicAutomaton:
    hit = _nba_cache.get(f)
    if hit is None:
        hit = _nba_cache[f] = ltl_to_nba(L.Not(f))
    return hit


def counterexample(ts: TransitionSystem, f: Formula):
    """A trace of ``ts`` violating ``f`` as a lasso ``(prefix, loop)`` of
    letter sets, or ``None`` if ``ts`` satisfies ``f``."""
    nba = _negated_nba(f)
    props = ts.props
    guards = [compile_guard(e.guard, props) for e in nba.edges]
    start = (ts.initial, nba.initial)
    index = {start: 0}
    nodes = [start]
    adj: list[list[tuple[int, int]]] = []
    k = 0
    while k < len(nodes):
        s, q = nodes[k]
        row = []
        for _, letter, t in ts.steps(s):
            for ei in nba.out_edges[q]:
                if guard_holds(guards[ei], letter):
                    dst = (t, nba.edges[ei].dst)
                    j = index.get(dst)
                    if j is None:
                        j = index[dst] = len(nodes)
                        nodes.append(dst)
                    row.append((letter, j))
        adj.append(row)
        k += 1
    n = len(nodes)
    comp = scc_ids(n, [[j for _, j in row] for row in adj])
    target = None
    for v in range(n):
        if nodes[v][1] in nba.marked and any(comp[j] == comp[v] for _, j in adj[v]):
            target = v
            break
    if target is None:
        return None
    prefix = _bfs_path(adj, 0, lambda v: v == target, lambda v: True)
    loop = _cycle_path(adj, target, comp)
    return [ts.letter_set(a) for a in prefix], [ts.letter_set(a) for a in loop]


def _bfs_path(adj, src, is_goal, allowed):
    if is_goal(src):
        return []
    parent = {src: None}
    queue = deque([src])
    while queue:
        v = queue.popleft()
        for letter, w in adj[v]:
            if w in parent or not allowed(w):
                continue
            parent[w] = (v, letter)
            if is_goal(w):
                path = []
                while parent[w] is not None:
                    v, a = parent[w]
                    path.append(a)
                    w = v
                return path[::-1]
            queue.append(w)
    raise AssertionError("goal unreachable")


def _cycle_path(adj, v, comp):
    for letter, w in adj[v]:
        if comp[w] == comp[v]:
            rest = _bfs_path(adj, w, lambda x: x == v, lambda x: comp[x] == comp[v])
            return [letter] + rest
    raise AssertionError("node is not on a cycle")


def model_check(ts: TransitionSystem, f: Formula) -> bool:
    """Do all traces of ``ts`` satisfy ``f``?"""
    return counterexample(ts, f) is None


def format_lasso(prefix, loop) -> str:
    def show(letters):
        return " ".join("{" + ",".join(sorted(a)) + "}" for a in letters)
    return f"{show(prefix)} ({show(loop)})^w".strip()


def satisfied_levels(ts: TransitionSystem, spec: SoftSpec) -> tuple[bool, ...]:
    return tuple(model_check(ts, f) for f in spec.relax_chain)


def value_row(levels: Sequence[bool]) -> tuple[int, ...]:
    """Bit row of one soft spec, most significant (weakest level) first.

    Position ``p`` is set iff some chain member at least as strong as the
    ``p``-th weakest one holds.
    """
    m = len(levels)
    return tuple(int(any(levels[: m - p])) for p in range(m))


def compute_value(ts: TransitionSystem, soft: Sequence[SoftSpec]) -> tuple[int, ...]:
    """Column sums of the per-spec bit rows; compare lexicographically."""
    if not soft:
        return ()
    rows = [value_row(satisfied_levels(ts, s)) for s in soft]
    return tuple(sum(col) for col in zip(*rows))


def compute_value_rows(ts: TransitionSystem, soft: Sequence[SoftSpec]) -> tuple[tuple[int, ...], ...]:
    """Per-spec rows; the value under priority ordering compares these in
    spec order."""
    return tuple(value_row(satisfied_levels(ts, s)) for s in soft)


# ---------------------------------------------------------------------------
# enumeration helpers used by oracles

def all_systems(b: int, inputs: tuple[str, ...], outputs: tuple[str, ...]) -> Iterator[TransitionSystem]:
    """Every transition system with exactly ``b`` states (initial state 0)."""
    width = 1 << len(inputs)
    slots = b * width
    for succs in product(range(b), repeat=slots):
        for outs in product(range(1 << len(outputs)), repeat=slots):
            yield TransitionSystem(
                inputs, outputs,
                tuple(tuple(succs[s * width:(s + 1) * width]) for s in range(b)),
                tuple(tuple(outs[s * width:(s + 1) * width]) for s in range(b)))


def random_system(rng, b: int, inputs: tuple[str, ...], outputs: tuple[str, ...]) -> TransitionSystem:
    width = 1 << len(inputs)
    return TransitionSystem(
        inputs, outputs,
        tuple(tuple(rng.randrange(b) for _ in range(width)) for _ in range(b)),
        tuple(tuple(rng.randrange(1 << len(outputs)) for _ in range(width)) for _ in range(b)))


# ---------------------------------------------------------------------------
# DOT

def to_dot(ts: TransitionSystem, name: str = "implementation") -> str:
    lines = [f"digraph {_dot_id(name)} {{",
             f"  // inputs: {' '.join(ts.inputs)}",
             f"  // outputs: {' '.join(ts.outputs)}",
             "  rankdir=LR;",
             "  init [shape=point];",
             f"  init -> s{ts.initial};"]
    for s in range(ts.n_states):
        lines.append(f"  s{s} [shape=circle];")
    for s in range(ts.n_states):
        for i in range(1 << len(ts.inputs)):
            label = (f"{format_valuation(ts.inputs, i)} / "
                     f"{format_valuation(ts.outputs, ts.out[s][i])}")
            lines.append(f'  s{s} -> s{ts.succ[s][i]} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_id(name: str) -> str:
    return name if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name) else f'"{name}"'


class DotFormatError(ValueError):
    pass


_EDGE_RE = re.compile(r'^\s*s(\d+)\s*->\s*s(\d+)\s*\[label="([^"]*)"\]\s*;?\s*$')
_NODE_RE = re.compile(r"^\s*s(\d+)\s*\[")
_INIT_RE = re.compile(r"^\s*init\s*->\s*s(\d+)\s*;?\s*$")
_DECL_RE = re.compile(r"^\s*//\s*(inputs|outputs):(.*)$")


def from_dot(text: str, inputs: Sequence[str] | None = None,
             outputs: Sequence[str] | None = None) -> TransitionSystem:
    """Parse DOT produced by :func:`to_dot`. Proposition lists come from the
    ``// inputs:`` and ``// outputs:`` comments unless given explicitly."""
    decl: dict[str, tuple[str, ...]] = {}
    edges = []
    states = set()
    initial = 0
    for lineno, line in enumerate(text.splitlines(), 1):
        if m := _DECL_RE.match(line):
            decl[m.group(1)] = tuple(m.group(2).split())
        elif m := _EDGE_RE.match(line):
            edges.append((int(m.group(1)), int(m.group(2)), m.group(3), lineno))
        elif m := _INIT_RE.match(line):
            initial = int(m.group(1))
        elif m := _NODE_RE.match(line):
            states.add(int(m.group(1)))
    ins = tuple(inputs) if inputs is not None else decl.get("inputs")
    outs = tuple(outputs) if outputs is not None else decl.get("outputs")
    if ins is None or outs is None:
        raise DotFormatError("proposition declarations missing")
    for s, t, _, _ in edges:
        states.update((s, t))
    n = max(states) + 1 if states else 0
    if n == 0:
        raise DotFormatError("no states")
    width = 1 << len(ins)
    succ = [[None] * width for _ in range(n)]
    out = [[0] * width for _ in range(n)]
    for s, t, label, lineno in edges:
        if "/" not in label:
            raise DotFormatError(f"line {lineno}: label needs 'inputs / outputs'")
        lhs, rhs = label.split("/", 1)
        i = _parse_valuation(lhs, ins, lineno)
        o = _parse_valuation(rhs, outs, lineno)
        if succ[s][i] is not None:
            raise DotFormatError(f"line {lineno}: duplicate transition for s{s}")
        succ[s][i] = t
        out[s][i] = o
    for s in range(n):
        if None in succ[s]:
            raise DotFormatError(f"state s{s} is not input-enabled")
    return TransitionSystem(ins, outs, tuple(map(tuple, succ)), tuple(map(tuple, out)), initial)


def _parse_valuation(text: str, props: Sequence[str], lineno: int) -> int:
    text = text.strip()
    if text == "true":
        if props:
            raise DotFormatError(f"line {lineno}: valuation must list {list(props)}")
        return 0
    mask = 0
    seen = set()
    for lit in (t.strip() for t in text.split("&")):
        neg = lit.startswith("!")
        name = lit[1:] if neg else lit
        if name not in props:
            raise DotFormatError(f"line {lineno}: unknown proposition {name!r}")
        seen.add(name)
        if not neg:
            mask |= 1 << props.index(name)
    if seen != set(props):
        raise DotFormatError(f"line {lineno}: valuation must list {list(props)}")
    return mask
