"""Symbolic omega-automata for the synthesis encoding.

Every automaton here has guard-labelled edges where a guard is a
propositional :class:`~maxreal.ltl.Formula`. Alphabets are never expanded;
the encoder specializes guards by partial evaluation on input valuations.

Constructions:

* :func:`ltl_to_nba` - tableau translation (expansion sets, transition-based
  generalized Buchi acceptance, counter degeneralization, trimming).
* :func:`ucw_for` - universal co-Buchi automaton of a formula, the NBA of its
  negation read universally.
* :func:`bad_prefix_nfa`, :func:`build_b_gpsi`, :func:`relax_fg` - the
  safety automaton with a rejecting sink for ``G psi`` and its FG-relaxation
  whose redirected sink edges form the Rej set.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable

from .ltl import formula as L
from .ltl.formula import (FALSE, TRUE, Formula, atoms, is_syntactically_safe,
                          simplify, to_nnf)

BUCHI = "buchi"
COBUCHI = "cobuchi"
FINITE = "finite"
NONDET = "nondeterministic"
UNIVERSAL = "universal"

DEFAULT_STATE_CAP = 5000


class AutomatonTooLarge(RuntimeError):
    pass


class NotSyntacticallySafe(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    src: int
    guard: Formula
    dst: int


@dataclass(frozen=True)
class SymbolicAutomaton:
    n_states: int
    initial: int
    edges: tuple[Edge, ...]
    acceptance: str
    marked: frozenset
    branching: str
    props: tuple[str, ...] = ()
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        for e in self.edges:
            if not (0 <= e.src < self.n_states and 0 <= e.dst < self.n_states):
                raise ValueError(f"edge {e} out of range")
            stray = atoms(e.guard) - set(self.props)
            if stray:
                raise ValueError(f"guard mentions undeclared propositions {sorted(stray)}")

    @cached_property
    def out_edges(self) -> tuple[tuple[int, ...], ...]:
        """Edge indices grouped by source state."""
        buckets: list[list[int]] = [[] for _ in range(self.n_states)]
        for i, e in enumerate(self.edges):
            buckets[e.src].append(i)
        return tuple(tuple(b) for b in buckets)

    @property
    def states(self) -> range:
        return range(self.n_states)

    def dump(self) -> str:
        """HOA-like listing for inspection; not a stable format."""
        lines = [f"States: {self.n_states}",
                 f"Start: {self.initial}",
                 f"AP: {' '.join(self.props)}",
                 f"Acceptance: {self.acceptance} ({self.branching})",
                 f"Marked: {' '.join(str(q) for q in sorted(self.marked))}",
                 "--BODY--"]
        for q in self.states:
            name = self.labels[q] if self.labels else ""
            lines.append(f"State: {q}{' ' + name if name else ''}{' *' if q in self.marked else ''}")
            for i in self.out_edges[q]:
                e = self.edges[i]
                lines.append(f"  [{e.guard}] {e.dst}")
        lines.append("--END--")
        return "\n".join(lines)


@dataclass(frozen=True)
class SafetyAutomaton:
    """Universal Buchi automaton for ``G psi`` with a unique rejecting sink.

    ``sink`` is ``None`` when the sink is unreachable (e.g. ``psi = true``)
    and was pruned.
    """

    base: SymbolicAutomaton
    sink: int | None


@dataclass(frozen=True)
class RelaxedAutomaton:
    """``Relax_FG(G psi)``: sink removed, sink edges redirected to the initial
    state and remembered in ``rej_edges`` (indices into ``base.edges``)."""

    base: SymbolicAutomaton
    rej_edges: frozenset = field(default_factory=frozenset)


# ---------------------------------------------------------------------------
# guards

def cube_formula(cube: Iterable[tuple[str, bool]]) -> Formula:
    lits = [L.Atom(n) if v else L.Not(L.Atom(n)) for n, v in sorted(cube)]
    return L.conj(lits)


def to_cubes(f: Formula) -> list[dict[str, bool]]:
    """DNF of a propositional formula as a list of cubes, with subsumed
    cubes removed. ``[]`` means false, ``[{}]`` means true."""
    cubes = _dnf(simplify(to_nnf(f)))
    return [dict(c) for c in _minimize_cubes(cubes)]


def _dnf(f: Formula) -> list[frozenset]:
    k = f.kind
    if k == L.TRUE_K:
        return [frozenset()]
    if k == L.FALSE_K:
        return []
    if k == L.ATOM:
        return [frozenset({(f.name, True)})]
    if k == L.NOT:
        return [frozenset({(f.arg.name, False)})]
    if k == L.OR:
        return _minimize_cubes(_dnf(f.left) + _dnf(f.right))
    if k == L.AND:
        out = []
        for a in _dnf(f.left):
            for b in _dnf(f.right):
                c = a | b
                if not _conflicting(c):
                    out.append(c)
        return _minimize_cubes(out)
    raise ValueError(f"not a propositional NNF formula: {f}")


def _conflicting(cube: frozenset) -> bool:
    seen = {}
    for n, v in cube:
        if seen.setdefault(n, v) != v:
            return True
    return False


def _minimize_cubes(cubes: list[frozenset]) -> list[frozenset]:
    uniq = sorted(set(cubes), key=lambda c: (len(c), sorted(c)))
    kept: list[frozenset] = []
    for c in uniq:
        if not any(k <= c for k in kept):
            kept.append(c)
    return kept


def dnf_formula(f: Formula) -> Formula:
    return L.disj(cube_formula(c.items()) for c in to_cubes(f))


# ---------------------------------------------------------------------------
# tableau

_EVENTUAL = (L.UNTIL, L.FINALLY)


def _expand(obligations: frozenset) -> list[tuple[frozenset, frozenset, frozenset]]:
    """All ways to satisfy ``obligations`` now.

    Returns ``(cube, next_obligations, postponed_eventualities)`` triples.
    """
    results = []
    start = sorted(obligations, key=str)
    stack = [(start, {}, frozenset(), frozenset(), frozenset())]
    while stack:
        todo, cube, nxt, postponed, done = stack.pop()
        dead = False
        while todo and not dead:
            f = todo.pop()
            if f in done:
                continue
            done = done | {f}
            k = f.kind
            if k == L.TRUE_K:
                continue
            if k == L.FALSE_K:
                dead = True
            elif k == L.ATOM or k == L.NOT:
                name = f.name if k == L.ATOM else f.arg.name
                val = k == L.ATOM
                if cube.get(name, val) != val:
                    dead = True
                else:
                    cube = {**cube, name: val}
            elif k == L.AND:
                todo = todo + [f.right, f.left]
            elif k == L.OR:
                stack.append((todo + [f.right], cube, nxt, postponed, done))
                todo = todo + [f.left]
            elif k == L.NEXT:
                nxt = nxt | {f.arg}
            elif k == L.GLOBALLY:
                nxt = nxt | {f}
                todo = todo + [f.arg]
            elif k == L.FINALLY:
                stack.append((list(todo), cube, nxt | {f}, postponed | {f}, done))
                todo = todo + [f.arg]
            elif k == L.UNTIL:
                stack.append((todo + [f.left], cube, nxt | {f}, postponed | {f}, done))
                todo = todo + [f.right]
            elif k == L.RELEASE:
                stack.append((todo + [f.right], cube, nxt | {f}, postponed, done))
                todo = todo + [f.right, f.left]
            else:
                raise ValueError(f"formula not in NNF: {f}")
        if not dead:
            results.append((frozenset(cube.items()), frozenset(nxt) - {TRUE}, postponed))
    # drop transitions subsumed by a weaker cube with the same target and
    # no more postponements
    results = sorted(set(results), key=lambda t: (len(t[0]), sorted(t[0]), _key(t[1]), _key(t[2])))
    kept: list[tuple[frozenset, frozenset, frozenset]] = []
    for cube, nxt, post in results:
        if any(kc <= cube and kn == nxt and kp <= post for kc, kn, kp in kept):
            continue
        kept.append((cube, nxt, post))
    return kept


def _key(fs: frozenset) -> tuple[str, ...]:
    return tuple(sorted(str(f) for f in fs))


def ltl_to_nba(f: Formula, state_cap: int = DEFAULT_STATE_CAP) -> SymbolicAutomaton:
    """Nondeterministic Buchi automaton with the same language as ``f``."""
    f = simplify(to_nnf(f))
    props = tuple(sorted(atoms(f)))
    eventualities = sorted({g for g in L.walk(f) if g.kind in _EVENTUAL}, key=str)
    k = len(eventualities)

    init = frozenset({f}) - {TRUE}
    # generalized automaton: states are obligation sets
    gba_ids = {init: 0}
    gba_states = [init]
    gba_trans: list[list[tuple[frozenset, int, frozenset]]] = []
    i = 0
    while i < len(gba_states):
        if len(gba_states) > state_cap:
            raise AutomatonTooLarge(f"tableau for {f} exceeds {state_cap} states")
        trans = []
        for cube, nxt, post in _expand(gba_states[i]):
            j = gba_ids.get(nxt)
            if j is None:
                j = gba_ids[nxt] = len(gba_states)
                gba_states.append(nxt)
            # acceptance sets this transition belongs to
            acc = frozenset(idx for idx, e in enumerate(eventualities) if e not in post)
            trans.append((cube, j, acc))
        gba_trans.append(trans)
        i += 1

    # degeneralize: (gba state, counter); accepting iff counter == k
    ids = {(0, 0): 0}
    order = [(0, 0)]
    edges: list[tuple[int, frozenset, int]] = []
    i = 0
    while i < len(order):
        if len(order) > state_cap:
            raise AutomatonTooLarge(f"automaton for {f} exceeds {state_cap} states")
        s, c = order[i]
        base = 0 if c == k else c
        for cube, t, acc in gba_trans[s]:
            c2 = base
            while c2 < k and c2 in acc:
                c2 += 1
            key = (t, c2)
            j = ids.get(key)
            if j is None:
                j = ids[key] = len(order)
                order.append(key)
            edges.append((i, cube, j))
        i += 1
    accepting = {idx for idx, (_, c) in enumerate(order) if c == k}
    labels = [_label(gba_states[s], c, k) for s, c in order]
    return _finish(len(order), 0, edges, accepting, props, labels, BUCHI, NONDET, trim=True)


def _label(obl: frozenset, c: int, k: int) -> str:
    body = "{" + ", ".join(_key(obl)) + "}"
    return body if k == 0 else f"{body}#{c}"


def _finish(n, initial, edges, marked, props, labels, acceptance, branching,
            trim: bool, merge: bool = True) -> SymbolicAutomaton:
    """Prune, optionally trim to states that can reach an accepting cycle,
    merge parallel edges per (src, dst) and renumber in BFS order."""
    succ: list[set[int]] = [set() for _ in range(n)]
    for s, _, d in edges:
        succ[s].add(d)
    alive = set(range(n))
    if trim:
        alive = _can_reach_accepting_cycle(n, succ, marked)
        alive.add(initial)
    # BFS renumbering from the initial state
    new_id = {initial: 0}
    queue = deque([initial])
    while queue:
        s = queue.popleft()
        for d in sorted(succ[s], key=lambda d: d):
            if d in alive and d not in new_id:
                new_id[d] = len(new_id)
                queue.append(d)
    grouped: dict[tuple[int, int], list] = {}
    for s, cube, d in edges:
        if s in new_id and d in new_id:
            grouped.setdefault((new_id[s], new_id[d]), []).append(cube)
    out_edges = []
    for (s, d) in sorted(grouped):
        cubes = grouped[(s, d)]
        if merge:
            cubes = _minimize_cubes(cubes)
            guard = L.disj(cube_formula(c) for c in cubes)
            if _is_tautology(guard):
                guard = TRUE
            out_edges.append(Edge(s, guard, d))
        else:
            out_edges.extend(Edge(s, cube_formula(c), d) for c in cubes)
    inv = sorted(new_id, key=new_id.get)
    return SymbolicAutomaton(
        n_states=len(inv), initial=0, edges=tuple(out_edges), acceptance=acceptance,
        marked=frozenset(new_id[q] for q in marked if q in new_id), branching=branching,
        props=tuple(props), labels=tuple(labels[q] for q in inv) if labels else ())


def _is_tautology(f: Formula, limit: int = 12) -> bool:
    names = tuple(sorted(atoms(f)))
    if len(names) > limit:
        return False
    return all(L.evaluate(f, v) for v in all_valuations(names))


def _can_reach_accepting_cycle(n, succ, marked) -> set[int]:
    comp = scc_ids(n, succ)
    good_comp = set()
    members: dict[int, list[int]] = {}
    for v in range(n):
        members.setdefault(comp[v], []).append(v)
    for c, vs in members.items():
        nontrivial = len(vs) > 1 or vs[0] in succ[vs[0]]
        if nontrivial and any(v in marked for v in vs):
            good_comp.add(c)
    pred: list[list[int]] = [[] for _ in range(n)]
    for s in range(n):
        for d in succ[s]:
            pred[d].append(s)
    alive = {v for v in range(n) if comp[v] in good_comp}
    queue = deque(alive)
    while queue:
        v = queue.popleft()
        for p in pred[v]:
            if p not in alive:
                alive.add(p)
                queue.append(p)
    return alive


def scc_ids(n: int, succ) -> list[int]:
    """Tarjan's algorithm, iterative. Returns a component id per vertex."""
    index = [-1] * n
    low = [0] * n
    onstack = [False] * n
    comp = [-1] * n
    stack: list[int] = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        onstack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    onstack[w] = True
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if onstack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    onstack[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
    return comp


_ucw_cache: dict = {}


def ucw_for(f: Formula, state_cap: int = DEFAULT_STATE_CAP) -> SymbolicAutomaton:
    """Universal co-Buchi automaton accepting exactly the systems satisfying ``f``."""
    hit = _ucw_cache.get(f)
    if hit is not None:
        return hit
    nba = ltl_to_nba(L.Not(f), state_cap)
    ucw = SymbolicAutomaton(nba.n_states, nba.initial, nba.edges, COBUCHI, nba.marked,
                            UNIVERSAL, tuple(sorted(atoms(f))), nba.labels)
    _ucw_cache[f] = ucw
    return ucw


def bad_prefix_nfa(psi: Formula, state_cap: int = DEFAULT_STATE_CAP) -> SymbolicAutomaton:
    """NFA accepting only bad prefixes of ``psi`` and at least one prefix of
    every word violating ``psi``.

    Built from the tableau of the co-safe formula ``!psi``: a run accepts as
    soon as its residual obligation set is empty.
    """
    if not is_syntactically_safe(psi):
        raise NotSyntacticallySafe(f"{psi} is not syntactically safe")
    target = simplify(to_nnf(L.Not(psi)))
    props = tuple(sorted(atoms(psi)))
    init = frozenset({target}) - {TRUE}
    ids = {init: 0}
    order = [init]
    edges = []
    i = 0
    while i < len(order):
        if len(order) > state_cap:
            raise AutomatonTooLarge(f"bad-prefix automaton for {psi} exceeds {state_cap} states")
        if order[i]:  # the empty obligation set is final; no need to leave it
            for cube, nxt, _ in _expand(order[i]):
                j = ids.get(nxt)
                if j is None:
                    j = ids[nxt] = len(order)
                    order.append(nxt)
                edges.append((i, cube, j))
        i += 1
    final = {i for i, s in enumerate(order) if not s}
    # keep only states from which a final state is reachable
    succ: list[set[int]] = [set() for _ in order]
    for s, _, d in edges:
        succ[s].add(d)
    useful = _backward_closure(len(order), succ, final) | {0}
    edges = [(s, c, d) for s, c, d in edges if s in useful and d in useful]
    labels = ["{" + ", ".join(_key(s)) + "}" for s in order]
    return _finish(len(order), 0, edges, final, props, labels, FINITE, NONDET, trim=False)


def _backward_closure(n, succ, targets) -> set[int]:
    pred: list[list[int]] = [[] for _ in range(n)]
    for s in range(n):
        for d in succ[s]:
            pred[d].append(s)
    seen = set(targets)
    queue = deque(targets)
    while queue:
        v = queue.popleft()
        for p in pred[v]:
            if p not in seen:
                seen.add(p)
                queue.append(p)
    return seen


def build_b_gpsi(psi: Formula) -> SafetyAutomaton:
    """Universal Buchi automaton for ``G psi`` with a non-accepting sink.

    The bad-prefix NFA's accepting states collapse into the sink; the initial
    state gets a self-loop for every letter that does not lead only into the
    sink, so a fresh copy of the NFA starts at every position.
    """
    nfa = bad_prefix_nfa(psi)
    q0 = nfa.initial
    final = nfa.marked
    keep = [q for q in nfa.states if q not in final]
    idx = {q: i for i, q in enumerate(keep)}
    sink = len(keep)
    edges: list[tuple[int, frozenset, int]] = []
    guards_all: list[Formula] = []
    guards_safe: list[Formula] = []
    for e in nfa.edges:
        if e.src in final:
            continue
        dst = sink if e.dst in final else idx[e.dst]
        for c in to_cubes(e.guard):
            edges.append((idx[e.src], frozenset(c.items()), dst))
        if e.src == q0:
            guards_all.append(e.guard)
            if e.dst not in final:
                guards_safe.append(e.guard)
    # letters with no successor at all are treated as entering a
    # non-accepting dead state, which the self-loop absorbs
    loop_guard = L.Or(L.disj(guards_safe), L.Not(L.disj(guards_all)))
    for c in to_cubes(loop_guard):
        edges.append((idx[q0], frozenset(c.items()), idx[q0]))
    edges.append((sink, frozenset(), sink))
    labels = [nfa.labels[q] if nfa.labels else str(q) for q in keep] + ["rej"]
    marked = set(range(len(keep)))
    aut = _finish(len(keep) + 1, idx[q0], edges, marked, nfa.props, labels,
                  BUCHI, UNIVERSAL, trim=False)
    sink_id = None
    for q in aut.states:
        if q not in aut.marked:
            sink_id = q
    return SafetyAutomaton(aut, sink_id)


def relax_fg(b: SafetyAutomaton) -> RelaxedAutomaton:
    """Redirect every sink-bound edge to the initial state and mark it Rej."""
    base = b.base
    if b.sink is None:
        return RelaxedAutomaton(
            SymbolicAutomaton(base.n_states, base.initial, base.edges, BUCHI,
                              frozenset(base.states), UNIVERSAL, base.props, base.labels),
            frozenset())
    keep = [q for q in base.states if q != b.sink]
    idx = {q: i for i, q in enumerate(keep)}
    edges = []
    rej = set()
    for e in base.edges:
        if e.src == b.sink:
            continue
        if e.dst == b.sink:
            rej.add(len(edges))
            edges.append(Edge(idx[e.src], e.guard, idx[base.initial]))
        else:
            edges.append(Edge(idx[e.src], e.guard, idx[e.dst]))
    labels = tuple(base.labels[q] for q in keep) if base.labels else ()
    aut = SymbolicAutomaton(len(keep), idx[base.initial], tuple(edges), BUCHI,
                            frozenset(range(len(keep))), UNIVERSAL, base.props, labels)
    return RelaxedAutomaton(aut, frozenset(rej))


def letter_mask_guard(props: tuple[str, ...], mask: int) -> dict[str, bool]:
    return {p: bool(mask >> i & 1) for i, p in enumerate(props)}


def all_valuations(props: tuple[str, ...]):
    for bits in product((False, True), repeat=len(props)):
        yield dict(zip(props, bits))


_compiled: dict = {}


def compile_guard(guard: Formula, props: tuple[str, ...]) -> tuple[tuple[int, int], ...]:
    """Guard as ``(positive mask, negative mask)`` cubes over ``props``.

    A letter (bitmask over ``props``) satisfies the guard iff for some cube
    ``letter & pos == pos`` and ``letter & neg == 0``.
    """
    key = (guard, props)
    hit = _compiled.get(key)
    if hit is not None:
        return hit
    pos_of = {p: i for i, p in enumerate(props)}
    stray = atoms(guard) - set(props)
    if stray:
        raise ValueError(f"alphabet mismatch: {sorted(stray)} not among {list(props)}")
    out = []
    for cube in to_cubes(guard):
        pos = neg = 0
        for name, val in cube.items():
            if val:
                pos |= 1 << pos_of[name]
            else:
                neg |= 1 << pos_of[name]
        out.append((pos, neg))
    res = tuple(out)
    _compiled[key] = res
    return res


def guard_holds(cubes, letter: int) -> bool:
    return any(letter & pos == pos and not letter & neg for pos, neg in cubes)
