"""Generators for the museum-robot and power-network benchmark families."""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations
from math import ceil, log2

from .ltl.formula import (And, Atom, Finally, Formula, Globally, Implies, Next,
                          Not, Or, Until, conj, disj)
from .ltl.problem import SoftSpec, SpecProblem

# ---------------------------------------------------------------------------
# robot

ROBOT_LOCATIONS = ("ent", "corr1", "corr2", "exh1", "exh2", "passage", "office", "library")

# location -> locations reachable in one step (staying put included)
ROBOT_MAP = {
    "ent": ("ent", "corr1", "corr2"),
    "corr1": ("corr1", "office", "exh1"),
    "corr2": ("corr2", "ent", "exh2"),
    "exh1": ("exh1", "corr1", "passage", "library"),
    "exh2": ("exh2", "corr2", "passage", "library"),
    "passage": ("passage", "exh1", "exh2"),
    "office": ("office", "corr1"),
    "library": ("library", "exh1", "exh2"),
}


def gen_robot(adjacency: dict[str, tuple[str, ...]] | None = None) -> SpecProblem:
    adj = adjacency or ROBOT_MAP
    a = {name: Atom(name) for name in ROBOT_LOCATIONS}
    occupied = Atom("occupied")
    hard: list[Formula] = [a["ent"]]
    hard.append(Globally(conj(
        Implies(a[o1], conj(Not(a[o2]) for o2 in ROBOT_LOCATIONS if o2 != o1))
        for o1 in ROBOT_LOCATIONS)))
    for loc in ROBOT_LOCATIONS:
        hard.append(Globally(Implies(a[loc], Next(disj(a[t] for t in adj[loc])))))
    hard.append(Globally(Finally(a["exh1"])))
    hard.append(Globally(Finally(a["exh2"])))
    order = [("exh1", "ent", "exh2"), ("exh2", "exh1", "ent"), ("ent", "exh2", "exh1")]
    for here, avoid, goal in order:
        # leaving `here`, avoid `avoid` and `here` until `goal`
        hard.append(Globally(Implies(a[here], Next(Until(
            And(Not(a[avoid]), Not(a[here])), a[goal])))))
    hard.append(Until(Not(a["exh2"]), a["office"]))
    exh = Or(a["exh1"], a["exh2"])
    soft = [
        Globally(Implies(a["corr1"], Next(Not(a["office"])))),
        Globally(Implies(exh, Next(Not(a["library"])))),
        Globally(Implies(And(exh, Next(occupied)), Next(Not(a["passage"])))),
    ]
    return SpecProblem(("occupied",), ROBOT_LOCATIONS, tuple(hard),
                       tuple(SoftSpec.default(f) for f in soft), name="robot")


# ---------------------------------------------------------------------------
# power network

@dataclass(frozen=True)
class PowerParams:
    supplies: int
    loads: int
    capacity: int
    critical: int
    noncritical: int
    initializing: int
    faults: int = 1
    connectivity: str = "full"  # or "sparse"
    switching_restricted: bool = False

    def __post_init__(self):
        if self.critical + self.noncritical + self.initializing != self.loads:
            raise ValueError("critical + non-critical + initializing must equal the load count")
        if min(self.supplies, self.loads, self.capacity) < 1:
            raise ValueError("supplies, loads and capacity must be positive")
        if self.faults < 0:
            raise ValueError("fault count must be non-negative")
        if self.connectivity not in ("full", "sparse"):
            raise ValueError(f"unknown connectivity {self.connectivity!r}")

    def supl(self, load: int) -> tuple[int, ...]:
        """Supplies (0-based) load ``load`` (0-based) is wired to."""
        if self.connectivity == "full":
            return tuple(range(self.supplies))
        return tuple(sorted({load % self.supplies, (load + 1) % self.supplies}))

    def cons(self, supply: int) -> tuple[int, ...]:
        return tuple(l for l in range(self.loads) if supply in self.supl(l))

    def kind(self, load: int) -> str:
        if load < self.critical:
            return "critical"
        if load < self.critical + self.noncritical:
            return "noncritical"
        return "initializing"

    @property
    def fault_bits(self) -> int:
        return ceil(log2(self.supplies + 1))


def switch_name(load: int, supply: int) -> str:
    return f"s{load + 1}_{supply + 1}"


def fault_bit_name(i: int, k: int) -> str:
    return f"e{i + 1}_{k}"


def _fault_equals(params: PowerParams, i: int, value: int) -> Formula:
    bits = [Atom(fault_bit_name(i, k)) if value >> k & 1 else Not(Atom(fault_bit_name(i, k)))
            for k in range(params.fault_bits)]
    return conj(bits)


def gen_power(params: PowerParams) -> SpecProblem:
    P = params
    inputs = tuple(fault_bit_name(i, k) for i in range(P.faults) for k in range(P.fault_bits))
    outputs = tuple(switch_name(l, p) for l in range(P.loads) for p in P.supl(l))

    def s(l, p):
        return Atom(switch_name(l, p))

    def powered(l):
        return disj(s(l, p) for p in P.supl(l))

    hard: list[Formula] = []
    for l in range(P.loads):
        if P.kind(l) == "critical":
            hard.append(Globally(powered(l)))
    for l in range(P.loads):
        if P.kind(l) == "initializing":
            hard.append(And(powered(l), Next(powered(l))))
    for l in range(P.loads):
        for p1 in P.supl(l):
            others = [Not(s(l, p2)) for p2 in P.supl(l) if p2 != p1]
            if others:
                hard.append(Globally(Implies(s(l, p1), conj(others))))
    for p in range(P.supplies):
        cons = P.cons(p)
        for chosen in combinations(cons, P.capacity):
            rest = [l for l in cons if l not in chosen]
            if not rest:
                continue
            hard.append(Globally(Implies(conj(s(l, p) for l in chosen),
                                         conj(Not(s(l, p)) for l in rest))))
    for i in range(P.faults):
        for p in range(P.supplies):
            if P.cons(p):
                # supplies are numbered from 1; 0 means no fault
                hard.append(Globally(Implies(_fault_equals(P, i, p + 1),
                                             conj(Not(s(l, p)) for l in P.cons(p)))))

    soft: list[Formula] = []
    for l in range(P.loads):
        if P.kind(l) == "noncritical":
            soft.append(Globally(powered(l)))
    if P.switching_restricted:
        for l in range(P.loads):
            for p in P.supl(l):
                faulty = disj(_fault_equals(P, i, p + 1) for i in range(P.faults))
                soft.append(Globally(Implies(And(s(l, p), Next(Not(faulty))), Next(s(l, p)))))
    return SpecProblem(inputs, outputs, tuple(hard), tuple(SoftSpec.default(f) for f in soft),
                       name=f"power_{P.supplies}x{P.loads}")


# Table of benchmark instances: (supplies, loads, capacity, critical,
# non-critical, initializing, connectivity, switching restricted)
POWER_INSTANCES = {
    1: PowerParams(3, 3, 1, 1, 2, 0, 1, "full"),
    2: PowerParams(3, 6, 2, 2, 4, 0, 1, "full"),
    3: PowerParams(3, 3, 1, 0, 2, 1, 1, "full"),
    4: PowerParams(3, 6, 2, 1, 4, 1, 1, "full"),
    5: PowerParams(4, 2, 1, 1, 1, 0, 1, "sparse"),
    6: PowerParams(4, 4, 1, 1, 3, 0, 1, "sparse"),
    7: PowerParams(4, 6, 1, 1, 5, 0, 1, "sparse"),
    8: PowerParams(4, 8, 1, 1, 7, 0, 1, "sparse"),
    9: PowerParams(4, 2, 1, 1, 1, 0, 1, "sparse", True),
    10: PowerParams(4, 4, 1, 1, 3, 0, 1, "sparse", True),
    11: PowerParams(4, 6, 1, 1, 5, 0, 1, "sparse", True),
    12: PowerParams(4, 8, 1, 1, 7, 0, 1, "sparse", True),
}


def power_instance(k: int) -> SpecProblem:
    if k not in POWER_INSTANCES:
        raise KeyError(f"unknown power instance {k}; choose 1..{len(POWER_INSTANCES)}")
    return replace(gen_power(POWER_INSTANCES[k]), name=f"power{k}")
