from __future__ import annotations

from dataclasses import dataclass, field

from .formula import Formula, atoms, conj, relax_vector

SCHEMES = ("default", "general", "priority", "priority_strict", "user")


@dataclass(frozen=True)
class SoftSpec:
    """A soft specification with its relaxation chain, strongest first."""

    formula: Formula
    relax_chain: tuple[Formula, ...]
    weights: tuple[int, ...] | None = None  # per-level user weights

    def __post_init__(self):
        if not self.relax_chain:
            raise ValueError("relaxation chain must be nonempty")
        if self.relax_chain[0] is not self.formula:
            raise ValueError("first chain element must be the soft formula itself")
        if self.weights is not None:
            if len(self.weights) != len(self.relax_chain):
                raise ValueError("one user weight per relaxation level required")
            if any(w < 1 for w in self.weights):
                raise ValueError("user weights must be positive integers")

    @classmethod
    def default(cls, formula: Formula, weights=None) -> "SoftSpec":
        """``G psi`` relaxed to ``(G psi, F G psi, G F psi)``."""
        return cls(formula, relax_vector(formula), weights)

    @property
    def is_default_chain(self) -> bool:
        try:
            return self.relax_chain == relax_vector(self.formula)
        except ValueError:
            return False

    @property
    def m(self) -> int:
        return len(self.relax_chain)


@dataclass(frozen=True)
class SpecProblem:
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    hard: tuple[Formula, ...]  # conjoined in order
    soft: tuple[SoftSpec, ...] = ()
    scheme: str = "default"
    name: str = ""
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if set(self.inputs) & set(self.outputs):
            raise ValueError("input and output propositions must be disjoint")
        if len(set(self.inputs)) != len(self.inputs) or len(set(self.outputs)) != len(self.outputs):
            raise ValueError("duplicate proposition")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown weight scheme {self.scheme!r}")
        known = set(self.inputs) | set(self.outputs)
        for f in self.all_formulas():
            stray = atoms(f) - known
            if stray:
                raise ValueError(f"undeclared propositions {sorted(stray)} in {f}")
        if self.scheme == "default":
            for s in self.soft:
                if not s.is_default_chain:
                    raise ValueError(f"default scheme needs G psi chains, got {s.formula}")
        if self.scheme == "user" and any(s.weights is None for s in self.soft):
            raise ValueError("user scheme requires weights on every soft spec")
        if self.scheme != "default" and len({s.m for s in self.soft}) > 1:
            raise ValueError("all relaxation chains must have the same length")

    def all_formulas(self):
        yield from self.hard
        for s in self.soft:
            yield from s.relax_chain

    @property
    def hard_formula(self) -> Formula:
        return conj(self.hard)

    @property
    def n(self) -> int:
        return len(self.soft)
