"""LTL abstract syntax.

Formulas are hash-consed: structurally equal formulas are the same object,
so equality is identity and hashing is O(1). Build them with the
constructor functions below (``Atom``, ``And``, ``Until``, ...), never by
instantiating :class:`Formula` directly.
"""

from __future__ import annotations

import re
from typing import Iterable, Iterator

TRUE_K = "true"
FALSE_K = "false"
ATOM = "atom"
NOT = "!"
AND = "&"
OR = "|"
IMPLIES = "->"
NEXT = "X"
FINALLY = "F"
GLOBALLY = "G"
UNTIL = "U"
RELEASE = "R"

UNARY = (NOT, NEXT, FINALLY, GLOBALLY)
BINARY = (AND, OR, IMPLIES, UNTIL, RELEASE)
TEMPORAL = (NEXT, FINALLY, GLOBALLY, UNTIL, RELEASE)

_ARITY = {TRUE_K: 0, FALSE_K: 0, ATOM: 0, NOT: 1, NEXT: 1, FINALLY: 1,
          GLOBALLY: 1, AND: 2, OR: 2, IMPLIES: 2, UNTIL: 2, RELEASE: 2}

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
KEYWORDS = frozenset({"true", "false", "X", "F", "G", "U", "R"})

# precedence levels used by the printer (the parser mirrors them)
_PREC = {IMPLIES: 1, OR: 2, AND: 3, UNTIL: 4, RELEASE: 4,
         NOT: 5, NEXT: 5, FINALLY: 5, GLOBALLY: 5,
         ATOM: 6, TRUE_K: 6, FALSE_K: 6}
_RIGHT_ASSOC = (IMPLIES, UNTIL, RELEASE)


class Formula:
    """An immutable, interned LTL formula node."""

    __slots__ = ("kind", "args", "name", "_hash", "_str", "__weakref__")
    _table: dict = {}

    kind: str
    args: tuple
    name: str | None

    def __new__(cls, kind: str, args: tuple = (), name: str | None = None):
        key = (kind, args, name)
        node = cls._table.get(key)
        if node is not None:
            return node
        if _ARITY.get(kind) != len(args):
            raise ValueError(f"bad arity for {kind!r}: {len(args)}")
        if kind == ATOM and (name is None or not IDENT_RE.match(name) or name in KEYWORDS):
            raise ValueError(f"invalid proposition name {name!r}")
        node = object.__new__(cls)
        object.__setattr__(node, "kind", kind)
        object.__setattr__(node, "args", args)
        object.__setattr__(node, "name", name)
        object.__setattr__(node, "_hash", hash(key))
        object.__setattr__(node, "_str", None)
        cls._table[key] = node
        return node

    def __setattr__(self, key, value):
        raise AttributeError("Formula is immutable")

    def __reduce__(self):
        return (Formula, (self.kind, self.args, self.name))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        return self is other

    def __str__(self) -> str:
        if self._str is None:
            object.__setattr__(self, "_str", to_string(self))
        return self._str

    def __repr__(self) -> str:
        return f"Formula({str(self)!r})"

    def __lt__(self, other: "Formula") -> bool:
        return str(self) < str(other)

    @property
    def left(self) -> "Formula":
        return self.args[0]

    @property
    def right(self) -> "Formula":
        return self.args[1]

    @property
    def arg(self) -> "Formula":
        return self.args[0]

    def is_literal(self) -> bool:
        return self.kind == ATOM or (self.kind == NOT and self.args[0].kind == ATOM)

    def is_propositional(self) -> bool:
        return all(f.kind not in TEMPORAL for f in walk(self))

    # operator sugar, handy when building benchmark formulas
    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __invert__(self) -> "Formula":
        return Not(self)

    def __rshift__(self, other: "Formula") -> "Formula":
        return Implies(self, other)


TRUE = Formula(TRUE_K)
FALSE = Formula(FALSE_K)


def Atom(name: str) -> Formula:
    return Formula(ATOM, (), name)


def Not(f: Formula) -> Formula:
    return Formula(NOT, (f,))


def And(a: Formula, b: Formula) -> Formula:
    return Formula(AND, (a, b))


def Or(a: Formula, b: Formula) -> Formula:
    return Formula(OR, (a, b))


def Implies(a: Formula, b: Formula) -> Formula:
    return Formula(IMPLIES, (a, b))


def Next(f: Formula) -> Formula:
    return Formula(NEXT, (f,))


def Finally(f: Formula) -> Formula:
    return Formula(FINALLY, (f,))


def Globally(f: Formula) -> Formula:
    return Formula(GLOBALLY, (f,))


def Until(a: Formula, b: Formula) -> Formula:
    return Formula(UNTIL, (a, b))


def Release(a: Formula, b: Formula) -> Formula:
    return Formula(RELEASE, (a, b))


def conj(fs: Iterable[Formula]) -> Formula:
    """Left-nested conjunction; ``true`` for an empty iterable."""
    out = None
    for f in fs:
        out = f if out is None else And(out, f)
    return TRUE if out is None else out


def disj(fs: Iterable[Formula]) -> Formula:
    out = None
    for f in fs:
        out = f if out is None else Or(out, f)
    return FALSE if out is None else out


def walk(f: Formula) -> Iterator[Formula]:
    """Pre-order traversal (with repetitions for shared subterms)."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(g.args))


def subformulas(f: Formula) -> set[Formula]:
    return set(walk(f))


def size(f: Formula) -> int:
    """Number of operator occurrences (atoms and constants count zero)."""
    return sum(1 for g in walk(f) if g.args)


def atoms(f: Formula) -> set[str]:
    return {g.name for g in walk(f) if g.kind == ATOM}


def depth(f: Formula) -> int:
    if not f.args:
        return 0
    return 1 + max(depth(a) for a in f.args)


def to_string(f: Formula) -> str:
    """Print with the minimal parentheses the parser needs to rebuild ``f``."""
    return _fmt(f)


def _fmt(f: Formula) -> str:
    k = f.kind
    if k == ATOM:
        return f.name
    if k in (TRUE_K, FALSE_K):
        return k
    p = _PREC[k]
    if k in UNARY:
        s = _wrap(f.arg, p)
        return ("!" + s) if k == NOT else f"{k} {s}"
    if k in _RIGHT_ASSOC:
        lhs, rhs = _wrap(f.left, p + 1), _wrap(f.right, p)
    else:
        lhs, rhs = _wrap(f.left, p), _wrap(f.right, p + 1)
    return f"{lhs} {k} {rhs}"


def _wrap(f: Formula, need: int) -> str:
    s = _fmt(f)
    return s if _PREC[f.kind] >= need else f"({s})"


def to_nnf(f: Formula) -> Formula:
    """Negation normal form: ``!`` only on atoms, no ``->``. F and G are kept."""
    return _nnf(f, False)


_nnf_cache: dict = {}


def _nnf(f: Formula, neg: bool) -> Formula:
    key = (f, neg)
    hit = _nnf_cache.get(key)
    if hit is not None:
        return hit
    k = f.kind
    if k == TRUE_K:
        r = FALSE if neg else TRUE
    elif k == FALSE_K:
        r = TRUE if neg else FALSE
    elif k == ATOM:
        r = Not(f) if neg else f
    elif k == NOT:
        r = _nnf(f.arg, not neg)
    elif k == AND:
        a, b = _nnf(f.left, neg), _nnf(f.right, neg)
        r = Or(a, b) if neg else And(a, b)
    elif k == OR:
        a, b = _nnf(f.left, neg), _nnf(f.right, neg)
        r = And(a, b) if neg else Or(a, b)
    elif k == IMPLIES:
        a, b = _nnf(f.left, not neg), _nnf(f.right, neg)
        r = And(a, b) if neg else Or(a, b)
    elif k == NEXT:
        r = Next(_nnf(f.arg, neg))
    elif k == FINALLY:
        a = _nnf(f.arg, neg)
        r = Globally(a) if neg else Finally(a)
    elif k == GLOBALLY:
        a = _nnf(f.arg, neg)
        r = Finally(a) if neg else Globally(a)
    elif k == UNTIL:
        a, b = _nnf(f.left, neg), _nnf(f.right, neg)
        r = Release(a, b) if neg else Until(a, b)
    else:  # RELEASE
        a, b = _nnf(f.left, neg), _nnf(f.right, neg)
        r = Until(a, b) if neg else Release(a, b)
    _nnf_cache[key] = r
    return r


def is_nnf(f: Formula) -> bool:
    for g in walk(f):
        if g.kind == IMPLIES:
            return False
        if g.kind == NOT and g.arg.kind != ATOM:
            return False
    return True


def is_syntactically_safe(f: Formula) -> bool:
    """True iff the NNF of ``f`` has no Until and no Finally."""
    return all(g.kind not in (UNTIL, FINALLY) for g in walk(to_nnf(f)))


def simplify(f: Formula) -> Formula:
    """Constant folding and a few idempotence rules; preserves NNF."""
    return _simp(f)


_simp_cache: dict = {}


def _simp(f: Formula) -> Formula:
    hit = _simp_cache.get(f)
    if hit is not None:
        return hit
    k = f.kind
    if not f.args:
        r = f
    elif k == NOT:
        a = _simp(f.arg)
        r = FALSE if a is TRUE else TRUE if a is FALSE else (a.arg if a.kind == NOT else Not(a))
    elif k == AND:
        a, b = _simp(f.left), _simp(f.right)
        if a is FALSE or b is FALSE:
            r = FALSE
        elif a is TRUE:
            r = b
        elif b is TRUE or a is b:
            r = a
        else:
            r = And(a, b)
    elif k == OR:
        a, b = _simp(f.left), _simp(f.right)
        if a is TRUE or b is TRUE:
            r = TRUE
        elif a is FALSE:
            r = b
        elif b is FALSE or a is b:
            r = a
        else:
            r = Or(a, b)
    elif k == IMPLIES:
        a, b = _simp(f.left), _simp(f.right)
        if a is FALSE or b is TRUE:
            r = TRUE
        elif a is TRUE:
            r = b
        else:
            r = Implies(a, b)
    elif k == NEXT:
        a = _simp(f.arg)
        r = a if a in (TRUE, FALSE) else Next(a)
    elif k == FINALLY:
        a = _simp(f.arg)
        r = a if a in (TRUE, FALSE) or a.kind == FINALLY else Finally(a)
    elif k == GLOBALLY:
        a = _simp(f.arg)
        r = a if a in (TRUE, FALSE) or a.kind == GLOBALLY else Globally(a)
    elif k == UNTIL:
        a, b = _simp(f.left), _simp(f.right)
        if b in (TRUE, FALSE):
            r = b
        elif a is TRUE:
            r = Finally(b) if b.kind != FINALLY else b
        elif a is FALSE:
            r = b
        else:
            r = Until(a, b)
    else:  # RELEASE
        a, b = _simp(f.left), _simp(f.right)
        if b in (TRUE, FALSE):
            r = b
        elif a is FALSE:
            r = Globally(b) if b.kind != GLOBALLY else b
        elif a is TRUE:
            r = b
        else:
            r = Release(a, b)
    _simp_cache[f] = r
    return r


def substitute(f: Formula, values: dict[str, bool]) -> Formula:
    """Replace atoms by constants and simplify (partial evaluation)."""
    if not values:
        return simplify(f)
    return simplify(_subst(f, values, {}))


def _subst(f: Formula, values: dict[str, bool], memo: dict) -> Formula:
    hit = memo.get(f)
    if hit is not None:
        return hit
    if f.kind == ATOM:
        v = values.get(f.name)
        r = f if v is None else (TRUE if v else FALSE)
    elif not f.args:
        r = f
    else:
        r = Formula(f.kind, tuple(_subst(a, values, memo) for a in f.args), f.name)
    memo[f] = r
    return r


def evaluate(f: Formula, letter) -> bool:
    """Evaluate a propositional formula; ``letter`` is a set of true atoms
    or a mapping from atom name to bool."""
    k = f.kind
    if k == ATOM:
        if isinstance(letter, dict):
            return bool(letter.get(f.name, False))
        return f.name in letter
    if k == TRUE_K:
        return True
    if k == FALSE_K:
        return False
    if k == NOT:
        return not evaluate(f.arg, letter)
    if k == AND:
        return evaluate(f.left, letter) and evaluate(f.right, letter)
    if k == OR:
        return evaluate(f.left, letter) or evaluate(f.right, letter)
    if k == IMPLIES:
        return (not evaluate(f.left, letter)) or evaluate(f.right, letter)
    raise ValueError(f"temporal operator {k} in propositional context")


def relax_vector(f: Formula) -> tuple[Formula, Formula, Formula]:
    """Default relaxation chain ``(G p, F G p, G F p)`` of a soft safety spec."""
    if f.kind != GLOBALLY or not is_syntactically_safe(f.arg):
        raise NotSafetyShape(f"expected G psi with psi syntactically safe, got {f}")
    body = f.arg
    return (f, Finally(Globally(body)), Globally(Finally(body)))


class NotSafetyShape(ValueError):
    pass
