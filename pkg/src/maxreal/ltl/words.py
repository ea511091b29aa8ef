"""Direct LTL semantics on ultimately periodic words ``u . v^omega``.

This evaluator shares no code with the automata constructions and serves
as the reference the rest of the toolkit is tested against.
"""

from __future__ import annotations

from typing import Sequence

from .formula import (AND, ATOM, FALSE_K, FINALLY, GLOBALLY, IMPLIES, NEXT,
                      NOT, OR, RELEASE, TRUE_K, UNTIL, Formula)

Letter = frozenset  # set of atoms that hold


def holds_on_lasso(f: Formula, prefix: Sequence[Letter], loop: Sequence[Letter]) -> bool:
    """Does ``prefix . loop^omega`` satisfy ``f`` at position 0?"""
    if not loop:
        raise ValueError("loop part of a lasso must be nonempty")
    word = list(prefix) + list(loop)
    n = len(word)
    back = len(prefix)
    succ = [i + 1 for i in range(n - 1)] + [back]
    return _eval(f, word, succ, {})[0]


def _eval(f: Formula, word, succ, memo) -> list[bool]:
    hit = memo.get(f)
    if hit is not None:
        return hit
    n = len(word)
    k = f.kind
    if k == TRUE_K:
        r = [True] * n
    elif k == FALSE_K:
        r = [False] * n
    elif k == ATOM:
        r = [f.name in w for w in word]
    elif k == NOT:
        a = _eval(f.arg, word, succ, memo)
        r = [not x for x in a]
    elif k in (AND, OR, IMPLIES):
        a = _eval(f.left, word, succ, memo)
        b = _eval(f.right, word, succ, memo)
        if k == AND:
            r = [x and y for x, y in zip(a, b)]
        elif k == OR:
            r = [x or y for x, y in zip(a, b)]
        else:
            r = [(not x) or y for x, y in zip(a, b)]
    elif k == NEXT:
        a = _eval(f.arg, word, succ, memo)
        r = [a[succ[i]] for i in range(n)]
    elif k in (UNTIL, FINALLY):
        if k == UNTIL:
            a = _eval(f.left, word, succ, memo)
            b = _eval(f.right, word, succ, memo)
        else:
            a = [True] * n
            b = _eval(f.arg, word, succ, memo)
        r = _fixpoint(a, b, succ, least=True)
    else:  # RELEASE, GLOBALLY
        if k == RELEASE:
            a = _eval(f.left, word, succ, memo)
            b = _eval(f.right, word, succ, memo)
        else:
            a = [False] * n
            b = _eval(f.arg, word, succ, memo)
        r = _fixpoint(a, b, succ, least=False)
    memo[f] = r
    return r


def _fixpoint(a, b, succ, least: bool) -> list[bool]:
    # until:   x = b | (a & X x)   least fixpoint
    # release: x = b & (a | X x)   greatest fixpoint
    n = len(a)
    x = [not least] * n
    changed = True
    while changed:
        changed = False
        for i in range(n - 1, -1, -1):
            nxt = x[succ[i]]
            v = (b[i] or (a[i] and nxt)) if least else (b[i] and (a[i] or nxt))
            if v != x[i]:
                x[i] = v
                changed = True
    return x


def all_lassos(alphabet: Sequence[Letter], max_prefix: int, max_loop: int):
    """Every lasso with ``|prefix| <= max_prefix`` and ``1 <= |loop| <= max_loop``."""
    from itertools import product

    for lp in range(max_prefix + 1):
        for prefix in product(alphabet, repeat=lp):
            for ll in range(1, max_loop + 1):
                for loop in product(alphabet, repeat=ll):
                    yield prefix, loop


def all_letters(props: Sequence[str]) -> list[Letter]:
    out = []
    for mask in range(1 << len(props)):
        out.append(frozenset(p for i, p in enumerate(props) if mask >> i & 1))
    return out
