"""Plain-text specification files.

Example::

    # restaurant robot
    name: waiter
    inputs: req1 req2
    outputs: table1 table2
    hard: G (!table1 | !table2)
    soft: G (req1 -> X table1)
    soft[weight=1/2/4]: G (req2 -> X table2)
    soft[relax=chain]: G p ; F G p ; G F p
    options: scheme=user

``soft:`` lines default to the chain ``G psi, F G psi, G F psi``; with
``relax=chain`` the line lists the chain members separated by ``;``,
strongest first. ``weight=`` gives one weight per level separated by ``/``.
"""

from __future__ import annotations

import re

from .ltl.formula import relax_vector
from .ltl.parser import ParseError, parse
from .ltl.problem import SCHEMES, SoftSpec, SpecProblem

_LINE_RE = re.compile(r"^(\w+)(?:\[([^\]]*)\])?\s*:(.*)$")
_SECTIONS = {"name", "inputs", "outputs", "hard", "soft", "options"}
_SOFT_KEYS = {"relax", "weight"}
_OPTION_KEYS = {"scheme"}


class SpecFileError(ValueError):
    def __init__(self, msg: str, line: int):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def parse_spec(text: str) -> SpecProblem:
    name = ""
    inputs: list[str] | None = None
    outputs: list[str] | None = None
    hard = []
    soft = []
    options: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE_RE.match(line)
        if not m:
            raise SpecFileError(f"expected 'section: ...', got {raw.strip()!r}", lineno)
        section, opts, body = m.group(1), m.group(2), m.group(3).strip()
        if section not in _SECTIONS:
            raise SpecFileError(f"unknown section {section!r}", lineno)
        if opts is not None and section != "soft":
            raise SpecFileError(f"section {section!r} takes no bracket options", lineno)
        if section == "name":
            name = body
        elif section in ("inputs", "outputs"):
            props = body.split()
            if section == "inputs":
                inputs = (inputs or []) + props
            else:
                outputs = (outputs or []) + props
        elif section == "hard":
            hard.append(_formula(body, lineno))
        elif section == "soft":
            soft.append(_soft(body, opts, lineno))
        else:
            for tok in body.split():
                key, sep, val = tok.partition("=")
                if not sep or key not in _OPTION_KEYS:
                    raise SpecFileError(f"unknown option {tok!r}", lineno)
                options[key] = val
    scheme = options.get("scheme", "default")
    if scheme not in SCHEMES:
        raise SpecFileError(f"unknown scheme {scheme!r}", 0)
    try:
        return SpecProblem(tuple(inputs or ()), tuple(outputs or ()), tuple(hard),
                           tuple(soft), scheme, name)
    except ValueError as exc:
        raise SpecFileError(str(exc), 0) from exc


def _formula(text: str, lineno: int):
    try:
        return parse(text)
    except ParseError as exc:
        raise SpecFileError(f"{exc} (within the formula)", lineno) from exc


def _soft(body: str, opts: str | None, lineno: int) -> SoftSpec:
    settings: dict[str, str] = {}
    for part in (opts or "").split(","):
        part = part.strip()
        if not part:
            continue
        key, sep, val = part.partition("=")
        key = key.strip()
        if not sep or key not in _SOFT_KEYS:
            raise SpecFileError(f"unknown soft option {part!r}", lineno)
        settings[key] = val.strip()
    relax = settings.get("relax", "gfg")
    weights = None
    if "weight" in settings:
        try:
            weights = tuple(int(w) for w in settings["weight"].split("/"))
        except ValueError:
            raise SpecFileError(f"bad weight list {settings['weight']!r}", lineno) from None
    try:
        if relax == "gfg":
            return SoftSpec.default(_formula(body, lineno), weights)
        if relax == "chain":
            chain = tuple(_formula(part, lineno) for part in body.split(";"))
            return SoftSpec(chain[0], chain, weights)
    except ValueError as exc:
        if isinstance(exc, SpecFileError):
            raise
        raise SpecFileError(str(exc), lineno) from exc
    raise SpecFileError(f"unknown relaxation {relax!r}", lineno)


def emit_spec(problem: SpecProblem) -> str:
    lines = []
    if problem.name:
        lines.append(f"name: {problem.name}")
    lines.append(f"inputs: {' '.join(problem.inputs)}")
    lines.append(f"outputs: {' '.join(problem.outputs)}")
    lines.extend(f"hard: {f}" for f in problem.hard)
    for s in problem.soft:
        opts = []
        default_chain = False
        try:
            default_chain = s.relax_chain == relax_vector(s.formula)
        except ValueError:
            pass
        if not default_chain:
            opts.append("relax=chain")
        if s.weights is not None:
            opts.append("weight=" + "/".join(map(str, s.weights)))
        head = f"soft[{','.join(opts)}]" if opts else "soft"
        body = " ; ".join(str(f) for f in s.relax_chain) if not default_chain else str(s.formula)
        lines.append(f"{head}: {body}")
    if problem.scheme != "default":
        lines.append(f"options: scheme={problem.scheme}")
    return "\n".join(lines) + "\n"
