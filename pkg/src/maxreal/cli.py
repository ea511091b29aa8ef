"""Command-line front end.

Exit codes: 0 success (certified implementation, or all checks passed),
1 error, 2 hard specification unrealizable within the bounds tried (or
violated, for ``check``), 3 no answer within the time budget.
"""

from __future__ import annotations

import argparse
import logging
import random
import sys
from dataclasses import replace
from pathlib import Path

from .bench import gen_robot, power_instance
from .encoding import encode, stats, to_wdimacs
from .ltl.problem import SCHEMES, SpecProblem
from .maxsat import DEFAULT_EXTERNAL
from .specfile import emit_spec, parse_spec
from .synth import (SynthesisOptions, implementation_dot, parse_report,
                    run_report, synthesize_max, value_from_levels)
from .transition_system import (counterexample, format_lasso, from_dot,
                                satisfied_levels)

log = logging.getLogger("maxreal")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNREALIZABLE = 2
EXIT_UNDECIDED = 3


def _add_synth_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--min-bound", type=int, default=2)
    p.add_argument("--max-bound", type=int, default=8)
    p.add_argument("--bound", type=int, help="solve this single bound only")
    p.add_argument("--schedule", default="+2", help="'+k' adds k per round, 'x2' doubles")
    p.add_argument("--threshold", type=int, help="stop once this satisfied weight is reached")
    p.add_argument("--timeout-s", type=float, help="wall-clock budget for the whole run")
    p.add_argument("--backend", choices=("builtin", "external"), default="builtin")
    p.add_argument("--solver-cmd", default=DEFAULT_EXTERNAL,
                   help="external MaxSAT command; the WDIMACS path is appended")
    p.add_argument("--out", type=Path, help="directory for the DOT file and the run report")
    p.add_argument("--emit-wcnf", action="store_true", help="also write each bound's WDIMACS")
    p.add_argument("--scheme", choices=SCHEMES, help="override the spec's weight scheme")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="maxreal", description="Maximum realizability synthesis")
    ap.add_argument("--seed", type=int, default=0, help="seed for any randomized helper")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize an implementation for a spec file")
    p.add_argument("spec", type=Path)
    _add_synth_flags(p)

    p = sub.add_parser("encode", help="write the MaxSAT instance for one bound")
    p.add_argument("spec", type=Path)
    p.add_argument("--bound", type=int, required=True)
    p.add_argument("--out", type=Path, default=Path("."))
    p.add_argument("--scheme", choices=SCHEMES)

    p = sub.add_parser("check", help="evaluate an implementation against a spec")
    p.add_argument("spec", type=Path)
    p.add_argument("--impl", type=Path, required=True, help="DOT file or run report")

    p = sub.add_parser("bench", help="run a built-in benchmark")
    p.add_argument("family", choices=("robot", "power"))
    p.add_argument("instance", nargs="?", type=int)
    p.add_argument("--emit-spec", type=Path, help="write the generated spec file and exit")
    _add_synth_flags(p)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    random.seed(args.seed)
    try:
        if args.command == "synth":
            return _synth(_load(args.spec), args)
        if args.command == "encode":
            return _encode(args)
        if args.command == "check":
            return _check(args)
        return _bench(args)
    except (OSError, ValueError, KeyError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def _load(path: Path) -> SpecProblem:
    return parse_spec(path.read_text())


def _options(args) -> SynthesisOptions:
    lo, hi = args.min_bound, args.max_bound
    if args.bound is not None:
        lo = hi = args.bound
    return SynthesisOptions(min_bound=lo, max_bound=hi, schedule=args.schedule,
                            threshold=args.threshold, time_limit=args.timeout_s,
                            backend=args.backend, solver_cmd=args.solver_cmd)


def _synth(problem: SpecProblem, args) -> int:
    if args.scheme:
        problem = replace(problem, scheme=args.scheme)
    opts = _options(args)
    if args.emit_wcnf and args.out is None:
        raise ValueError("--emit-wcnf needs --out")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)

    def progress(rec):
        log.info("bound %d: %s weight %s of %d (%d ms)", rec.bound, rec.status,
                 "-" if rec.weight is None else rec.weight, rec.weight_bound,
                 rec.encode_ms + rec.solve_ms)
        if args.emit_wcnf:
            enc = encode(problem, rec.bound)
            stem = args.out / f"{problem.name or 'spec'}_b{rec.bound}"
            stem.with_suffix(".wcnf").write_text(to_wdimacs(enc.wcnf))
            stem.with_suffix(".varmap").write_text(enc.vt.to_varmap())

    result = synthesize_max(problem, opts, log=progress)
    dot_name = None
    if args.out is not None and result.implementation is not None:
        dot_name = "implementation.dot"
        (args.out / dot_name).write_text(implementation_dot(result))
    report = run_report(result, dot_name)
    if args.out is not None:
        (args.out / "report.txt").write_text(report)
    sys.stdout.write(report)
    if result.implementation is not None:
        return EXIT_OK
    if result.records and all(r.status == "hard_unsat" for r in result.records):
        return EXIT_UNREALIZABLE
    return EXIT_UNDECIDED


def _encode(args) -> int:
    problem = _load(args.spec)
    if args.scheme:
        problem = replace(problem, scheme=args.scheme)
    enc = encode(problem, args.bound)
    args.out.mkdir(parents=True, exist_ok=True)
    stem = args.out / f"{problem.name or args.spec.stem}_b{args.bound}"
    stem.with_suffix(".wcnf").write_text(to_wdimacs(enc.wcnf))
    stem.with_suffix(".varmap").write_text(enc.vt.to_varmap())
    nvars, nclauses, weight = stats(enc.wcnf)
    print(f"wrote {stem}.wcnf and {stem}.varmap")
    print(f"vars: {nvars} clauses: {nclauses} total_soft_weight: {weight}")
    return EXIT_OK


def _check(args) -> int:
    problem = _load(args.spec)
    impl_path: Path = args.impl
    text = impl_path.read_text()
    if not text.lstrip().startswith("digraph"):
        # a run report points at its DOT file
        dot = None
        for block in parse_report(text):
            if "implementation" in block:
                dot = block["implementation"]
        if dot is None:
            raise ValueError(f"{impl_path} is neither a DOT file nor a report naming one")
        text = (impl_path.parent / dot).read_text()
    ts = from_dot(text, problem.inputs, problem.outputs)
    cex = counterexample(ts, problem.hard_formula)
    print(f"states: {ts.n_states}")
    print(f"hard: {'satisfied' if cex is None else 'violated'}")
    if cex is not None:
        print(f"counterexample: {format_lasso(*cex)}")
    levels = [satisfied_levels(ts, s) for s in problem.soft]
    for j, (spec, row) in enumerate(zip(problem.soft, levels), 1):
        best = next((str(f) for f, ok in zip(spec.relax_chain, row) if ok), "none")
        print(f"soft {j}: {best}")
    value = value_from_levels(levels, problem.scheme)
    print(f"value: ({', '.join(map(str, value))})")
    return EXIT_OK if cex is None else EXIT_UNREALIZABLE


def _bench(args) -> int:
    if args.family == "robot":
        problem = gen_robot()
    else:
        if args.instance is None:
            raise ValueError("power benchmark needs an instance number")
        problem = power_instance(args.instance)
    if args.emit_spec is not None:
        args.emit_spec.write_text(emit_spec(problem))
        print(f"wrote {args.emit_spec}")
        return EXIT_OK
    return _synth(problem, args)


if __name__ == "__main__":
    sys.exit(main())
