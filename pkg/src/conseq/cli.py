"""Command line front end.

Exit codes: 0 success, 1 parse error, 2 resource exhaustion, 3 validation
failure. Consequence names print one per line in lexicographic order; a
core-based run that stops at a bracket prints INCOMPLETE followed by U:/O:
lines. Backbone reporting follows the declared DIMACS vocabulary: variables
that occur in no clause are listed as backbone members exactly when the
formula is unsatisfiable (vacuously true in all of its zero models), which is
why incoherence is re-checked even when the strategy finished early.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

from .generate import gen_instances
from .logic import CnfFormula, Program, Theory, Vocabulary, atoms_of
from .parsers import ParseError, parse_dimacs, parse_program, render_dimacs, render_program
from .runner import CH, FS, FS_THEN_CH, MIXED, OV, UN, Interrupted, RunResult, StrategyConfig, run
from .trace import deserialize, serialize, validate_semantics, validate_structure

ALGOS = {
    "over": OV,
    "under": UN,
    "mixed": MIXED,
    "chunk": CH,
    "core": FS,
    "core-chunk": FS_THEN_CH,
}
BENCH_ALGOS = ("over", "under", "mixed", "chunk-2", "chunk-20pct", "core", "core-chunk")


def _solver_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--algo", choices=sorted(ALGOS), default="under")
    sub.add_argument("--chunk-size", type=int, metavar="K")
    sub.add_argument("--chunk-pct", type=int, metavar="P")
    sub.add_argument("--order", choices=("asc", "desc", "shuffle"), default="asc")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--trace", metavar="PATH", help="write the run trace here")
    sub.add_argument("--check", action="store_true", help="validate the trace before reporting")
    sub.add_argument("--timeout", type=float, metavar="SECONDS")
    sub.add_argument("--json", action="store_true")


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conseq")
    subs = p.add_subparsers(dest="command", required=True)

    c = subs.add_parser("cautious", help="cautious consequences of a ground normal program")
    c.add_argument("file")
    _solver_flags(c)

    b = subs.add_parser("backbone", help="backbone of a DIMACS CNF formula")
    b.add_argument("file")
    _solver_flags(b)

    v = subs.add_parser("validate", help="check a recorded trace against its input")
    v.add_argument("trace")
    v.add_argument("file")
    v.add_argument("--oracle", choices=("stable", "classical"), default=None)

    g = subs.add_parser("gen", help="write random instances")
    g.add_argument("--kind", choices=("program", "3cnf"), default="program")
    g.add_argument("--count", type=int, default=10)
    g.add_argument("--atoms", type=int, default=6)
    g.add_argument("--size", type=int, default=10)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, metavar="DIR")

    e = subs.add_parser("bench", help="run every strategy over a directory of instances")
    e.add_argument("dir")
    e.add_argument("--algos", default=",".join(BENCH_ALGOS), metavar="CSV")
    e.add_argument("--timeout", type=float, default=10.0, metavar="SECONDS")
    return p


def _load(path: str) -> tuple[Theory, Vocabulary]:
    text = Path(path).read_text(encoding="utf-8")
    if path.endswith((".cnf", ".dimacs")):
        return parse_dimacs(text)
    return parse_program(text)


def _config(args: argparse.Namespace) -> StrategyConfig:
    algo = ALGOS[args.algo]
    size, pct = args.chunk_size, args.chunk_pct
    if algo in (CH, FS_THEN_CH) and size is None and pct is None:
        size = 2
    return StrategyConfig(
        algorithm=algo,
        chunk_size=size,
        chunk_percent=pct,
        candidate_order=args.order,
        seed=args.seed,
        oracle_kind=None,
    )


def _report(result: RunResult, base: Theory, vocab: Vocabulary, args: argparse.Namespace) -> int:
    names = None
    if result.consequences is not None:
        members = set(result.consequences)
        if isinstance(base, CnfFormula) and not result.coherent:
            members.update(range(base.n_vars))
        names = sorted(vocab.name_of(a) for a in members)
    if args.json:
        doc: dict = {
            "oracle_calls": result.oracle_calls,
            "conflicts": result.conflicts,
            "coherent": result.coherent,
        }
        if names is not None:
            doc["consequences"] = names
        else:
            over, under = result.bounds[0], result.bounds[1]
            doc["incomplete"] = True
            doc["over"] = sorted(vocab.name_of(a) for a in over)
            doc["under"] = sorted(vocab.name_of(a) for a in under)
        print(json.dumps(doc))
        return 0
    if names is not None:
        for name in names:
            print(name)
        return 0
    over, under = result.bounds
    print("INCOMPLETE")
    print("U: " + " ".join(sorted(vocab.name_of(a) for a in under)))
    print("O: " + " ".join(sorted(vocab.name_of(a) for a in over)))
    return 0


def _cmd_solve(args: argparse.Namespace) -> int:
    try:
        base, vocab = _load(args.file)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ParseError as exc:
        print(f"error: {args.file}:{exc.line}: {exc}", file=sys.stderr)
        return 1
    if args.command == "cautious" and not isinstance(base, Program):
        print("error: cautious expects a program, not a CNF file", file=sys.stderr)
        return 1
    if args.command == "backbone" and not isinstance(base, CnfFormula):
        print("error: backbone expects a DIMACS CNF file", file=sys.stderr)
        return 1
    try:
        cfg = _config(args)
        result = run(base, cfg, timeout=args.timeout)
    except Interrupted as exc:
        print(
            "error: resource limit; established "
            f"{sorted(vocab.name_of(a) for a in exc.under)} .. "
            f"{sorted(vocab.name_of(a) for a in exc.over)}",
            file=sys.stderr,
        )
        if args.trace:
            Path(args.trace).write_text(serialize(exc.trace, vocab), encoding="utf-8")
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.trace:
        Path(args.trace).write_text(serialize(result.trace, vocab), encoding="utf-8")
    if args.check:
        code = _validate_events(result.trace, base, None)
        if code:
            return code
    return _report(result, base, vocab, args)


def _validate_events(events, base: Theory, kind: str | None) -> int:
    structure = validate_structure(events, base)
    try:
        semantics = validate_semantics(events, base, kind)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    bad = structure.violations + semantics.violations
    for step, check, detail in bad:
        print(f"step {step} {check}: {detail}", file=sys.stderr)
    return 3 if bad else 0


def _cmd_validate(args: argparse.Namespace) -> int:
    try:
        base, vocab = _load(args.file)
        events = deserialize(Path(args.trace).read_text(encoding="utf-8"), vocab)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ParseError as exc:
        print(f"error: line {exc.line}: {exc}", file=sys.stderr)
        return 1
    code = _validate_events(events, base, args.oracle)
    if code == 0:
        print("OK")
    return code


def _cmd_gen(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        batch = gen_instances(args.kind, args.count, args.atoms, args.size, args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for name, base, vocab in batch:
        if isinstance(base, Program):
            (out / f"{name}.lp").write_text(render_program(base, vocab), encoding="utf-8")
        else:
            (out / f"{name}.cnf").write_text(render_dimacs(base), encoding="utf-8")
    print(f"wrote {len(batch)} instances to {out}", file=sys.stderr)
    return 0


def _bench_config(name: str) -> StrategyConfig:
    if name == "chunk-2":
        return StrategyConfig(algorithm=CH, chunk_size=2)
    if name == "chunk-20pct":
        return StrategyConfig(algorithm=CH, chunk_percent=20)
    if name == "core-chunk":
        return StrategyConfig(algorithm=FS_THEN_CH, chunk_size=2)
    if name in ("over", "under", "mixed", "core"):
        return StrategyConfig(algorithm=ALGOS[name])
    raise ValueError(f"unknown bench strategy {name!r}")


def _cmd_bench(args: argparse.Namespace) -> int:
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    try:
        configs = {a: _bench_config(a) for a in algos}
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    root = Path(args.dir)
    files = sorted(p for p in root.iterdir() if p.suffix in (".lp", ".cnf", ".dimacs"))
    writer = csv.writer(sys.stdout)
    writer.writerow(["instance", "algorithm", "solved", "wall_time_ms", "oracle_calls", "consequences"])
    for path in files:
        try:
            base, vocab = _load(str(path))
        except ParseError as exc:
            print(f"warning: {path}:{exc.line}: {exc}", file=sys.stderr)
            writer.writerow([path.name, "warning", "false", 0, 0, ""])
            continue
        for name in algos:
            t0 = time.monotonic()
            try:
                result = run(base, configs[name], timeout=args.timeout)
            except Interrupted as exc:
                writer.writerow(
                    [path.name, name, "false", int(args.timeout * 1000), exc.oracle_calls, ""]
                )
                continue
            ms = int(round((time.monotonic() - t0) * 1000))
            if result.consequences is not None:
                count = str(len(result.consequences))
            else:
                over, under = result.bounds
                count = f"{len(under)}..{len(over)}"
            writer.writerow([path.name, name, "true", ms, result.oracle_calls, count])
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command in ("cautious", "backbone"):
        return _cmd_solve(args)
    if args.command == "validate":
        return _cmd_validate(args)
    if args.command == "gen":
        return _cmd_gen(args)
    return _cmd_bench(args)
