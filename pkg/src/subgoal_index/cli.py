"""Command line: replay table scripts and run the retrieval benchmarks.

Script lines::

    table p/3
    call p(1,2,3)          # insert and start evaluating
    complete p(1,2,3)
    retrieve p(X,2,X) eirs # or nirs / sirs; eirs when omitted
    dump
"""

from __future__ import annotations

import argparse
import itertools
import sys
from typing import Optional, TextIO

from .baselines import LeafRegistry, collect_nirs, collect_sirs
from .bench import Algorithm, BenchSpec, Program, BenchResult, run_bench
from .matcher import collect_subsumed_subgoals
from .terms import TermSyntaxError, call_indicator, format_term, parse_term
from .trie import ArityError, LifecycleError, SubgoalTrie

EXIT_OK, EXIT_SCRIPT, EXIT_USAGE = 0, 1, 2


class ScriptError(Exception):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class ScriptRunner:
    def __init__(self, out: TextIO):
        self.out = out
        self.tables: dict[tuple[str, int], tuple[SubgoalTrie, LeafRegistry]] = {}

    def run(self, lines) -> None:
        for lineno, line in enumerate(lines, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                self.execute(line)
            except (TermSyntaxError, ArityError, LifecycleError, ValueError) as exc:
                raise ScriptError(lineno, str(exc)) from exc

    def _table_for(self, text: str):
        term = parse_term(text)
        try:
            key = call_indicator(term)
        except TypeError as exc:
            raise ValueError(str(exc)) from None
        if key not in self.tables:
            raise ValueError(f"no table declared for {key[0]}/{key[1]}")
        trie, registry = self.tables[key]
        return term, trie, registry

    def execute(self, line: str) -> None:
        command, _, rest = line.partition(" ")
        rest = rest.strip()
        if command == "table":
            name, sep, arity = rest.partition("/")
            if not sep or not name or not arity.isdigit():
                raise ValueError(f"expected name/arity, got {rest!r}")
            key = (name.strip(), int(arity))
            if key in self.tables:
                raise ValueError(f"table {name}/{arity} declared twice")
            self.tables[key] = (SubgoalTrie(*key), LeafRegistry())
        elif command == "call":
            term, trie, registry = self._table_for(rest)
            frame, was_new = trie.check_insert(term)
            if was_new:
                registry.add(frame.leaf)
            trie.mark_evaluating(frame)
        elif command == "complete":
            term, trie, _ = self._table_for(rest)
            frame = trie.lookup_variant(term)
            if frame is None:
                raise LifecycleError(f"{format_term(term)} was never called")
            trie.mark_completed(frame)
        elif command == "retrieve":
            head, _, last = rest.rpartition(" ")
            algorithm = Algorithm.EIRS
            if head and last.lower() in {a.value for a in Algorithm}:
                algorithm, rest = Algorithm(last.lower()), head
            term, trie, registry = self._table_for(rest)
            if algorithm is Algorithm.EIRS:
                frames = collect_subsumed_subgoals(trie, term)
            elif algorithm is Algorithm.SIRS:
                frames = collect_sirs(trie, term)
            else:
                frames = collect_nirs(trie, registry, term)
            for frame in frames:
                print(format_term(frame.call), file=self.out)
        elif command == "dump":
            if rest:
                raise ValueError("dump takes no argument")
            for trie, _ in self.tables.values():
                for text in trie.dump():
                    print(text, file=self.out)
        else:
            raise ValueError(f"unknown command {command!r}")


def run_script(path: str, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_SCRIPT
    try:
        ScriptRunner(out).run(lines)
    except ScriptError as exc:
        print(f"{path}:{exc.lineno}: error: {exc.__cause__}", file=err)
        return EXIT_SCRIPT
    return EXIT_OK


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subgoal-index", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="replay a table script")
    run.add_argument("script")

    bench = sub.add_parser("bench", help="time retrieval on a synthetic workload")
    bench.add_argument("--program", nargs="+", required=True, choices=[p.value for p in Program])
    bench.add_argument("--n", nargs="+", required=True, type=_positive)
    bench.add_argument("--alg", nargs="+", required=True, choices=[a.value for a in Algorithm])
    bench.add_argument("--repeats", type=_positive, default=3)
    bench.add_argument("--csv", action="store_true",
                       help="CSV output (the default; accepted for explicitness)")
    bench.add_argument("--no-warmup", action="store_true", help="skip the discarded warm-up run")
    bench.add_argument("--plot", metavar="FILE",
                       help="also render retrieval time against n to FILE (needs two or more --n values)")
    return parser


def bench_command(args, out: Optional[TextIO] = None) -> list[BenchResult]:
    out = out or sys.stdout
    results = []
    print(BenchResult.CSV_HEADER, file=out)
    for program, n, alg in itertools.product(args.program, args.n, args.alg):
        result = run_bench(BenchSpec(program, n, alg, args.repeats), warmup=not args.no_warmup)
        print(result.csv_row(), file=out, flush=True)
        results.append(result)
    if args.plot:
        from .report import plot_scaling
        plot_scaling(results, args.plot)
    return results


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        return run_script(args.script)
    if args.plot and len(set(args.n)) < 2:
        parser.error("--plot needs at least two distinct --n values")
    bench_command(args)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
