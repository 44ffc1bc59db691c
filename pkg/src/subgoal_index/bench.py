"""Synthetic retrieval workloads and their timing.

Three workload shapes over a binary predicate ``p/2``:

``empty``
    ``n`` ground subgoals ``p(i, n-i)`` are each called, completed and then
    probed; a final ``p(X,Y)`` retrieval finds nothing.
``one``
    like ``empty`` but an extra subgoal ``p(0,n)`` is called first and stays
    evaluating; the final retrieval finds exactly it.
``end``
    ``n`` subgoals are called and probed, none complete; the final ``p(X,Y)``
    retrieval finds all of them.

The probe after a step retrieves with the subgoal just handled, the way a
new generator call looks for its instances.  Retrieval counts are ``n+1``,
``n+2`` and ``n+1``.
"""

from __future__ import annotations

import enum
import gc
import time
from dataclasses import dataclass, field
from typing import Callable

from .baselines import LeafRegistry, collect_nirs, collect_sirs
from .matcher import MatcherState, collect_subsumed_subgoals
from .terms import Int, Struct, Term, Var
from .trie import SubgoalTrie

CALL = "call"
COMPLETE = "complete"
RETRIEVE = "retrieve"


class Program(str, enum.Enum):
    EMPTY = "empty"
    ONE = "one"
    END = "end"


class Algorithm(str, enum.Enum):
    EIRS = "eirs"
    NIRS = "nirs"
    SIRS = "sirs"


@dataclass(frozen=True)
class BenchSpec:
    program: Program
    n: int
    algorithm: Algorithm
    repeats: int = 3

    def __post_init__(self):
        object.__setattr__(self, "program", Program(self.program))
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        if self.n <= 0:
            raise ValueError(f"n must be positive, got {self.n}")
        if self.repeats <= 0:
            raise ValueError(f"repeats must be positive, got {self.repeats}")


@dataclass
class BenchResult:
    spec: BenchSpec
    calls: int
    retrieval_time: float
    total_time: float
    results_found: int
    samples: list = field(default_factory=list, repr=False)

    CSV_HEADER = "program,n,algorithm,calls,retrieval_ms,total_ms,results_found"

    def csv_row(self) -> str:
        s = self.spec
        return (f"{s.program.value},{s.n},{s.algorithm.value},{self.calls},"
                f"{self.retrieval_time:.3f},{self.total_time:.3f},{self.results_found}")


@dataclass
class Workload:
    program: Program
    n: int
    steps: list[tuple[str, Term]]
    general: Term

    @property
    def calls(self) -> int:
        return sum(1 for op, _ in self.steps if op == RETRIEVE)


def _goal(a: int, b: int) -> Term:
    return Struct("p", (Int(a), Int(b)))


GENERAL_CALL = Struct("p", (Var(0), Var(1)))


def gen_empty(n: int) -> Workload:
    if n <= 0:
        raise ValueError("n must be positive")
    steps = []
    for i in range(1, n + 1):
        g = _goal(i, n - i)
        steps += [(CALL, g), (COMPLETE, g), (RETRIEVE, g)]
    steps.append((RETRIEVE, GENERAL_CALL))
    return Workload(Program.EMPTY, n, steps, GENERAL_CALL)


def gen_one(n: int) -> Workload:
    if n <= 0:
        raise ValueError("n must be positive")
    extra = _goal(0, n)
    steps = [(CALL, extra), (RETRIEVE, extra)]
    steps += gen_empty(n).steps
    return Workload(Program.ONE, n, steps, GENERAL_CALL)


def gen_end(n: int) -> Workload:
    if n <= 0:
        raise ValueError("n must be positive")
    steps = []
    for i in range(1, n + 1):
        g = _goal(i, n - i)
        steps += [(CALL, g), (RETRIEVE, g)]
    steps.append((RETRIEVE, GENERAL_CALL))
    return Workload(Program.END, n, steps, GENERAL_CALL)


GENERATORS: dict[Program, Callable[[int], Workload]] = {
    Program.EMPTY: gen_empty,
    Program.ONE: gen_one,
    Program.END: gen_end,
}


def run_workload(workload: Workload, algorithm: Algorithm) -> tuple[float, float, int, int]:
    """Execute once; returns (retrieval_ms, total_ms, calls, final result count).

    Retrieval time covers the retrievals and, for EIRS, the counter updates
    done when subgoals start or finish evaluating.  The cyclic garbage
    collector is paused for the run, as ``timeit`` does, so that timings do
    not depend on how many objects the caller keeps alive.
    """
    enabled = gc.isenabled()
    gc.disable()
    try:
        return _run(workload, Algorithm(algorithm))
    finally:
        if enabled:
            gc.enable()


def _run(workload: Workload, algorithm: Algorithm) -> tuple[float, float, int, int]:
    clock = time.perf_counter_ns
    start = clock()
    eirs = algorithm is Algorithm.EIRS
    trie = SubgoalTrie("p", 2, track_in_eval=eirs)
    registry = LeafRegistry()
    state = MatcherState()
    timed = 0
    calls = 0
    found = 0
    for op, goal in workload.steps:
        if op == RETRIEVE:
            t0 = clock()
            if eirs:
                result = collect_subsumed_subgoals(trie, goal, state=state)
            elif algorithm is Algorithm.SIRS:
                result = collect_sirs(trie, goal, state=state)
            else:
                result = collect_nirs(trie, registry, goal)
            timed += clock() - t0
            calls += 1
            found = len(result)
        elif op == CALL:
            frame, was_new = trie.check_insert(goal)
            if was_new:
                registry.add(frame.leaf)
            t0 = clock()
            trie.mark_evaluating(frame)
            if eirs:
                timed += clock() - t0
        else:
            frame = trie.lookup_variant(goal)
            t0 = clock()
            trie.mark_completed(frame)
            if eirs:
                timed += clock() - t0
    total = clock() - start
    return timed / 1e6, total / 1e6, calls, found


def run_bench(spec: BenchSpec, *, warmup: bool = True) -> BenchResult:
    """Mean timings of ``spec.repeats`` runs, after one discarded warm-up run."""
    workload = GENERATORS[spec.program](spec.n)
    if warmup:
        run_workload(workload, spec.algorithm)
    samples = [run_workload(workload, spec.algorithm) for _ in range(spec.repeats)]
    retrieval = sum(s[0] for s in samples) / len(samples)
    total = sum(s[1] for s in samples) / len(samples)
    return BenchResult(spec, samples[0][2], retrieval, total, samples[0][3], samples)
