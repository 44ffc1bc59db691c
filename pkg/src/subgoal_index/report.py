"""Figures for benchmark results."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.ticker import FuncFormatter  # noqa: E402

from .bench import BenchResult  # noqa: E402

_STYLE = {
    "eirs": dict(color="#1b6ca8", marker="o"),
    "sirs": dict(color="#d08c1d", marker="s"),
    "nirs": dict(color="#b5332e", marker="^"),
}


def plot_scaling(results: Sequence[BenchResult], path) -> Path:
    """Log-log retrieval time against subgoal count, one panel per program."""
    by_program: dict[str, dict[str, list[BenchResult]]] = defaultdict(lambda: defaultdict(list))
    for r in results:
        by_program[r.spec.program.value][r.spec.algorithm.value].append(r)

    programs = [p for p in ("empty", "one", "end") if p in by_program]
    fig, axes = plt.subplots(1, len(programs), figsize=(4.2 * len(programs), 3.6), squeeze=False)
    for ax, program in zip(axes[0], programs):
        for alg, rows in sorted(by_program[program].items()):
            rows = sorted(rows, key=lambda r: r.spec.n)
            ns = [r.spec.n for r in rows]
            ms = [max(r.retrieval_time, 1e-3) for r in rows]
            ax.plot(ns, ms, label=alg.upper(), **_STYLE.get(alg, {}))
        ax.set_xscale("log")
        ax.set_yscale("log")
        plain = FuncFormatter(lambda v, _: f"{v:g}")
        ax.xaxis.set_major_formatter(plain)
        ax.yaxis.set_major_formatter(plain)
        ax.yaxis.set_minor_formatter(FuncFormatter(lambda v, _: ""))
        ax.set_title(program)
        ax.set_xlabel("subgoals (n)")
        ax.grid(True, which="major", alpha=0.3)
    axes[0][0].set_ylabel("retrieval time (ms)")
    axes[0][-1].legend(frameon=False)
    fig.tight_layout()

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
