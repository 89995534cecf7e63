"""Latency microbenchmark for the selection phase.

Each (method, size, budget) cell prepares the distribution tables and
score vectors once, then times the selection loop alone over repeated
runs after a warm-up block. Selection is the phase the complexity claims
cover: the fast modular path costs O(N_V + N_keep log N_V) while naive
greedy pays O(N_V * |selected|) per step, so its cost grows
super-linearly with the budget. Table construction is deliberately
outside the timed region; it is shared by every method and scales the
same way for all of them.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError
from .matrixio import EmbeddingMatrix, NormalizedMatrix, row_normalize
from .scoring import PruneConfig
from .selection import build_tables, cross_scores, greedy_loop, modular_topk_loop

BENCH_METHODS = ("fast_modular", "greedy", "greedy_naive")
CSV_HEADER = "method,n_visual,budget,median_ns,p90_ns"
DEFAULT_REPEATS = 30
DEFAULT_WARMUPS = 10


@dataclass(frozen=True)
class BenchRow:
    method: str
    n_visual: int
    budget: int
    median_ns: int
    p90_ns: int


def synthetic_pair(
    n_visual: int, n_text: int = 8, dim: int = 64, seed: int = 0
) -> tuple[NormalizedMatrix, NormalizedMatrix]:
    """Unit-norm Gaussian embeddings for timing runs."""
    rng = np.random.default_rng(seed)
    V = row_normalize(EmbeddingMatrix(rng.normal(size=(n_visual, dim)), kind="visual"))
    T = row_normalize(EmbeddingMatrix(rng.normal(size=(n_text, dim)), kind="textual"))
    return V, T


def _time_ns(fn: Callable[[], object], repeats: int, warmups: int) -> np.ndarray:
    for _ in range(warmups):
        fn()
    out = np.empty(repeats, dtype=np.int64)
    for r in range(repeats):
        t0 = time.perf_counter_ns()
        fn()
        out[r] = time.perf_counter_ns() - t0
    return out


def run_latency_benchmark(
    sizes: Sequence[int],
    budgets: Sequence[int] = (64,),
    methods: Sequence[str] = ("fast_modular", "greedy_naive"),
    repeats: int = DEFAULT_REPEATS,
    warmups: int = DEFAULT_WARMUPS,
    n_text: int = 8,
    dim: int = 64,
    seed: int = 0,
) -> list[BenchRow]:
    """Median/p90 selection latency per (method, n_visual, budget).

    fast_modular runs at lambda = 1; greedy and greedy_naive run at
    lambda = 0.5 (redundancy-aware), incremental and from-scratch
    respectively.
    """
    for m in methods:
        if m not in BENCH_METHODS:
            raise ConfigError(f"unknown bench method {m!r}; choose from {BENCH_METHODS}")
    if repeats < 1 or warmups < 0:
        raise ConfigError("need repeats >= 1 and warmups >= 0")

    rows = []
    for n_visual in sizes:
        V, T = synthetic_pair(n_visual, n_text=n_text, dim=dim, seed=seed)
        for method in methods:
            lam = 1.0 if method == "fast_modular" else 0.5
            cfg = PruneConfig(budget=max(1, min(min(budgets), n_visual)), lambda_=lam)
            tables = build_tables(V, T, cfg, need_self=lam < 1.0)
            scores = cross_scores(tables, cfg)
            for budget in budgets:
                b = min(budget, n_visual)
                run_cfg = PruneConfig(budget=b, lambda_=lam)
                if method == "fast_modular":
                    fn = lambda: modular_topk_loop(scores.values, b)
                else:
                    incremental = method == "greedy"
                    fn = lambda: greedy_loop(scores, tables, run_cfg, b, incremental=incremental)
                times = _time_ns(fn, repeats, warmups)
                rows.append(
                    BenchRow(
                        method, int(n_visual), int(b),
                        int(np.median(times)), int(np.percentile(times, 90)),
                    )
                )
            del tables, scores  # self tables can be ~N_V^2 floats
    return rows


def bench_to_csv(rows: Sequence[BenchRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER.split(","))
    for row in rows:
        writer.writerow([row.method, row.n_visual, row.budget, row.median_ns, row.p90_ns])
    return buf.getvalue()
