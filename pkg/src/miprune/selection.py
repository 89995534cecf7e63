"""Greedy MI-guided token selection, the modular fast path, and oracles.

All selectors share the same table pipeline: unit-norm embeddings ->
scaled similarities -> conditional tables -> marginals -> PMI -> scores.
The greedy loop picks, at every step, the unselected token maximizing

    lambda * cross_score - (1 - lambda) * self_score(selected)

with ties broken by lowest index. At lambda = 1 the objective is modular
and the exact optimum is the top-k by cross score, retrieved here through
a linear-time heap build plus k pops.

Correctness oracles:

* exhaustive_modular_oracle enumerates every subset (N <= 20) for the
  modular case;
* stepwise_greedy_verifier replays a greedy run step by step with
  from-scratch scoring (N <= 64), so incremental-update bugs cannot hide.
"""

from __future__ import annotations

import heapq
import time
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .distributions import (
    ConditionalTable,
    PmiTable,
    mask_diagonal,
    minmax_conditional,
    pmi,
    similarity,
    softmax_conditional,
    text_marginal,
    visual_marginal,
)
from .errors import ConfigError, ScaleError
from .matrixio import NormalizedMatrix
from .scoring import (
    PruneConfig,
    ScoreVector,
    combine,
    cross_score_max,
    global_score,
    self_score_max,
)

ORACLE_MAX_TOKENS = 20
VERIFIER_MAX_TOKENS = 64


@dataclass(frozen=True)
class SelectionResult:
    """Ordered kept indices plus the per-step scores that produced them."""

    kept: list[int]
    step_scores: list[float]
    method: str
    wall_time_ns: int
    config: PruneConfig
    score_ns: int = 0
    select_ns: int = 0


@dataclass(frozen=True)
class PipelineTables:
    """Intermediate distribution tables shared by the selectors."""

    cross_conditional: ConditionalTable
    cross_pmi: PmiTable
    self_conditional: Optional[ConditionalTable] = None
    self_pmi: Optional[PmiTable] = None


def build_tables(
    V: NormalizedMatrix, T: NormalizedMatrix, cfg: PruneConfig, need_self: bool
) -> PipelineTables:
    """Run the distribution pipeline; self tables only when requested."""
    if T.rows == 1:
        warnings.warn(
            "single text token: the cross conditional is degenerate and all "
            "crossmodal scores are 0; selection is driven by redundancy only",
            stacklevel=2,
        )
    normalize = softmax_conditional if cfg.normalization == "softmax" else minmax_conditional

    sim = similarity(V, T, cfg.tau, "cross")
    cond_cross = normalize(sim)
    del sim
    pmi_cross = pmi(cond_cross, text_marginal(cond_cross))

    cond_self = pmi_self = None
    if need_self:
        sim = similarity(V, V, cfg.effective_self_tau, "self")
        if cfg.mask_diagonal:
            sim = mask_diagonal(sim)
        cond_self = normalize(sim)
        del sim  # the N_V x N_V logits are dead weight past this point
        pmi_self = pmi(cond_self, visual_marginal(V.rows))
    return PipelineTables(cond_cross, pmi_cross, cond_self, pmi_self)


def cross_scores(tables: PipelineTables, cfg: PruneConfig) -> ScoreVector:
    if cfg.aggregation == "max":
        return cross_score_max(tables.cross_pmi)
    return global_score(tables.cross_conditional, tables.cross_pmi)


def _self_scores(
    tables: PipelineTables, cfg: PruneConfig, selected: Sequence[int]
) -> ScoreVector:
    if cfg.aggregation == "max":
        return self_score_max(tables.self_pmi, selected)
    return global_score(tables.self_conditional, tables.self_pmi, selected=selected)


def _clamp_budget(budget: int, n_v: int, warn_at_equal: bool = False) -> int:
    if budget >= n_v:
        if budget > n_v or warn_at_equal:
            warnings.warn(
                f"budget {budget} covers all {n_v} tokens: identity selection",
                stacklevel=3,
            )
        return n_v
    return budget


def modular_topk_loop(scores: np.ndarray, budget: int) -> tuple[list[int], list[float]]:
    """Heap-based top-k with a linear-time candidate prescan.

    np.partition (introselect, O(N)) finds the budget-th largest value;
    only candidates at or above it can be picked, so the max-heap is built
    over that band instead of all N tokens (the band exceeds the budget
    only when the cutoff value is tied). (-score, index) tuples pop by
    descending score then ascending index -- the same tie-break as the
    greedy argmax, and the same output the full-size heap would give.
    """
    n = scores.shape[0]
    if budget < n:
        cutoff = np.partition(scores, n - budget)[n - budget]
        band = np.flatnonzero(scores >= cutoff)
    else:
        band = np.arange(n)
    heap = list(zip((-scores[band]).tolist(), band.tolist()))
    heapq.heapify(heap)
    kept: list[int] = []
    step_scores: list[float] = []
    for _ in range(budget):
        neg, i = heapq.heappop(heap)
        kept.append(i)
        step_scores.append(-neg)
    return kept, step_scores


def greedy_loop(
    cross: ScoreVector,
    tables: PipelineTables,
    cfg: PruneConfig,
    budget: int,
    incremental: bool = True,
) -> tuple[list[int], list[float]]:
    """The pick loop of Algorithm-style greedy selection.

    incremental=True maintains each candidate's max-aggregated self score
    as max(previous, PMI[:, last_pick]) -- O(N_V) per step and exactly
    equal to the from-scratch max. incremental=False recomputes the self
    scores over the whole selected set at every step (the O(N_V * k)
    reference). Global aggregation always recomputes, because its
    restricted renormalized weights change with every pick.
    """
    need_self = cfg.lambda_ < 1.0
    n = cross.values.shape[0]
    lam = cfg.lambda_
    taken = np.zeros(n, dtype=bool)
    # empty-set convention: the self term is 0 until something is selected
    zero_self = ScoreVector(np.zeros(n), kind="self", aggregation=cfg.aggregation)
    running_max: Optional[np.ndarray] = None
    kept: list[int] = []
    step_scores: list[float] = []
    for _ in range(budget):
        if not (need_self and kept):
            best_self = zero_self
        elif cfg.aggregation == "global" or not incremental:
            best_self = _self_scores(tables, cfg, kept)
        else:
            best_self = ScoreVector(running_max, kind="self", aggregation="max")
        combined = combine(cross, best_self, lam).values
        combined[taken] = -np.inf
        pick = int(np.argmax(combined))
        kept.append(pick)
        step_scores.append(float(combined[pick]))
        taken[pick] = True
        if need_self and incremental and cfg.aggregation == "max":
            col = tables.self_pmi.values[:, pick]
            running_max = col.copy() if running_max is None else np.maximum(running_max, col)
    return kept, step_scores


def greedy_select(
    V: NormalizedMatrix, T: NormalizedMatrix, cfg: PruneConfig
) -> SelectionResult:
    """Greedy selection with incremental self-score maintenance.

    Cross scores are computed once up front; the per-step work is O(N_V).
    """
    t0 = time.perf_counter_ns()
    budget = _clamp_budget(cfg.budget, V.rows, warn_at_equal=True)
    tables = build_tables(V, T, cfg, need_self=cfg.lambda_ < 1.0)
    cross = cross_scores(tables, cfg)
    t1 = time.perf_counter_ns()
    kept, step_scores = greedy_loop(cross, tables, cfg, budget, incremental=True)
    t2 = time.perf_counter_ns()
    return SelectionResult(
        kept, step_scores, "greedy", t2 - t0, cfg, score_ns=t1 - t0, select_ns=t2 - t1
    )


def greedy_select_naive(
    V: NormalizedMatrix, T: NormalizedMatrix, cfg: PruneConfig
) -> SelectionResult:
    """Plain restatement of greedy selection: every step rescans the whole
    selected set for every candidate. Reference implementation and the
    slow leg of the latency benchmark."""
    t0 = time.perf_counter_ns()
    budget = _clamp_budget(cfg.budget, V.rows, warn_at_equal=True)
    tables = build_tables(V, T, cfg, need_self=True)
    cross = cross_scores(tables, cfg)
    t1 = time.perf_counter_ns()
    kept, step_scores = greedy_loop(cross, tables, cfg, budget, incremental=False)
    t2 = time.perf_counter_ns()
    return SelectionResult(
        kept, step_scores, "greedy_naive", t2 - t0, cfg,
        score_ns=t1 - t0, select_ns=t2 - t1,
    )


def fast_select_modular(
    V: NormalizedMatrix, T: NormalizedMatrix, cfg: PruneConfig
) -> SelectionResult:
    """Top-k by cross score through a max-heap; only valid at lambda = 1,
    where the set objective is modular and top-k is exact.

    Matches greedy_select's output index for index, including the
    lowest-index tie-break.
    """
    if cfg.lambda_ != 1.0:
        raise ConfigError(
            f"fast path requires lambda = 1 (got {cfg.lambda_}); "
            "use greedy_select for redundancy-aware selection"
        )
    t0 = time.perf_counter_ns()
    budget = _clamp_budget(cfg.budget, V.rows, warn_at_equal=True)
    tables = build_tables(V, T, cfg, need_self=False)
    scores = cross_scores(tables, cfg).values
    t1 = time.perf_counter_ns()
    kept, step_scores = modular_topk_loop(scores, budget)
    t2 = time.perf_counter_ns()
    return SelectionResult(
        kept, step_scores, "fast_modular", t2 - t0, cfg,
        score_ns=t1 - t0, select_ns=t2 - t1,
    )


_oracle_cache: dict[bytes, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _oracle_enumeration(vals: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Subset sums for every bitmask plus masks grouped by popcount.

    Memoized on the score bytes so sweeping all budgets of one instance
    enumerates the 2^N subsets once instead of once per budget.
    """
    key = vals.tobytes()
    hit = _oracle_cache.get(key)
    if hit is not None:
        return hit
    n = vals.size
    sums = np.zeros(1)
    for i in range(n):
        sums = np.concatenate([sums, sums + vals[i]])
    pop = np.bitwise_count(np.arange(1 << n, dtype=np.uint32))
    order = np.argsort(pop, kind="stable")  # masks sorted by subset size
    bounds = np.searchsorted(pop[order], np.arange(n + 2))
    if len(_oracle_cache) >= 2:
        _oracle_cache.pop(next(iter(_oracle_cache)))
    _oracle_cache[key] = (sums, order, bounds)
    return sums, order, bounds


def exhaustive_modular_oracle(
    scores: Union[ScoreVector, np.ndarray], budget: int
) -> set[int]:
    """Best budget-sized subset by total score, by enumerating all subsets.

    Every subset's sum is evaluated (via shared-prefix doubling over the
    2^N bitmasks); ties resolve to the lexicographically smallest index
    tuple. Refuses N > 20.
    """
    vals = np.asarray(scores.values if isinstance(scores, ScoreVector) else scores,
                      dtype=np.float64)
    n = int(vals.size)
    if n > ORACLE_MAX_TOKENS:
        raise ScaleError(f"exhaustive oracle caps at {ORACLE_MAX_TOKENS} tokens, got {n}")
    if not 1 <= budget <= n:
        raise ConfigError(f"budget {budget} not in [1, {n}]")

    sums, order, bounds = _oracle_enumeration(vals)
    candidates = order[bounds[budget]:bounds[budget + 1]]
    segment = sums[candidates]
    winners = candidates[segment == np.max(segment)]
    best_tuple = min(
        tuple(i for i in range(n) if (int(m) >> i) & 1) for m in winners
    )
    return set(best_tuple)


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    violation_step: Optional[int]
    detail: str


def stepwise_greedy_verifier(
    V: NormalizedMatrix,
    T: NormalizedMatrix,
    cfg: PruneConfig,
    result: SelectionResult,
) -> VerificationReport:
    """Replay a selection step by step with from-scratch scoring.

    At each step k the full combined score vector over unselected
    candidates is rebuilt with no incremental state, and result.kept[k]
    must be the lowest-index maximizer. Exact comparison: the from-scratch
    and incremental paths use identical floating-point expressions.
    """
    if V.rows > VERIFIER_MAX_TOKENS:
        raise ScaleError(f"verifier caps at {VERIFIER_MAX_TOKENS} tokens, got {V.rows}")
    kept = list(result.kept)
    expected_len = min(cfg.budget, V.rows)
    if len(kept) != expected_len or len(set(kept)) != len(kept):
        return VerificationReport(
            False, None, f"kept list malformed: {len(kept)} entries, expected {expected_len}"
        )
    if kept and (min(kept) < 0 or max(kept) >= V.rows):
        return VerificationReport(False, None, "kept indices out of range")

    tables = build_tables(V, T, cfg, need_self=cfg.lambda_ < 1.0)
    cross = cross_scores(tables, cfg)
    taken = np.zeros(V.rows, dtype=bool)
    for k, picked in enumerate(kept):
        if cfg.lambda_ < 1.0:
            self_sv = _self_scores(tables, cfg, kept[:k])
        else:
            self_sv = ScoreVector(np.zeros(V.rows), kind="self", aggregation=cfg.aggregation)
        combined = combine(cross, self_sv, cfg.lambda_).values
        combined[taken] = -np.inf
        argmax = int(np.argmax(combined))
        if picked != argmax:
            return VerificationReport(
                False,
                k,
                f"step {k}: kept {picked} (score {combined[picked]!r}) but the "
                f"tie-break argmax is {argmax} (score {combined[argmax]!r})",
            )
        taken[picked] = True
    return VerificationReport(True, None, f"all {len(kept)} steps optimal")
