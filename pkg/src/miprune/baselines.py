"""Reference pruning policies: random, similarity, attention, recycling,
and the two-round attention + MI combination.

The attention-based policies consume an externally supplied averaged
attention matrix instead of hooking a live encoder, which keeps the
package model-free while scoring exactly the same way.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError
from .matrixio import EmbeddingMatrix, NormalizedMatrix
from .scoring import PruneConfig
from .selection import SelectionResult, _clamp_budget, greedy_select


@dataclass(frozen=True)
class AttentionInput:
    """Square non-negative attention matrix, optionally with a [CLS]-style
    row index whose attention over the other tokens can be used directly."""

    matrix: EmbeddingMatrix
    cls_index: Optional[int] = None

    def __post_init__(self):
        if self.matrix.kind != "attention":
            raise ConfigError("AttentionInput requires a matrix with kind='attention'")
        n = self.matrix.rows
        if self.cls_index is not None and not 0 <= self.cls_index < n:
            raise ConfigError(f"cls_index {self.cls_index} out of range [0, {n})")
        row_sums = self.matrix.data.sum(axis=1)
        if np.any(np.abs(row_sums - 1.0) > 1e-4):
            # upstream head/layer averaging often breaks exact normalization
            warnings.warn(
                "attention rows do not sum to 1 within 1e-4; proceeding anyway",
                stacklevel=2,
            )


def _top_k(scores: np.ndarray, k: int) -> tuple[list[int], list[float]]:
    """Indices of the k largest scores, descending, lowest index on ties."""
    order = np.argsort(-scores, kind="stable")[:k]
    return [int(i) for i in order], [float(scores[i]) for i in order]


def random_select(n_v: int, budget: int, seed: int) -> SelectionResult:
    """Uniform sample without replacement, deterministic given the seed."""
    t0 = time.perf_counter_ns()
    budget = _clamp_budget(budget, n_v)
    rng = np.random.default_rng(seed)
    kept = [int(i) for i in rng.choice(n_v, size=budget, replace=False)]
    t1 = time.perf_counter_ns()
    return SelectionResult(
        kept, [0.0] * budget, "random", t1 - t0,
        PruneConfig(budget=budget, seed=seed),
    )


def similarity_select(
    V: NormalizedMatrix, T: NormalizedMatrix, tau: float, budget: int
) -> SelectionResult:
    """Top tokens by max cosine similarity to any text token.

    tau cancels under the argmax and is ignored; kept for signature parity
    with the scaled-similarity pipeline.
    """
    del tau
    t0 = time.perf_counter_ns()
    budget = _clamp_budget(budget, V.rows)
    scores = np.max(V.data @ T.data.T, axis=1)
    kept, step_scores = _top_k(scores, budget)
    t1 = time.perf_counter_ns()
    return SelectionResult(
        kept, step_scores, "similarity", t1 - t0, PruneConfig(budget=budget)
    )


def attention_select(
    attn: AttentionInput, budget: int, mode: str = "column_sum"
) -> SelectionResult:
    """Score tokens by received attention.

    cls_row: score_i = A[cls, i] for i != cls (the [CLS] token itself ranks
    last). column_sum: score_i = sum over j != i of A[j, i]; the diagonal
    never contributes.
    """
    A = attn.matrix.data
    n = attn.matrix.rows
    t0 = time.perf_counter_ns()
    budget = _clamp_budget(budget, n)
    if mode == "cls_row":
        if attn.cls_index is None:
            raise ConfigError("cls_row mode requires an AttentionInput with cls_index")
        scores = A[attn.cls_index].copy()
        scores[attn.cls_index] = -np.inf
    elif mode == "column_sum":
        scores = A.sum(axis=0) - np.diag(A)
    else:
        raise ConfigError(f"unknown attention mode {mode!r}")
    kept, step_scores = _top_k(scores, budget)
    t1 = time.perf_counter_ns()
    return SelectionResult(
        kept, step_scores, f"attention_{mode}", t1 - t0, PruneConfig(budget=budget)
    )


def similarity_recycle(
    V: NormalizedMatrix, remaining: Sequence[int], recycle_budget: int
) -> list[int]:
    """Pick the recycle_budget tokens of `remaining` with the largest total
    similarity to the rest of `remaining` (self-similarity excluded)."""
    rem = sorted(set(int(i) for i in remaining))
    if not rem:
        raise ConfigError("remaining set is empty")
    if not 1 <= recycle_budget <= len(rem):
        raise ConfigError(
            f"recycle_budget {recycle_budget} not in [1, {len(rem)}]"
        )
    if rem[0] < 0 or rem[-1] >= V.rows:
        raise IndexError("remaining indices out of range")
    sub = V.data[rem]
    gram = sub @ sub.T
    scores = gram.sum(axis=1) - np.diag(gram)
    picked, _ = _top_k(scores, recycle_budget)
    return [rem[i] for i in picked]


def mi_attention_select(
    V: NormalizedMatrix,
    T: NormalizedMatrix,
    attn: AttentionInput,
    cfg: PruneConfig,
    round1_fraction: float = 0.5,
    attention_mode: Optional[str] = None,
) -> SelectionResult:
    """Two-round combination: attention prefilters a candidate pool of
    budget / round1_fraction tokens, then MI-guided greedy picks the final
    budget inside that pool.

    attention_mode defaults to cls_row when the input carries a cls_index,
    column_sum otherwise.
    """
    if not 0.0 < round1_fraction <= 1.0:
        raise ConfigError(f"round1_fraction must be in (0, 1], got {round1_fraction}")
    t0 = time.perf_counter_ns()
    n_v = V.rows
    budget = min(cfg.budget, n_v)
    pool_size = min(n_v, math.ceil(budget / round1_fraction))
    if pool_size < budget:
        raise ConfigError(f"round-1 pool ({pool_size}) is smaller than the budget ({budget})")
    if attention_mode is None:
        attention_mode = "cls_row" if attn.cls_index is not None else "column_sum"

    round1 = attention_select(attn, pool_size, mode=attention_mode)
    pool = sorted(round1.kept)  # ascending, so pool-local tie-break = global one

    sub_v = NormalizedMatrix(V.data[pool], kind=V.kind)
    sub_cfg = PruneConfig(
        budget=budget, tau=cfg.tau, lambda_=cfg.lambda_,
        aggregation=cfg.aggregation, normalization=cfg.normalization,
        mask_diagonal=cfg.mask_diagonal, self_tau=cfg.self_tau, seed=cfg.seed,
    )
    inner = greedy_select(sub_v, T, sub_cfg)
    kept = [pool[i] for i in inner.kept]
    t1 = time.perf_counter_ns()
    return SelectionResult(kept, inner.step_scores, "mi_attention", t1 - t0, cfg)
