"""Per-token relevance/redundancy scores and their lambda combination.

Two aggregation strategies over a PMI table:

* max — the strongest single association per row (pivot token);
* global — conditional-weighted PMI sum per row, which equals the KL
  divergence from the marginal to that row's conditional.

A combined score lambda * cross - (1 - lambda) * self trades crossmodal
relevance against redundancy with respect to the already-selected set.
All scores are in nats.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .distributions import PROB_FLOOR, ConditionalTable, PmiTable
from .errors import ConfigError, InvalidModeError, ShapeError


@dataclass(frozen=True)
class ScoreVector:
    values: np.ndarray
    kind: str  # "cross", "self", or "combined"
    aggregation: str  # "max" or "global"


@dataclass(frozen=True)
class PruneConfig:
    """Knobs of the selection pipeline.

    budget is the number of visual tokens to keep; lambda_ in [0, 1]
    weights crossmodal relevance (1.0 = relevance only) against internal
    redundancy (0.0 = redundancy only). self_tau overrides tau for the
    visual-visual similarity matrix when set.
    """

    budget: int
    tau: float = 0.1
    lambda_: float = 1.0
    aggregation: str = "max"
    normalization: str = "softmax"
    mask_diagonal: bool = False
    self_tau: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if self.tau <= 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if self.self_tau is not None and self.self_tau <= 0:
            raise ConfigError(f"self_tau must be positive, got {self.self_tau}")
        if not 0.0 <= self.lambda_ <= 1.0:
            raise ConfigError(f"lambda must be in [0, 1], got {self.lambda_}")
        if self.budget < 1:
            raise ConfigError(f"budget must be at least 1, got {self.budget}")
        if self.aggregation not in ("max", "global"):
            raise ConfigError(f"unknown aggregation {self.aggregation!r}")
        if self.normalization not in ("softmax", "minmax"):
            raise ConfigError(f"unknown normalization {self.normalization!r}")

    @property
    def effective_self_tau(self) -> float:
        return self.tau if self.self_tau is None else self.self_tau


def cross_score_max(pmi_cross: PmiTable) -> ScoreVector:
    """Max PMI over the text axis, one score per visual token."""
    if pmi_cross.mode != "cross":
        raise InvalidModeError("cross_score_max needs a cross-mode PMI table")
    if pmi_cross.values.size == 0:
        raise ShapeError("empty PMI table")
    return ScoreVector(np.max(pmi_cross.values, axis=1), kind="cross", aggregation="max")


def self_score_max(pmi_self: PmiTable, selected: Sequence[int]) -> ScoreVector:
    """Max PMI against the selected tokens; all-zero when none are selected.

    The empty-set convention makes the first greedy pick purely crossmodal.
    """
    if pmi_self.mode != "self":
        raise InvalidModeError("self_score_max needs a self-mode PMI table")
    n = pmi_self.values.shape[0]
    sel = np.asarray(list(selected), dtype=np.intp)
    if sel.size == 0:
        return ScoreVector(np.zeros(n), kind="self", aggregation="max")
    if np.any(sel < 0) or np.any(sel >= n):
        raise IndexError(f"selected indices out of range [0, {n})")
    return ScoreVector(
        np.max(pmi_self.values[:, sel], axis=1), kind="self", aggregation="max"
    )


def global_score(
    conditional: ConditionalTable,
    pmi: PmiTable,
    selected: Optional[Sequence[int]] = None,
) -> ScoreVector:
    """Conditional-weighted PMI sum per row.

    Over the full table this is the KL divergence from the marginal to the
    row's conditional, hence non-negative. For self mode inside greedy the
    columns are restricted to `selected` and the weights renormalized over
    that set so they stay a distribution.
    """
    if conditional.values.shape != pmi.values.shape or conditional.mode != pmi.mode:
        raise ShapeError("conditional and PMI tables must share shape and mode")
    n = conditional.values.shape[0]
    if selected is None:
        values = np.sum(conditional.values * pmi.values, axis=1)
        return ScoreVector(values, kind=pmi.mode, aggregation="global")

    sel = np.asarray(list(selected), dtype=np.intp)
    if sel.size == 0:
        return ScoreVector(np.zeros(n), kind=pmi.mode, aggregation="global")
    if np.any(sel < 0) or np.any(sel >= conditional.values.shape[1]):
        raise IndexError("selected indices out of range")
    weights = conditional.values[:, sel]
    mass = np.maximum(np.sum(weights, axis=1, keepdims=True), PROB_FLOOR)
    values = np.sum((weights / mass) * pmi.values[:, sel], axis=1)
    return ScoreVector(values, kind=pmi.mode, aggregation="global")


def combine(cross: ScoreVector, self_: ScoreVector, lambda_: float) -> ScoreVector:
    """lambda * cross - (1 - lambda) * self, elementwise."""
    if not 0.0 <= lambda_ <= 1.0:
        raise ConfigError(f"lambda must be in [0, 1], got {lambda_}")
    if cross.values.shape != self_.values.shape:
        raise ShapeError("score vectors differ in length")
    values = lambda_ * cross.values - (1.0 - lambda_) * self_.values
    return ScoreVector(values, kind="combined", aggregation=cross.aggregation)
