"""Temperature-scaled similarities, conditional tables, marginals, PMI.

The pipeline: cosine similarities between unit-norm rows are divided by a
temperature tau and treated as logits. A row-wise normalization (softmax,
or the MinMax variant) turns them into conditional distributions; the
marginal over the second axis comes from averaging conditionals under a
uniform prior over visual tokens; the PMI table is the entrywise
log-ratio conditional/marginal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    DegenerateRowError,
    InvalidModeError,
    ShapeError,
)
from .matrixio import NormalizedMatrix

# Floors the numerator and denominator of the PMI log-ratio. MinMax rows
# contain exact zeros (the row minimum) and log(0) must not propagate.
PROB_FLOOR = 1e-12

Mode = str  # "cross" (visual x textual) or "self" (visual x visual)


@dataclass(frozen=True)
class SimilarityMatrix:
    """Scaled cosine similarities; entries are logits in [-1/tau, 1/tau].

    Diagonal entries may be -inf after mask_diagonal; `masked` records that.
    """

    values: np.ndarray
    mode: Mode
    tau: float
    masked: bool = False

    def __post_init__(self):
        if self.mode not in ("cross", "self"):
            raise InvalidModeError(f"unknown mode {self.mode!r}")
        if self.mode == "self" and self.values.shape[0] != self.values.shape[1]:
            raise ShapeError("self-similarity matrix must be square")


@dataclass(frozen=True)
class ConditionalTable:
    """Row-stochastic table p(x_j | v_i); rows sum to 1."""

    values: np.ndarray
    mode: Mode
    normalization: str  # "softmax" or "minmax"


@dataclass(frozen=True)
class MarginalVector:
    """Distribution over the second axis; sums to 1."""

    values: np.ndarray
    mode: Mode


@dataclass(frozen=True)
class PmiTable:
    """Entrywise log(conditional / marginal), in nats."""

    values: np.ndarray
    mode: Mode


def similarity(
    a: NormalizedMatrix, b: NormalizedMatrix, tau: float, mode: Mode
) -> SimilarityMatrix:
    """Scaled inner products (a_i . b_j) / tau between unit-norm rows."""
    if tau <= 0:
        raise ConfigError(f"temperature must be positive, got {tau}")
    if a.cols != b.cols:
        raise ShapeError(f"embedding dims differ: {a.cols} vs {b.cols}")
    if mode == "self" and not (a is b or np.array_equal(a.data, b.data)):
        raise InvalidModeError("self mode requires both operands to be the same matrix")
    values = (a.data @ b.data.T) / tau
    return SimilarityMatrix(values, mode=mode, tau=tau)


def mask_diagonal(s: SimilarityMatrix) -> SimilarityMatrix:
    """Replace the diagonal with -inf so each token gets zero self-probability.

    Optional variant; the default pipeline keeps the diagonal.
    """
    if s.mode != "self":
        raise InvalidModeError("mask_diagonal only applies to self-similarity matrices")
    n = s.values.shape[0]
    if n == 1:
        raise DegenerateRowError("cannot mask the diagonal of a 1x1 matrix: "
                                 "the row would have no finite entry")
    values = s.values.copy()
    np.fill_diagonal(values, -np.inf)
    return SimilarityMatrix(values, mode=s.mode, tau=s.tau, masked=True)


def softmax_conditional(s: SimilarityMatrix) -> ConditionalTable:
    """Row softmax with the max-shift trick; -inf logits get probability 0."""
    logits = s.values
    m = np.max(logits, axis=1)
    if np.any(np.isneginf(m)):
        i = int(np.argmax(np.isneginf(m)))
        raise DegenerateRowError(f"row {i} has no finite logits")
    # one working copy, transformed in place: matters at N_V ~ 16k
    z = logits - m[:, None]
    np.exp(z, out=z)
    z /= np.sum(z, axis=1, keepdims=True)
    return ConditionalTable(z, mode=s.mode, normalization="softmax")


def minmax_conditional(s: SimilarityMatrix) -> ConditionalTable:
    """Two-stage linear normalization: map each row to [0, 1], then to a
    distribution by dividing by the row sum. Constant rows map to uniform.

    -inf (masked) entries receive probability 0; the min/max is taken over
    finite entries only.
    """
    logits = s.values
    finite = np.isfinite(logits)
    if not np.all(np.any(finite, axis=1)):
        i = int(np.argmax(~np.any(finite, axis=1)))
        raise DegenerateRowError(f"row {i} has no finite logits")

    lo = np.min(np.where(finite, logits, np.inf), axis=1, keepdims=True)
    hi = np.max(np.where(finite, logits, -np.inf), axis=1, keepdims=True)
    span = hi - lo
    flat = (span == 0)[:, 0]

    scaled = np.zeros_like(logits)
    np.divide(logits - lo, span, out=scaled, where=(span > 0) & finite)
    scaled[flat] = 1.0  # constant row: every finite entry equal weight
    scaled[~finite] = 0.0

    values = scaled / np.sum(scaled, axis=1, keepdims=True)
    return ConditionalTable(values, mode=s.mode, normalization="minmax")


def text_marginal(c: ConditionalTable) -> MarginalVector:
    """Marginal of the second axis under the uniform visual prior: the
    column mean of the conditional table."""
    if c.mode != "cross":
        raise InvalidModeError(
            "text_marginal applies to cross tables; use visual_marginal for self mode"
        )
    return MarginalVector(np.mean(c.values, axis=0), mode="cross")


def visual_marginal(n_v: int) -> MarginalVector:
    """Uniform prior over visual tokens: the constant 1/n_v vector."""
    if n_v < 1:
        raise ConfigError(f"need at least one visual token, got {n_v}")
    return MarginalVector(np.full(n_v, 1.0 / n_v), mode="self")


def pmi(c: ConditionalTable, m: MarginalVector) -> PmiTable:
    """Pointwise mutual information log(p(x_j|v_i) / p(x_j)), in nats.

    Numerator and denominator are floored at PROB_FLOOR before the log;
    only the MinMax path produces exact zeros that need the floor.
    """
    if c.mode != m.mode:
        raise ShapeError(f"mode mismatch: conditional is {c.mode}, marginal is {m.mode}")
    if c.values.shape[1] != m.values.shape[0]:
        raise ShapeError(
            f"conditional has {c.values.shape[1]} columns, marginal has "
            f"{m.values.shape[0]} entries"
        )
    values = np.maximum(c.values, PROB_FLOOR)
    np.log(values, out=values)
    values -= np.log(np.maximum(m.values, PROB_FLOOR))
    return PmiTable(values, mode=c.mode)
