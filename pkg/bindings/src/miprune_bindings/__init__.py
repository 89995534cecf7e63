"""In-process bridge to the miprune selection core.

Two functions over plain in-memory 2-D arrays, so inference stacks can
call the selector without file round-trips:

    kept, step_scores = select(visual, text, budget=64, lambda_=0.5)
    scores = score(visual, text, lambda_=0.5, budget=64)

Outputs match the `miprune select` / `miprune score` CLI on the same data
serialized to files (indices bitwise, scores to 1e-9). Arrays that are
already contiguous float32/float64 are ingested without copying beyond
the float64 widening; anything else is copied and widened. Validation
failures surface as ValueError/TypeError carrying the core's diagnostic.
"""

from __future__ import annotations

import numpy as np

from miprune import (
    EmbeddingMatrix,
    MipruneError,
    PruneConfig,
    fast_select_modular,
    greedy_select,
    row_normalize,
)
from miprune.scoring import self_score_max
from miprune.selection import build_tables, cross_scores

__version__ = "0.1.0"
__all__ = ["select", "score"]

_CONFIG_KEYS = frozenset(
    ("budget", "tau", "lambda_", "aggregation", "normalization",
     "mask_diagonal", "self_tau", "seed")
)


def _as_normalized(arr, kind: str):
    a = np.asarray(arr)
    if a.ndim != 2:
        raise ValueError(f"{kind} array must be 2-D, got {a.ndim}-D")
    if a.dtype.kind != "f":
        raise TypeError(f"{kind} array must be float32/float64, got {a.dtype}")
    try:
        return row_normalize(EmbeddingMatrix(a, kind=kind))
    except MipruneError as exc:
        raise ValueError(str(exc)) from exc


def _config(n_visual: int, config: dict) -> PruneConfig:
    unknown = set(config) - _CONFIG_KEYS
    if unknown:
        raise TypeError(f"unknown config keys: {sorted(unknown)}")
    config.setdefault("budget", n_visual)
    try:
        return PruneConfig(**config)
    except MipruneError as exc:
        raise ValueError(str(exc)) from exc


def select(visual, text, **config) -> tuple[list[int], list[float]]:
    """Pick the highest-scoring visual tokens; returns (kept, step_scores).

    Keyword config mirrors the CLI flags: budget, tau, lambda_,
    aggregation, normalization, mask_diagonal, self_tau, seed. Like the
    CLI, lambda_ = 1 routes to the modular fast path, anything lower to
    redundancy-aware greedy selection.
    """
    V = _as_normalized(visual, "visual")
    T = _as_normalized(text, "textual")
    if V.cols != T.cols:
        raise ValueError(f"embedding dims differ: visual {V.cols}, text {T.cols}")
    cfg = _config(V.rows, config)
    try:
        run = fast_select_modular if cfg.lambda_ == 1.0 else greedy_select
        result = run(V, T, cfg)
    except MipruneError as exc:
        raise ValueError(str(exc)) from exc
    return result.kept, result.step_scores


def score(visual, text, **config) -> dict:
    """Per-token score arrays, mirroring `miprune score`.

    Always contains "cross_scores"; when lambda_ < 1 it also carries
    "kept_indices" and "self_max_scores" (self PMI row maxima against the
    final kept set).
    """
    V = _as_normalized(visual, "visual")
    T = _as_normalized(text, "textual")
    if V.cols != T.cols:
        raise ValueError(f"embedding dims differ: visual {V.cols}, text {T.cols}")
    cfg = _config(V.rows, config)
    try:
        tables = build_tables(V, T, cfg, need_self=cfg.lambda_ < 1.0)
        out = {"cross_scores": cross_scores(tables, cfg).values}
        if cfg.lambda_ < 1.0:
            result = greedy_select(V, T, cfg)
            out["kept_indices"] = result.kept
            out["self_max_scores"] = self_score_max(tables.self_pmi, result.kept).values
    except MipruneError as exc:
        raise ValueError(str(exc)) from exc
    return out
