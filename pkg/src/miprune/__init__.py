"""miprune: mutual-information guided visual token selection.

Select which visual tokens to keep, given visual and textual embedding
matrices in a shared projection space, by maximizing pointwise mutual
information between modalities while penalizing intra-visual redundancy.
Ships with baselines, an exact discrete information-theory oracle, a
synthetic planted-recall benchmark, and a selection latency
microbenchmark.
"""

__version__ = "0.1.0"

from ._threads import apply_thread_cap as _apply_thread_cap

_apply_thread_cap()  # must precede every numpy import below

from .baselines import (
    AttentionInput,
    attention_select,
    mi_attention_select,
    random_select,
    similarity_recycle,
    similarity_select,
)
from .distributions import (
    ConditionalTable,
    MarginalVector,
    PmiTable,
    SimilarityMatrix,
    mask_diagonal,
    minmax_conditional,
    pmi,
    similarity,
    softmax_conditional,
    text_marginal,
    visual_marginal,
)
from .errors import (
    ConfigError,
    DataError,
    DegenerateEmbeddingError,
    DegenerateRowError,
    FormatError,
    InvalidModeError,
    MipruneError,
    ScaleError,
    ShapeError,
    UnsupportedLayoutError,
)
from .matrixio import (
    EmbeddingMatrix,
    NormalizedMatrix,
    load_array,
    row_normalize,
    save_array,
)
from .scoring import (
    PruneConfig,
    ScoreVector,
    combine,
    cross_score_max,
    global_score,
    self_score_max,
)
from .selection import (
    SelectionResult,
    VerificationReport,
    exhaustive_modular_oracle,
    fast_select_modular,
    greedy_select,
    greedy_select_naive,
    stepwise_greedy_verifier,
)
from .synth import Scene, SceneSpec, generate_scene, recall_at_budget, run_comparison

__all__ = [
    "__version__",
    "AttentionInput",
    "ConditionalTable",
    "ConfigError",
    "DataError",
    "DegenerateEmbeddingError",
    "DegenerateRowError",
    "EmbeddingMatrix",
    "FormatError",
    "InvalidModeError",
    "MarginalVector",
    "MipruneError",
    "NormalizedMatrix",
    "PmiTable",
    "PruneConfig",
    "ScaleError",
    "Scene",
    "SceneSpec",
    "ScoreVector",
    "SelectionResult",
    "ShapeError",
    "SimilarityMatrix",
    "UnsupportedLayoutError",
    "VerificationReport",
    "attention_select",
    "combine",
    "cross_score_max",
    "exhaustive_modular_oracle",
    "fast_select_modular",
    "generate_scene",
    "global_score",
    "greedy_select",
    "greedy_select_naive",
    "load_array",
    "mask_diagonal",
    "mi_attention_select",
    "minmax_conditional",
    "pmi",
    "random_select",
    "recall_at_budget",
    "row_normalize",
    "run_comparison",
    "save_array",
    "self_score_max",
    "similarity",
    "similarity_recycle",
    "similarity_select",
    "softmax_conditional",
    "stepwise_greedy_verifier",
    "text_marginal",
    "visual_marginal",
]
