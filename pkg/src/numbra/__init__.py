"""Digit-level number embeddings: positional aggregation, neighbourhood
alignment, aggregation-aware losses, and a desk-scale training harness.

Numbers are lexed into single-digit tokens, summarized into one vector by a
positional weighting that preserves numeric proximity, evaluated by how well
embedding neighbourhoods match natural integer neighbourhoods, and trained
against with a log-distance auxiliary loss interpolated into cross-entropy.
"""

from ._kernels import backend as kernel_backend
from .aggregation import (
    MAX_DIGITS,
    AggregatedEmbedding,
    Aggregator,
    WeightVector,
    aggregate,
    aggregate_soft,
    exact_weights,
    triangular_fractions,
    weights,
    weights_array,
)
from .embeddings import (
    DIGITS,
    SYNTH_TOKENS,
    EmbeddingTable,
    load_table,
    save_table,
    synth_table,
)
from .errors import (
    DivergenceError,
    DomainError,
    FormatError,
    MalformedSequenceError,
    MissingTokenError,
    NumbraError,
)
from .lexer import (
    LexedText,
    Literal,
    NumberSpan,
    Token,
    TokenKind,
    TokenScheme,
    detect_numbers,
    emit_tokens,
    is_number_string,
    round_trip,
    tokenize,
)
from .loss import (
    AUX_CEIL,
    AUX_FLOOR,
    AUX_PENALTY,
    DEFAULT_LAMBDA,
    LAMBDA_GRID,
    LossBreakdown,
    PredictionPair,
    aux_loss,
    combined_loss,
    cross_entropy,
    soft_aux_loss,
)
from .metrics import MetricRecord, batch_scores, cer, levenshtein, normalize_answer
from .neighborhood import (
    BucketSummary,
    NeighborhoodReport,
    bucket_sweep,
    bucket_universe,
    embedded_knn,
    f1_alignment,
    natural_knn,
    prefix_sibling_count,
    report_for,
)
from .toy import (
    AblationRow,
    AggPosition,
    Operation,
    ToyInstance,
    ToyModel,
    ToyTask,
    TraceRow,
    TrainConfig,
    TrainingTrace,
    ablation_report,
    decode_answer,
    encode_answer,
    generate_task,
    make_instance,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "AUX_CEIL",
    "AUX_FLOOR",
    "AUX_PENALTY",
    "AblationRow",
    "AggPosition",
    "AggregatedEmbedding",
    "Aggregator",
    "BucketSummary",
    "DEFAULT_LAMBDA",
    "DIGITS",
    "DivergenceError",
    "DomainError",
    "EmbeddingTable",
    "FormatError",
    "LAMBDA_GRID",
    "LexedText",
    "Literal",
    "LossBreakdown",
    "MAX_DIGITS",
    "MalformedSequenceError",
    "MetricRecord",
    "MissingTokenError",
    "NeighborhoodReport",
    "NumberSpan",
    "NumbraError",
    "Operation",
    "PredictionPair",
    "SYNTH_TOKENS",
    "Token",
    "TokenKind",
    "TokenScheme",
    "ToyInstance",
    "ToyModel",
    "ToyTask",
    "TraceRow",
    "TrainConfig",
    "TrainingTrace",
    "WeightVector",
    "aggregate",
    "aggregate_soft",
    "ablation_report",
    "aux_loss",
    "batch_scores",
    "bucket_sweep",
    "bucket_universe",
    "cer",
    "combined_loss",
    "cross_entropy",
    "decode_answer",
    "detect_numbers",
    "emit_tokens",
    "embedded_knn",
    "encode_answer",
    "exact_weights",
    "f1_alignment",
    "generate_task",
    "is_number_string",
    "kernel_backend",
    "levenshtein",
    "load_table",
    "make_instance",
    "natural_knn",
    "normalize_answer",
    "prefix_sibling_count",
    "report_for",
    "round_trip",
    "save_table",
    "soft_aux_loss",
    "synth_table",
    "tokenize",
    "train",
    "triangular_fractions",
    "weights",
    "weights_array",
]
