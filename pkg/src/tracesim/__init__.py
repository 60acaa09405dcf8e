"""Crash-report deduplication toolkit built around the TraceSim similarity."""

from .baselines import (
    RebucketParams,
    cosine_sim,
    lerch_sim,
    moroo_sim,
    plain_levenshtein_sim,
    prefix_match,
    rebucket_sim,
)
from .core import (
    DEFAULT_OPTIONS,
    Hyperparams,
    TraceSimOptions,
    TraceSimScorer,
    WeightedTrace,
    frame_weights,
    global_weight,
    is_soe,
    local_weight,
    normalized_similarity,
    remove_recursion,
    soe_similarity,
    tracesim,
    weighted_levenshtein,
)
from .errors import (
    CorruptIndex,
    DegenerateLabels,
    DegenerateSizes,
    EmptyCorpus,
    InsufficientData,
    InsufficientPairs,
    InvalidConfig,
    InvalidRank,
    InvalidSpace,
    IoFailure,
    MalformedReport,
    TraceSimError,
)
from .evaluation import (
    BucketStats,
    EvalReport,
    LabeledPair,
    error_reduction,
    evaluate_methods,
    issue_size_buckets,
    load_pairs,
    make_scorer,
    roc_auc,
    roc_points,
    run_ablation,
    save_pairs,
    score_pairs,
    split_pairs,
)
from .index import CorpusIndex, build_index, load_index, save_index
from .model import (
    CrashReport,
    Frame,
    StackTrace,
    frame_token,
    load_corpus,
    parse_corpus_text,
    parse_report,
    save_corpus,
    to_java_text,
    trace_tokens,
)
from .synth import GeneratorConfig, derive_pairs, generate_corpus, load_truth, save_truth
from .tuning import ParamSpec, SearchSpace, Trial, TuneResult, tune

__version__ = "0.1.0"

__all__ = [
    "BucketStats",
    "CorpusIndex",
    "CorruptIndex",
    "CrashReport",
    "DEFAULT_OPTIONS",
    "DegenerateLabels",
    "DegenerateSizes",
    "EmptyCorpus",
    "EvalReport",
    "Frame",
    "GeneratorConfig",
    "Hyperparams",
    "InsufficientData",
    "InsufficientPairs",
    "InvalidConfig",
    "InvalidRank",
    "InvalidSpace",
    "IoFailure",
    "LabeledPair",
    "MalformedReport",
    "ParamSpec",
    "RebucketParams",
    "SearchSpace",
    "StackTrace",
    "TraceSimError",
    "TraceSimOptions",
    "TraceSimScorer",
    "Trial",
    "TuneResult",
    "WeightedTrace",
    "build_index",
    "cosine_sim",
    "derive_pairs",
    "error_reduction",
    "evaluate_methods",
    "frame_token",
    "frame_weights",
    "generate_corpus",
    "global_weight",
    "is_soe",
    "issue_size_buckets",
    "lerch_sim",
    "load_corpus",
    "load_index",
    "load_pairs",
    "load_truth",
    "local_weight",
    "make_scorer",
    "moroo_sim",
    "normalized_similarity",
    "parse_corpus_text",
    "parse_report",
    "plain_levenshtein_sim",
    "prefix_match",
    "rebucket_sim",
    "remove_recursion",
    "roc_auc",
    "roc_points",
    "run_ablation",
    "save_corpus",
    "save_index",
    "save_pairs",
    "save_truth",
    "score_pairs",
    "soe_similarity",
    "split_pairs",
    "to_java_text",
    "trace_tokens",
    "tracesim",
    "tune",
    "weighted_levenshtein",
]
