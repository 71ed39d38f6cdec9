"""nemoforge: build and score needle-in-a-montage temporal grounding benchmarks.

The pipeline goes: representation corpus -> montage synthesis -> QA
generation -> expansion (longer montages, extra needles, multi-needle
splits) -> model evaluation -> discrete-timestamp metrics, with a human
review service for verdict collection and clean export.
"""

from .core import (
    ClipSegment,
    DurationClass,
    Montage,
    NeedleCountClass,
    NeedleGroundingQA,
    NeedleType,
    Provenance,
    TimeInterval,
    classify_duration,
    needle_count_class_for,
    validate_interval,
)
from .cost import CostParams, approx_alpha, auto_cost, average_alpha, cost_summary, manual_cost, reduction_ratio
from .errors import (
    ContaminationError,
    IneligibleError,
    InvalidDurationError,
    InvalidIntervalError,
    JsonlParseError,
    MalformedResponseError,
    NemoforgeError,
    NotFoundError,
    PoolExhaustedError,
    RecordValidationError,
    ReferentialIntegrityError,
    ResolverError,
    TransportError,
    UsageError,
)
from .evaluation import (
    BatchParse,
    EmptyModelClient,
    EvalConfig,
    FramePlan,
    OracleModelClient,
    ParsedPrediction,
    PredictionRecord,
    PromptStyle,
    ScriptedModelClient,
    build_batch_prompt,
    build_eval_prompt,
    clip_intervals,
    detect_refusal,
    format_batch_prediction,
    format_prediction,
    parse_batch_prediction,
    parse_prediction,
    plan_frame_samples,
    resolve_max_frames,
    run_evaluation,
)
from .expansion import (
    attach_additional_qa,
    choose_split_count,
    extend_montage,
    feasible_split_counts,
    register_needles,
    split_to_multi_needle,
)
from .metrics import (
    MetricReport,
    SampleScore,
    aggregate_report,
    average_map,
    match_targets,
    recall_at_kx,
    score_sample,
    timestamp_set,
    tiou,
    tiou_fraction,
)
from .qa_gen import StubAnnotator, generate_qa, instantiate_object_question
from .representation import (
    ObjectTable,
    SceneTable,
    VideoRepresentation,
    eligible_target_scenes,
    load_corpus,
    load_representation,
    prominent_objects,
    scenes_without_tag,
)
from .review import ReviewStore, ReviewVerdict, VerdictAction, create_app, export_clean
from .stats import compute_stats, render_stats_text
from .synthesis import (
    SynthesisConfig,
    class_bounds,
    compose_montage,
    emit_concat_manifest,
    needle_interval_in_montage,
)

__version__ = "0.1.0"

__all__ = [
    "BatchParse",
    "ClipSegment",
    "ContaminationError",
    "CostParams",
    "DurationClass",
    "EmptyModelClient",
    "EvalConfig",
    "FramePlan",
    "IneligibleError",
    "InvalidDurationError",
    "InvalidIntervalError",
    "JsonlParseError",
    "MalformedResponseError",
    "MetricReport",
    "Montage",
    "NeedleCountClass",
    "NeedleGroundingQA",
    "NeedleType",
    "NemoforgeError",
    "NotFoundError",
    "ObjectTable",
    "OracleModelClient",
    "ParsedPrediction",
    "PoolExhaustedError",
    "PredictionRecord",
    "PromptStyle",
    "Provenance",
    "RecordValidationError",
    "ReferentialIntegrityError",
    "ResolverError",
    "ReviewStore",
    "ReviewVerdict",
    "SampleScore",
    "SceneTable",
    "ScriptedModelClient",
    "StubAnnotator",
    "SynthesisConfig",
    "TimeInterval",
    "TransportError",
    "UsageError",
    "VerdictAction",
    "VideoRepresentation",
    "aggregate_report",
    "approx_alpha",
    "attach_additional_qa",
    "auto_cost",
    "average_alpha",
    "average_map",
    "build_batch_prompt",
    "build_eval_prompt",
    "choose_split_count",
    "class_bounds",
    "classify_duration",
    "clip_intervals",
    "compose_montage",
    "compute_stats",
    "cost_summary",
    "create_app",
    "detect_refusal",
    "eligible_target_scenes",
    "emit_concat_manifest",
    "export_clean",
    "extend_montage",
    "feasible_split_counts",
    "format_batch_prediction",
    "format_prediction",
    "generate_qa",
    "instantiate_object_question",
    "load_corpus",
    "load_representation",
    "manual_cost",
    "match_targets",
    "needle_count_class_for",
    "needle_interval_in_montage",
    "parse_batch_prediction",
    "parse_prediction",
    "plan_frame_samples",
    "prominent_objects",
    "recall_at_kx",
    "reduction_ratio",
    "register_needles",
    "render_stats_text",
    "resolve_max_frames",
    "run_evaluation",
    "scenes_without_tag",
    "score_sample",
    "split_to_multi_needle",
    "timestamp_set",
    "tiou",
    "tiou_fraction",
    "validate_interval",
]
