"""Context packing for next-frame-prediction video generators.

The toolkit computes, parses, applies, and verifies compression schedules
over latent videos, plans anti-drifting sampling orders, discretizes frame
history via a fitted codebook, and scores drift and pairwise-preference
Elo ratings.
"""

from .budget import (
    BudgetParams,
    RateDecomposition,
    decompose_rate,
    length_bound,
    per_frame_length,
    tail_tokens,
    tokens_for_entry,
    tokens_for_schedule,
    tokens_per_frame_for,
    total_length,
)
from .codebook import (
    Codebook,
    FitStats,
    IndexMap,
    dequantize,
    discretize_history,
    fit_codebook,
    quantize,
)
from .drift import (
    MatchOutcome,
    MatchRecord,
    RatingTable,
    SegmentMetric,
    builtin_metrics,
    drift,
    drift_report,
    elo_expected,
    elo_update,
    parse_match_log,
    rank_buckets,
    tournament,
)
from .fplt import (
    read_codebook,
    read_tensor,
    read_video,
    write_codebook,
    write_tensor,
    write_video,
)
from .importance import (
    ImportanceScore,
    importance_scores,
    reorder_frames,
    sim_cos,
    sim_hybrid,
    sim_time,
    sort_by_importance,
)
from .packing import (
    LEARNED_KERNELS,
    KernelResolution,
    LatentVideo,
    PackedContext,
    PackedToken,
    apply_schedule,
    build_symmetric_schedule,
    handle_tail,
    patchify,
    resolve_kernel,
)
from .planner import (
    GenerationPlan,
    InputBinding,
    Iteration,
    PlanMode,
    Span,
    plan_endpoint,
    plan_inverted,
    plan_multi_endpoint,
    plan_vanilla,
    serialize_plan,
)
from .rope import (
    AxisPhases,
    PhaseGrid,
    axial_frequencies,
    generate_phases,
    phases_for_positions,
    pool_phases,
)
from .schedule import (
    BASE_KERNEL,
    Frames,
    Generate,
    KernelSpec,
    PackingSchedule,
    SamplingMode,
    Skip,
    Tail,
    TailMode,
    classify_sampling_mode,
    format_schedule,
    parse_schedule,
)

__version__ = "0.1.0"

__all__ = [
    "BASE_KERNEL",
    "BudgetParams",
    "Codebook",
    "FitStats",
    "Frames",
    "Generate",
    "GenerationPlan",
    "ImportanceScore",
    "IndexMap",
    "InputBinding",
    "Iteration",
    "KernelResolution",
    "KernelSpec",
    "LEARNED_KERNELS",
    "LatentVideo",
    "MatchOutcome",
    "MatchRecord",
    "PackedContext",
    "PackedToken",
    "PackingSchedule",
    "PhaseGrid",
    "AxisPhases",
    "PlanMode",
    "RateDecomposition",
    "RatingTable",
    "SamplingMode",
    "SegmentMetric",
    "Skip",
    "Span",
    "Tail",
    "TailMode",
    "apply_schedule",
    "axial_frequencies",
    "build_symmetric_schedule",
    "builtin_metrics",
    "classify_sampling_mode",
    "decompose_rate",
    "dequantize",
    "discretize_history",
    "drift",
    "drift_report",
    "elo_expected",
    "elo_update",
    "fit_codebook",
    "format_schedule",
    "generate_phases",
    "handle_tail",
    "importance_scores",
    "length_bound",
    "parse_match_log",
    "parse_schedule",
    "patchify",
    "per_frame_length",
    "phases_for_positions",
    "plan_endpoint",
    "plan_inverted",
    "plan_multi_endpoint",
    "plan_vanilla",
    "pool_phases",
    "quantize",
    "rank_buckets",
    "read_codebook",
    "read_tensor",
    "read_video",
    "reorder_frames",
    "resolve_kernel",
    "serialize_plan",
    "sim_cos",
    "sim_hybrid",
    "sim_time",
    "sort_by_importance",
    "tail_tokens",
    "tokens_for_entry",
    "tokens_for_schedule",
    "tokens_per_frame_for",
    "total_length",
    "tournament",
    "write_codebook",
    "write_tensor",
    "write_video",
]
