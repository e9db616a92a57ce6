"""teamtrace: trace-based evaluation of human-AI decision-making readiness.

Computes four families of metrics from interaction logs — outcome quality,
reliance and interaction behavior, safety and harm signals, and learning over
time — validates them against exact count identities and a parametric team
simulator, and renders annotated reports.
"""

from .learning import (
    BlockSlope,
    MetricDiff,
    calibration_gap,
    retention,
    rolling_slopes,
    slope_trajectory,
    time_to_calibration,
    transfer,
)
from .outcome import OutcomeSummary, accuracies, oracle_and_regret, outcome_summary
from .records import (
    Block,
    DecisionRecord,
    PARTITION_KEYS,
    Ratio,
    Trace,
    TraceValidationError,
    ValidationIssue,
    block_bounds,
    partition,
    split_blocks,
    validate_trace,
)
from .reliance import (
    AsymmetryReport,
    RelianceSummary,
    conditional_reliance,
    decision_changes,
    intervention_latency,
    reliance_summary,
    update_asymmetry,
)
from .report import (
    EngineParams,
    IdentityViolation,
    MetricReport,
    compute_report,
    render,
    render_json,
    render_markdown,
    report_to_dict,
)
from .safety import SafetySummary, governance_rates, help_harm, near_miss_rate, safety_summary
from .simulate import (
    ConfidenceModel,
    DriftRange,
    ExpectedMetrics,
    LatencyModel,
    SimConfig,
    expected_metrics,
    load_config,
    simulate_trace,
)
from .trace_io import TraceIOError, load_trace, read_csv, read_jsonl, write_jsonl

__version__ = "0.1.0"

__all__ = [
    "AsymmetryReport",
    "Block",
    "BlockSlope",
    "ConfidenceModel",
    "DecisionRecord",
    "DriftRange",
    "EngineParams",
    "ExpectedMetrics",
    "IdentityViolation",
    "LatencyModel",
    "MetricDiff",
    "MetricReport",
    "OutcomeSummary",
    "PARTITION_KEYS",
    "Ratio",
    "RelianceSummary",
    "SafetySummary",
    "SimConfig",
    "Trace",
    "TraceIOError",
    "TraceValidationError",
    "ValidationIssue",
    "accuracies",
    "block_bounds",
    "calibration_gap",
    "compute_report",
    "conditional_reliance",
    "decision_changes",
    "expected_metrics",
    "governance_rates",
    "help_harm",
    "intervention_latency",
    "load_config",
    "load_trace",
    "near_miss_rate",
    "oracle_and_regret",
    "outcome_summary",
    "partition",
    "read_csv",
    "read_jsonl",
    "reliance_summary",
    "render",
    "render_json",
    "render_markdown",
    "report_to_dict",
    "retention",
    "rolling_slopes",
    "safety_summary",
    "simulate_trace",
    "slope_trajectory",
    "split_blocks",
    "time_to_calibration",
    "transfer",
    "update_asymmetry",
    "validate_trace",
    "write_jsonl",
]
