"""Report assembly: partitioned metric computation, identity checks, rendering.

One MetricReport per partition covers all four metric families, each metric
tagged with its lifecycle stage and design-action hint. Count-level identities
that must hold on every trace are asserted before a report is emitted; a
violation can only mean an engine defect, so it aborts with a diagnostic dump
instead of emitting poisoned numbers. JSON output is a deterministic function
of (trace, parameters): sorted keys, 6-decimal quotients, exact counts
alongside. Markdown renders one table per family question.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any, Optional, Sequence

from .annotations import (
    FAMILY_TITLES,
    LEARNING,
    MANIFEST,
    METRIC_ANNOTATIONS,
    OUTCOME,
    RELIANCE,
    SAFETY,
)
from .learning import (
    BlockSlope,
    MetricDiff,
    RETENTION_METRICS,
    TRANSFER_METRICS,
    calibration_gap,
    retention,
    slope_trajectory,
    time_to_calibration,
    transfer,
)
from .outcome import OutcomeSummary, outcome_summary
from .records import Ratio, Trace, partition
from .reliance import AsymmetryReport, RelianceSummary, reliance_summary, update_asymmetry
from .safety import SafetySummary, safety_summary

PARAMETER_NOTE = (
    "window, epsilon, stability, persistence_threshold, and block_size are "
    "engine-chosen defaults, not values prescribed by the metric definitions"
)


@dataclass(frozen=True)
class EngineParams:
    """Tunable engine parameters, echoed into every report."""

    asymmetry_window: int = 10
    asymmetry_epsilon: float = 0.05
    persistence_threshold: float = 0.5
    calibration_window: int = 20
    calibration_epsilon: float = 0.05
    calibration_stability: int = 3
    block_size: int = 20


class IdentityViolation(RuntimeError):
    """Count-level identity broken: an engine defect, never a data problem."""

    def __init__(self, failed: Sequence[str], dump: dict[str, Any]):
        self.failed = list(failed)
        self.dump = dump
        super().__init__(f"identity violation: {', '.join(failed)}")


@dataclass
class MetricReport:
    partition: dict[str, Optional[str]]
    coverage: dict[str, int]
    outcome: OutcomeSummary
    reliance: RelianceSummary
    safety: SafetySummary
    calibration_gap: Optional[float]
    calibration_count: int
    slopes_by_block: list[BlockSlope]
    delta_slope: Optional[float]
    blocking: str
    retention_diffs: list[MetricDiff]
    transfer_diffs: list[MetricDiff]
    asymmetry: Optional[AsymmetryReport]
    ttc_index: Optional[int]
    ttc_skipped: bool
    asymmetry_skipped: bool
    diagnostics: list[str] = field(default_factory=list)


def check_identities(
    outcome: OutcomeSummary,
    reliance: RelianceSummary,
    safety: SafetySummary,
    n: int,
    policy_escalate: int,
) -> None:
    """Assert the exact count identities tying the metric families together."""
    o, r, s = outcome, reliance, safety
    checks = {
        "help_minus_harm_equals_team_minus_h0":
            s.ai_help.numerator - s.ai_harm.numerator
            == o.acc_team.numerator - o.acc_h0.numerator,
        "help_equals_changed_to_right": s.ai_help.numerator == r.changed_to_right.numerator,
        "harm_equals_changed_to_wrong": s.ai_harm.numerator == r.changed_to_wrong.numerator,
        "accept_reject_complementarity_on_correct":
            r.accept_on_correct.numerator + r.reject_on_correct.numerator
            == r.accept_on_correct.denominator,
        "accept_reject_complementarity_on_wrong":
            r.accept_on_wrong.numerator + r.reject_on_wrong.numerator
            == r.accept_on_wrong.denominator,
        "correct_wrong_sets_partition_trace":
            r.accept_on_correct.denominator + r.accept_on_wrong.denominator == n,
        "oracle_dominates":
            o.acc_oracle.numerator
            >= max(o.acc_h0.numerator, o.acc_ai.numerator, o.acc_team.numerator),
        "regret_nonnegative": o.acc_oracle.numerator >= o.acc_team.numerator,
        "slope_in_bounds":
            r.reliance_slope is None or -1.0 <= r.reliance_slope <= 1.0,
        "changes_split_bounded":
            r.changed_to_right.numerator + r.changed_to_wrong.numerator <= r.changed.numerator,
        "contradictions_within_policy": s.contradiction_rate.numerator <= policy_escalate,
        "disjoint_decomposition":
            s.ai_help.numerator + s.ai_harm.numerator + s.missed_help.numerator
            + s.correct_ignore.numerator <= n,
    }
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        dump = {
            "failed": failed,
            "n": n,
            "policy_escalate": policy_escalate,
            "outcome": {f: _dump_value(getattr(o, f)) for f in o._fields},
            "reliance": {f: _dump_value(getattr(r, f)) for f in r._fields},
            "safety": {f: _dump_value(getattr(s, f)) for f in s._fields},
        }
        raise IdentityViolation(failed, dump)


def _dump_value(v: Any) -> Any:
    if isinstance(v, Ratio):
        return {"numerator": v.numerator, "denominator": v.denominator}
    return v


def _scalar_metrics(
    outcome: OutcomeSummary, reliance: RelianceSummary, gap: Optional[float]
) -> dict[str, Optional[float]]:
    """Per-partition metric values by name, for retention/transfer comparisons."""
    return {
        "acc_team": outcome.acc_team.value,
        "acc_h0": outcome.acc_h0.value,
        "acc_ai": outcome.acc_ai.value,
        "reliance_slope": reliance.reliance_slope,
        "accept_on_wrong": reliance.accept_on_wrong.value,
        "calibration_gap": gap,
    }


def compute_report(
    trace: Trace,
    group_by: Sequence[str] = (),
    params: EngineParams = EngineParams(),
) -> list[MetricReport]:
    """Compute one MetricReport per partition of the trace.

    update_asymmetry and time_to_calibration are order-dependent and only
    meaningful for a single participant's stream; partitions spanning several
    participants skip them with a diagnostic. Cross-family identities are
    asserted for every partition before anything is emitted.
    """
    reports = []
    parts = partition(trace, list(group_by))
    order = sorted(parts, key=lambda key: tuple("" if v is None else f"\x01{v}" for v in key))
    for key in order:
        sub = parts[key]
        reports.append(_single_report(sub, dict(zip(group_by, key)), params))
    return reports


def _single_report(
    trace: Trace, partition_key: dict[str, Optional[str]], params: EngineParams
) -> MetricReport:
    n = len(trace)
    diagnostics: list[str] = []

    out = outcome_summary(trace)
    rel = reliance_summary(trace)
    saf = safety_summary(trace)
    gap, gap_count = calibration_gap(trace)

    policy_escalate = sum(1 for p in trace.column("policy") if p == "escalate")
    check_identities(out, rel, saf, n, policy_escalate)

    block_ids = trace.column("block_id")
    if n and all(b is not None for b in block_ids):
        scheme: Any = "by_label"
        blocking = "by_label"
    else:
        scheme = params.block_size
        blocking = f"fixed_size({params.block_size})"
    slopes, delta = slope_trajectory(trace, scheme) if n else ([], None)

    sessions = partition(trace, ["session_id"])
    session_keys = sorted(k[0] for k in sessions if k[0] is not None)
    session_values = []
    for skey in session_keys:
        strace = sessions[(skey,)]
        sgap, _ = calibration_gap(strace)
        session_values.append((skey, _scalar_metrics(outcome_summary(strace), reliance_summary(strace), sgap)))
    retention_diffs, retention_note = retention(session_values, RETENTION_METRICS)
    if retention_note:
        diagnostics.append(retention_note)

    tasks = partition(trace, ["task_id"])
    task_keys = sorted(k[0] for k in tasks if k[0] is not None)
    task_values = {}
    for tkey in task_keys:
        ttrace = tasks[(tkey,)]
        tgap, _ = calibration_gap(ttrace)
        task_values[tkey] = _scalar_metrics(outcome_summary(ttrace), reliance_summary(ttrace), tgap)
    if len(task_values) >= 2:
        transfer_diffs = transfer(task_values, TRANSFER_METRICS)
    else:
        transfer_diffs = []
        diagnostics.append(f"transfer needs at least 2 tasks, got {len(task_values)}")

    participants = set(trace.column("participant_id"))
    single_participant = len(participants) <= 1
    if single_participant:
        asym = update_asymmetry(
            trace,
            params.asymmetry_window,
            params.asymmetry_epsilon,
            persistence_threshold=params.persistence_threshold,
        ) if n else None
        ttc = time_to_calibration(
            trace,
            params.calibration_window,
            params.calibration_epsilon,
            params.calibration_stability,
        ) if n else None
        asym_skipped = ttc_skipped = False
    else:
        asym, ttc = None, None
        asym_skipped = ttc_skipped = True
        diagnostics.append(
            f"update_asymmetry and time_to_calibration skipped: partition spans "
            f"{len(participants)} participants"
        )

    timed = rel.latency_count
    coverage = {
        "n": n,
        "ai_correct": rel.accept_on_correct.denominator,
        "ai_wrong": rel.accept_on_wrong.denominator,
        "timed": timed,
        "confident": gap_count,
        "participants": len(participants),
        "sessions": len(session_keys),
        "blocks": len(slopes),
        "tasks": len(task_keys),
        "policy_escalate": policy_escalate,
        "rollback_ai_agree": saf.rollback_ai_agree.numerator,
    }

    return MetricReport(
        partition=partition_key,
        coverage=coverage,
        outcome=out,
        reliance=rel,
        safety=saf,
        calibration_gap=gap,
        calibration_count=gap_count,
        slopes_by_block=slopes,
        delta_slope=delta,
        blocking=blocking,
        retention_diffs=retention_diffs,
        transfer_diffs=transfer_diffs,
        asymmetry=asym,
        ttc_index=ttc,
        ttc_skipped=ttc_skipped,
        asymmetry_skipped=asym_skipped,
        diagnostics=diagnostics,
    )


def _round6(v: Optional[float]) -> Optional[float]:
    return None if v is None else round(v, 6)


def _entry(name: str, **payload: Any) -> dict[str, Any]:
    a = METRIC_ANNOTATIONS[name]
    return {
        "display": a.display,
        "uci_stage": a.stage,
        "design_action_hint": a.hint,
        **payload,
    }


def _ratio_entry(name: str, r: Ratio) -> dict[str, Any]:
    return _entry(name, numerator=r.numerator, denominator=r.denominator, value=_round6(r.value))


def _value_entry(name: str, value: Optional[float], **extra: Any) -> dict[str, Any]:
    return _entry(name, value=_round6(value), **extra)


def report_to_dict(report: MetricReport) -> dict[str, Any]:
    """The stable dictionary form of one report (consumed by render)."""
    o, r, s = report.outcome, report.reliance, report.safety
    outcome_section = {
        "acc_h0": _ratio_entry("acc_h0", o.acc_h0),
        "acc_ai": _ratio_entry("acc_ai", o.acc_ai),
        "acc_team": _ratio_entry("acc_team", o.acc_team),
        "gain_vs_human": _value_entry("gain_vs_human", o.gain_vs_human),
        "gain_vs_ai": _value_entry("gain_vs_ai", o.gain_vs_ai),
        "acc_oracle": _ratio_entry("acc_oracle", o.acc_oracle),
        "regret_best": _value_entry(
            "regret_best",
            o.regret_best,
            numerator=o.regret_counts.numerator,
            denominator=o.regret_counts.denominator,
        ),
    }
    asym = report.asymmetry
    asym_entry = _value_entry(
        "update_asymmetry",
        None if asym is None else asym.persistence,
        classification=None if asym is None else asym.classification,
        exposure_index=None if asym is None else asym.exposure_index,
        early_effect=None if asym is None else _round6(asym.early_effect),
        late_effect=None if asym is None else _round6(asym.late_effect),
    )
    if report.asymmetry_skipped:
        asym_entry["skipped_reason"] = "partition spans multiple participants"
    reliance_section = {
        "accept_on_correct": _ratio_entry("accept_on_correct", r.accept_on_correct),
        "accept_on_wrong": _ratio_entry("accept_on_wrong", r.accept_on_wrong),
        "reject_on_correct": _ratio_entry("reject_on_correct", r.reject_on_correct),
        "reject_on_wrong": _ratio_entry("reject_on_wrong", r.reject_on_wrong),
        "reliance_slope": _value_entry("reliance_slope", r.reliance_slope),
        "changed": _ratio_entry("changed", r.changed),
        "changed_to_right": _ratio_entry("changed_to_right", r.changed_to_right),
        "changed_to_wrong": _ratio_entry("changed_to_wrong", r.changed_to_wrong),
        "intervention_latency": _value_entry(
            "intervention_latency", r.latency_mean_ms, count=r.latency_count
        ),
        "update_asymmetry": asym_entry,
    }
    safety_section = {
        "ai_help": _ratio_entry("ai_help", s.ai_help),
        "ai_harm": _ratio_entry("ai_harm", s.ai_harm),
        "missed_help": _ratio_entry("missed_help", s.missed_help),
        "correct_ignore": _ratio_entry("correct_ignore", s.correct_ignore),
        "near_miss": _ratio_entry("near_miss", s.near_miss),
        "rollback_rate": _ratio_entry("rollback_rate", s.rollback_rate),
        "escalation_rate": _ratio_entry("escalation_rate", s.escalation_rate),
        "contradiction_rate": _ratio_entry("contradiction_rate", s.contradiction_rate),
    }
    ttc_entry = _entry("time_to_calibration", index=report.ttc_index)
    if report.ttc_skipped:
        ttc_entry["skipped_reason"] = "partition spans multiple participants"
    learning_section = {
        "calibration_gap": _value_entry(
            "calibration_gap", report.calibration_gap, count=report.calibration_count
        ),
        "delta_slope": _value_entry(
            "delta_slope",
            report.delta_slope,
            blocking=report.blocking,
            slopes_by_block=[
                {"block": b.block, "label": b.label, "slope": _round6(b.slope)}
                for b in report.slopes_by_block
            ],
        ),
        "retention": _entry(
            "retention",
            diffs=[
                {"metric": d.metric, "from": d.left, "to": d.right, "diff": _round6(d.diff)}
                for d in report.retention_diffs
            ],
        ),
        "transfer": _entry(
            "transfer",
            diffs=[
                {"metric": d.metric, "task_a": d.left, "task_b": d.right, "diff": _round6(d.diff)}
                for d in report.transfer_diffs
            ],
        ),
        "time_to_calibration": ttc_entry,
    }
    return {
        "partition": report.partition,
        "coverage": report.coverage,
        "outcome": outcome_section,
        "reliance_interaction": reliance_section,
        "safety_harm": safety_section,
        "learning_readiness": learning_section,
        "diagnostics": report.diagnostics,
    }


def render_json(reports: Sequence[MetricReport], params: EngineParams = EngineParams()) -> str:
    """Machine-stable JSON: sorted keys, 6-decimal quotients, exact counts."""
    doc = {
        "schema": "report/1",
        "parameters": {**asdict(params), "note": PARAMETER_NOTE},
        "reports": [report_to_dict(r) for r in reports],
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


_SECTION_ORDER = ("outcome", "reliance_interaction", "safety_harm", "learning_readiness")
_SECTION_FAMILIES = {
    "outcome": OUTCOME,
    "reliance_interaction": RELIANCE,
    "safety_harm": SAFETY,
    "learning_readiness": LEARNING,
}


def _fmt4(v: Optional[float]) -> str:
    return "undefined" if v is None else f"{v:.4f}"


def render_markdown(reports: Sequence[MetricReport], params: EngineParams = EngineParams()) -> str:
    """Human-oriented markdown: one table per family question, 4-decimal values."""
    lines = ["# Decision-trace report", ""]
    lines.append(f"Engine parameters: `{asdict(params)}` ({PARAMETER_NOTE}).")
    lines.append("")
    for report in reports:
        d = report_to_dict(report)
        if report.partition:
            label = ", ".join(f"{k}={v if v is not None else '(unkeyed)'}" for k, v in report.partition.items())
        else:
            label = "whole trace"
        lines.append(f"## Partition: {label}")
        lines.append("")
        cov = ", ".join(f"{k}={v}" for k, v in report.coverage.items())
        lines.append(f"Coverage: {cov}")
        lines.append("")
        for section in _SECTION_ORDER:
            lines.append(f"### {FAMILY_TITLES[_SECTION_FAMILIES[section]]}")
            lines.append("")
            lines.append("| Metric | Counts | Value | U-C-I stage | Design action |")
            lines.append("| --- | --- | --- | --- | --- |")
            for name, entry in d[section].items():
                counts = ""
                if "numerator" in entry:
                    counts = f"{entry['numerator']}/{entry['denominator']}"
                if name == "intervention_latency":
                    value = "undefined" if entry["value"] is None else f"{entry['value']:.1f} ms"
                    counts = f"{entry['count']} timed"
                elif name == "update_asymmetry":
                    value = entry["classification"] or "skipped"
                elif name == "time_to_calibration":
                    value = "undefined" if entry.get("index") is None else str(entry["index"])
                elif name == "retention" or name == "transfer":
                    defined = [x["diff"] for x in entry["diffs"] if x["diff"] is not None]
                    value = f"{len(entry['diffs'])} diffs" if entry["diffs"] else "undefined"
                    if defined:
                        value += f", max {max(defined):.4f}"
                else:
                    value = _fmt4(entry.get("value"))
                lines.append(
                    f"| {entry['display']} | {counts} | {value} | {entry['uci_stage']} | {entry['design_action_hint']} |"
                )
            lines.append("")
        if report.diagnostics:
            lines.append("Diagnostics:")
            for msg in report.diagnostics:
                lines.append(f"- {msg}")
            lines.append("")
    return "\n".join(lines)


def render(reports: Sequence[MetricReport], fmt: str, params: EngineParams = EngineParams()) -> str:
    if fmt == "json":
        return render_json(reports, params)
    if fmt == "markdown":
        return render_markdown(reports, params)
    raise ValueError(f"unknown format {fmt!r}; expected json or markdown")


def verify_manifest(report_dict: dict[str, Any]) -> None:
    """Check that each of the 28 core metrics appears exactly once in a report."""
    seen: dict[str, int] = {}
    for section in _SECTION_ORDER:
        for name in report_dict[section]:
            seen[name] = seen.get(name, 0) + 1
    missing = [m for m in MANIFEST if seen.get(m, 0) != 1]
    if missing:
        raise IdentityViolation(
            [f"manifest_presence:{m}" for m in missing], {"seen": seen}
        )
