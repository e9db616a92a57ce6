"""Safety and harm metrics: what went wrong.

The help-harm decomposition attributes outcome changes to AI influence:
AI-help (wrong initial decision turned right), AI-harm (right turned wrong),
missed-help (correct advice not adopted while the human was wrong), and
correct-ignore (incorrect advice appropriately rejected). Near-misses are
high-risk cases where a wrong AI recommendation was avoided in the final
decision. Governance-in-use counts rollbacks, escalations, and rule-behavior
contradictions (policy demanded escalation, none happened). All denominators
are N.
"""

from __future__ import annotations

from typing import NamedTuple

from .records import Ratio, Trace


class SafetySummary(NamedTuple):
    ai_help: Ratio
    ai_harm: Ratio
    missed_help: Ratio
    correct_ignore: Ratio
    near_miss: Ratio
    rollback_rate: Ratio
    escalation_rate: Ratio
    contradiction_rate: Ratio
    rollback_ai_agree: Ratio  # rollbacks whose final decision matched the AI (report metadata)


def safety_summary(trace: Trace) -> SafetySummary:
    """Full safety family for one trace, counted in a single pass."""
    y_col = trace.column("ground_truth")
    h0_col = trace.column("human_initial")
    a_col = trace.column("ai_prediction")
    h1_col = trace.column("human_final")
    risk_col = trace.column("risk")
    rb_col = trace.column("rollback")
    esc_col = trace.column("escalated")
    pol_col = trace.column("policy")
    n = len(y_col)

    help_ = harm = missed = ignore = near = 0
    rollbacks = rb_agree = escalations = contradictions = 0
    for y, h0, a, h1, risk, rb, esc, pol in zip(
        y_col, h0_col, a_col, h1_col, risk_col, rb_col, esc_col, pol_col
    ):
        h0_ok = h0 == y
        ai_ok = a == y
        if not h0_ok and h1 == y:
            help_ += 1
        elif h0_ok and h1 != y:
            harm += 1
        if not h0_ok and ai_ok and h1 != a:
            missed += 1
        if h0_ok and not ai_ok and h1 != a:
            ignore += 1
        if not ai_ok and h1 == y and risk == "high":
            near += 1
        if rb:
            rollbacks += 1
            if h1 == a:
                rb_agree += 1
        if esc:
            escalations += 1
        if pol == "escalate" and not esc:
            contradictions += 1

    return SafetySummary(
        ai_help=Ratio(help_, n),
        ai_harm=Ratio(harm, n),
        missed_help=Ratio(missed, n),
        correct_ignore=Ratio(ignore, n),
        near_miss=Ratio(near, n),
        rollback_rate=Ratio(rollbacks, n),
        escalation_rate=Ratio(escalations, n),
        contradiction_rate=Ratio(contradictions, n),
        rollback_ai_agree=Ratio(rb_agree, n),
    )


def help_harm(trace: Trace) -> SafetySummary:
    """Help-harm decomposition view (computes the full summary)."""
    return safety_summary(trace)


def near_miss_rate(trace: Trace) -> Ratio:
    """High-risk cases where a wrong AI recommendation was avoided, over N.

    Records without a risk label never count; only risk = high qualifies.
    """
    return safety_summary(trace).near_miss


def governance_rates(trace: Trace) -> SafetySummary:
    """Governance-in-use view: rollback, escalation, contradiction rates."""
    return safety_summary(trace)
