"""Reliance and interaction metrics: how the AI was used.

Conditional acceptance/rejection rates on the correct-AI set C = {j: a_j = y_j}
and wrong-AI set W = {j: a_j != y_j}, the reliance slope, decision-change
behaviors, intervention latency, and the local-vs-global update asymmetry
around the first observed AI failure. "Accept" means label agreement
h1 = a, not a UI event. Undefined rates keep their zero denominators; they are
never silently zeroed.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

from .records import Ratio, Trace


class RelianceSummary(NamedTuple):
    accept_on_correct: Ratio  # over |C|
    accept_on_wrong: Ratio  # over |W|
    reject_on_correct: Ratio
    reject_on_wrong: Ratio
    reliance_slope: Optional[float]  # accept_on_correct - accept_on_wrong, in [-1, 1]
    changed: Ratio  # over N
    changed_to_right: Ratio
    changed_to_wrong: Ratio
    latency_mean_ms: Optional[float]
    latency_count: int


class AsymmetryReport(NamedTuple):
    exposure_index: Optional[int]  # first j with a_j != y_j and feedback observed
    pre: Optional[RelianceSummary]
    post_early: Optional[RelianceSummary]
    post_late: Optional[RelianceSummary]
    early_effect: Optional[float]  # pre AoW - post_early AoW
    late_effect: Optional[float]  # pre AoW - post_late AoW
    persistence: Optional[float]  # late_effect / early_effect
    classification: str  # no_exposure | insufficient_data | local | global


NO_EXPOSURE = "no_exposure"
INSUFFICIENT_DATA = "insufficient_data"
LOCAL = "local"
GLOBAL = "global"


def reliance_summary(trace: Trace) -> RelianceSummary:
    """Full reliance family for one trace, counted in a single pass."""
    y_col = trace.column("ground_truth")
    h0_col = trace.column("human_initial")
    a_col = trace.column("ai_prediction")
    h1_col = trace.column("human_final")
    n = len(y_col)

    c_n = c_acc = w_n = w_acc = 0
    chg = chg_right = chg_wrong = 0
    for y, h0, a, h1 in zip(y_col, h0_col, a_col, h1_col):
        if a == y:
            c_n += 1
            if h1 == a:
                c_acc += 1
        else:
            w_n += 1
            if h1 == a:
                w_acc += 1
        if h1 != h0:
            chg += 1
            if h0 != y and h1 == y:
                chg_right += 1
            elif h0 == y and h1 != y:
                chg_wrong += 1

    slope = c_acc / c_n - w_acc / w_n if c_n and w_n else None
    lat_mean, lat_count = intervention_latency(trace)
    return RelianceSummary(
        accept_on_correct=Ratio(c_acc, c_n),
        accept_on_wrong=Ratio(w_acc, w_n),
        reject_on_correct=Ratio(c_n - c_acc, c_n),
        reject_on_wrong=Ratio(w_n - w_acc, w_n),
        reliance_slope=slope,
        changed=Ratio(chg, n),
        changed_to_right=Ratio(chg_right, n),
        changed_to_wrong=Ratio(chg_wrong, n),
        latency_mean_ms=lat_mean,
        latency_count=lat_count,
    )


def conditional_reliance(trace: Trace) -> RelianceSummary:
    """Acceptance/rejection rates conditioned on AI correctness, plus the slope."""
    return reliance_summary(trace)


def decision_changes(trace: Trace) -> RelianceSummary:
    """Decision-change behaviors: changed, changed-to-right, changed-to-wrong."""
    return reliance_summary(trace)


def intervention_latency(trace: Trace) -> tuple[Optional[float], int]:
    """Mean confirm/override time in ms over records with both timestamps.

    Records missing a timestamp are excluded, never imputed; the count reports
    how many records contributed. The mean is absent when none do.
    """
    total = 0
    count = 0
    for t0, t1 in zip(trace.column("t_ai_shown"), trace.column("t_final")):
        if t0 is not None and t1 is not None:
            total += t1 - t0
            count += 1
    return (total / count if count else None, count)


def update_asymmetry(
    trace: Trace,
    window: int = 10,
    epsilon: float = 0.05,
    *,
    persistence_threshold: float = 0.5,
) -> AsymmetryReport:
    """Compare accept-on-wrong before and after the first observed AI failure.

    The exposure is the first record where the AI was wrong and the participant
    learned it (feedback_observed). Reliance is summarized over the records
    before the exposure, over the ``window`` records just after it, and over
    the following ``window`` records. The persistence of the early effect
    (late/early drop in accept-on-wrong) classifies the update as global
    (persistence >= threshold) or local; windows without wrong-AI records or an
    early effect within ``epsilon`` yield insufficient_data.

    Order-dependent by design: call on a single participant's ordered trace.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")

    y_col = trace.column("ground_truth")
    a_col = trace.column("ai_prediction")
    fb_col = trace.column("feedback_observed")
    exposure = None
    for j, (y, a, fb) in enumerate(zip(y_col, a_col, fb_col)):
        if fb and a != y:
            exposure = j
            break
    if exposure is None:
        return AsymmetryReport(None, None, None, None, None, None, None, NO_EXPOSURE)

    pre = reliance_summary(trace.slice(0, exposure))
    post_early = reliance_summary(trace.slice(exposure + 1, exposure + 1 + window))
    post_late = reliance_summary(trace.slice(exposure + 1 + window, exposure + 1 + 2 * window))

    pre_aow = pre.accept_on_wrong.value
    early_aow = post_early.accept_on_wrong.value
    late_aow = post_late.accept_on_wrong.value
    if pre_aow is None or early_aow is None or late_aow is None:
        return AsymmetryReport(
            exposure, pre, post_early, post_late, None, None, None, INSUFFICIENT_DATA
        )

    early_effect = pre_aow - early_aow
    late_effect = pre_aow - late_aow
    if abs(early_effect) <= epsilon:
        return AsymmetryReport(
            exposure, pre, post_early, post_late, early_effect, late_effect, None, INSUFFICIENT_DATA
        )
    persistence = late_effect / early_effect
    label = GLOBAL if persistence >= persistence_threshold else LOCAL
    return AsymmetryReport(
        exposure, pre, post_early, post_late, early_effect, late_effect, persistence, label
    )
