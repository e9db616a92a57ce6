"""Outcome metrics: what happened.

Human, AI, and team accuracies, team gains against both single-agent
baselines, the oracle upper bound (always pick whichever agent is right), and
regret against that oracle. All rates are exact count ratios over N; an empty
trace yields Undefined ratios with zero denominators.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

from .records import Ratio, Trace


class OutcomeSummary(NamedTuple):
    acc_h0: Ratio
    acc_ai: Ratio
    acc_team: Ratio
    gain_vs_human: Optional[float]  # acc_team - acc_h0
    gain_vs_ai: Optional[float]  # acc_team - acc_ai
    acc_oracle: Ratio
    regret_best: Optional[float]  # acc_oracle - acc_team, an integer multiple of 1/N

    @property
    def regret_counts(self) -> Ratio:
        """Regret as exact counts: oracle-correct minus team-correct, over N."""
        return Ratio(self.acc_oracle.numerator - self.acc_team.numerator, self.acc_team.denominator)


def outcome_summary(trace: Trace) -> OutcomeSummary:
    """Full outcome family for one trace, counted in a single pass."""
    y_col = trace.column("ground_truth")
    h0_col = trace.column("human_initial")
    a_col = trace.column("ai_prediction")
    h1_col = trace.column("human_final")
    n = len(y_col)

    n_h0 = n_ai = n_team = n_oracle = 0
    for y, h0, a, h1 in zip(y_col, h0_col, a_col, h1_col):
        h0_ok = h0 == y
        ai_ok = a == y
        if h0_ok:
            n_h0 += 1
        if ai_ok:
            n_ai += 1
        if h1 == y:
            n_team += 1
        if h0_ok or ai_ok:
            n_oracle += 1

    if n == 0:
        zero = Ratio(0, 0)
        return OutcomeSummary(zero, zero, zero, None, None, zero, None)
    return OutcomeSummary(
        acc_h0=Ratio(n_h0, n),
        acc_ai=Ratio(n_ai, n),
        acc_team=Ratio(n_team, n),
        gain_vs_human=(n_team - n_h0) / n,
        gain_vs_ai=(n_team - n_ai) / n,
        acc_oracle=Ratio(n_oracle, n),
        regret_best=(n_oracle - n_team) / n,
    )


def accuracies(trace: Trace) -> OutcomeSummary:
    """Accuracy and gain view of the outcome family (computes the full summary)."""
    return outcome_summary(trace)


def oracle_and_regret(trace: Trace) -> OutcomeSummary:
    """Oracle-bound and regret view of the outcome family (computes the full summary)."""
    return outcome_summary(trace)
