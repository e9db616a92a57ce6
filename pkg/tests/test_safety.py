from __future__ import annotations

import random

import pytest

from teamtrace import Ratio, governance_rates, help_harm, near_miss_rate, outcome_summary
from util import T1_ROWS, make_trace, random_trace, t1_trace

import naive_metrics


class TestHelpHarm:
    def test_t1_decomposition(self, t1):
        s = help_harm(t1)
        assert s.ai_help == Ratio(1, 6)
        assert s.ai_harm == Ratio(1, 6)
        assert s.missed_help == Ratio(1, 6)
        assert s.correct_ignore == Ratio(1, 6)

    def test_nothing_to_decompose(self):
        trace = make_trace([("1", "1", "0", "1"), ("0", "0", "1", "0")])
        s = help_harm(trace)
        assert s.ai_help.numerator == 0
        assert s.ai_harm.numerator == 0
        assert s.missed_help.numerator == 0

    def test_perfect_rescue(self):
        trace = make_trace([("1", "0", "1", "1")] * 4)
        s = help_harm(trace)
        assert s.ai_help.value == 1.0
        assert s.missed_help.numerator == 0

    def test_contributing_sets_disjoint(self):
        rng = random.Random(21)
        for _ in range(50):
            trace = random_trace(rng, n=rng.randint(1, 60))
            s = help_harm(trace)
            total = (
                s.ai_help.numerator
                + s.ai_harm.numerator
                + s.missed_help.numerator
                + s.correct_ignore.numerator
            )
            assert total <= len(trace)


class TestNearMiss:
    def test_t1_with_risk_on_r5(self):
        risk = ["low", "low", "low", "low", "high", "low"]
        assert near_miss_rate(t1_trace(risk=risk)) == Ratio(1, 6)

    def test_no_high_risk(self, t1):
        assert near_miss_rate(t1) == Ratio(0, 6)

    def test_saturated(self):
        trace = make_trace([("1", "0", "0", "1")] * 3, risk=["high"] * 3)
        assert near_miss_rate(trace) == Ratio(3, 3)

    def test_medium_risk_never_counts(self):
        trace = make_trace([("1", "0", "0", "1")] * 2, risk=["medium", "high"])
        assert near_miss_rate(trace) == Ratio(1, 2)


class TestGovernance:
    def fixture(self):
        rows = [("1", "1", "1", "1")] * 10
        rollback = [True, True] + [False] * 8
        escalated = [False, False, True, True, True] + [False] * 5
        policy = [None, None, "escalate", "escalate", "escalate", "escalate"] + [None] * 4
        return make_trace(rows, rollback=rollback, escalated=escalated, policy=policy)

    def test_worked_counts(self):
        s = governance_rates(self.fixture())
        assert s.rollback_rate == Ratio(2, 10)
        assert s.escalation_rate == Ratio(3, 10)
        assert s.contradiction_rate == Ratio(1, 10)

    def test_default_flags_all_zero(self, t1):
        s = governance_rates(t1)
        assert s.rollback_rate.numerator == 0
        assert s.escalation_rate.numerator == 0
        assert s.contradiction_rate.numerator == 0

    def test_full_compliance(self):
        rows = [("1", "1", "1", "1")] * 4
        trace = make_trace(rows, escalated=[True] * 4, policy=["escalate"] * 4)
        assert governance_rates(trace).contradiction_rate == Ratio(0, 4)

    def test_contradiction_complement(self):
        rng = random.Random(22)
        for _ in range(50):
            trace = random_trace(rng, n=rng.randint(1, 60))
            s = governance_rates(trace)
            counts = naive_metrics.counts(trace.records)
            followed = counts["policy_escalate"] - counts["contradictions"]
            assert s.contradiction_rate.numerator + followed == counts["policy_escalate"]


class TestCrossModuleIdentities:
    def test_decomposition_identity(self):
        rng = random.Random(23)
        for _ in range(50):
            trace = random_trace(rng, n=rng.randint(1, 60))
            s = help_harm(trace)
            o = outcome_summary(trace)
            assert (
                s.ai_help.numerator - s.ai_harm.numerator
                == o.acc_team.numerator - o.acc_h0.numerator
            )

    def test_near_miss_bound(self):
        rng = random.Random(24)
        for _ in range(50):
            trace = random_trace(rng, n=rng.randint(1, 60))
            s = help_harm(trace)
            high_risk_rescue = sum(
                1
                for r in trace.records
                if r.human_initial != r.ground_truth
                and r.ai_prediction != r.ground_truth
                and r.human_final == r.ground_truth
                and r.risk == "high"
            )
            assert s.near_miss.numerator <= s.correct_ignore.numerator + high_risk_rescue

    def test_matches_naive(self):
        rng = random.Random(25)
        for _ in range(30):
            trace = random_trace(rng, n=rng.randint(1, 60))
            want = naive_metrics.counts(trace.records)
            s = help_harm(trace)
            assert s.ai_help.numerator == want["ai_help"]
            assert s.ai_harm.numerator == want["ai_harm"]
            assert s.missed_help.numerator == want["missed_help"]
            assert s.correct_ignore.numerator == want["correct_ignore"]
            assert s.near_miss.numerator == want["near_miss"]
            assert s.rollback_rate.numerator == want["rollbacks"]
            assert s.rollback_ai_agree.numerator == want["rollback_ai_agree"]
            assert s.escalation_rate.numerator == want["escalations"]
            assert s.contradiction_rate.numerator == want["contradictions"]
