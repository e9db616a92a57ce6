from __future__ import annotations

import random

import pytest

from teamtrace import (
    Ratio,
    conditional_reliance,
    decision_changes,
    intervention_latency,
    update_asymmetry,
    validate_trace,
)
from util import BINARY, T1_ROWS, make_trace, random_trace, rec

import naive_metrics


class TestConditionalReliance:
    def test_t1_sets_and_rates(self, t1):
        s = conditional_reliance(t1)
        assert s.accept_on_correct == Ratio(2, 3)
        assert s.accept_on_wrong == Ratio(2, 3)
        assert s.reject_on_correct == Ratio(1, 3)
        assert s.reject_on_wrong == Ratio(1, 3)
        assert s.reliance_slope == 0.0

    def test_blind_adoption(self):
        rows = [("1", "0", "1", "1"), ("0", "1", "1", "1"), ("1", "1", "0", "0")]
        s = conditional_reliance(make_trace(rows))
        assert s.accept_on_correct.value == 1.0
        assert s.accept_on_wrong.value == 1.0
        assert s.reliance_slope == 0.0

    def test_always_correct_ai_leaves_wrong_set_empty(self):
        rows = [("1", "1", "1", "1"), ("0", "1", "0", "0")]
        s = conditional_reliance(make_trace(rows))
        assert s.accept_on_wrong.denominator == 0
        assert s.accept_on_wrong.value is None
        assert s.reliance_slope is None

    def test_complementarity_counts(self):
        rng = random.Random(11)
        for _ in range(50):
            s = conditional_reliance(random_trace(rng, n=rng.randint(1, 60)))
            assert s.accept_on_correct.numerator + s.reject_on_correct.numerator == s.accept_on_correct.denominator
            assert s.accept_on_wrong.numerator + s.reject_on_wrong.numerator == s.accept_on_wrong.denominator

    def test_mirror_trace_negates_slope(self):
        # flipping the binary ground truth swaps the C and W sets
        rng = random.Random(12)
        for _ in range(30):
            trace = random_trace(rng, n=rng.randint(2, 60), k=2)
            slope = conditional_reliance(trace).reliance_slope
            flipped_y = ["1" if y == "0" else "0" for y in trace.column("ground_truth")]
            mirror = make_trace(
                list(zip(flipped_y, trace.column("human_initial"),
                         trace.column("ai_prediction"), trace.column("human_final"))),
            )
            mirror_slope = conditional_reliance(mirror).reliance_slope
            if slope is not None and mirror_slope is not None:
                assert mirror_slope == pytest.approx(-slope)

    def test_permutation_invariance(self):
        rng = random.Random(13)
        trace = random_trace(rng, n=30)
        idx = list(range(30))
        rng.shuffle(idx)
        assert conditional_reliance(trace.take(idx))[:8] == conditional_reliance(trace)[:8]


class TestDecisionChanges:
    def test_t1(self, t1):
        s = decision_changes(t1)
        assert s.changed == Ratio(2, 6)
        assert s.changed_to_right == Ratio(1, 6)
        assert s.changed_to_wrong == Ratio(1, 6)

    def test_no_changes(self):
        rows = [("1", "1", "0", "1"), ("0", "0", "1", "0")]
        s = decision_changes(make_trace(rows))
        assert s.changed == Ratio(0, 2)
        assert s.changed_to_right == Ratio(0, 2)
        assert s.changed_to_wrong == Ratio(0, 2)

    def test_wrong_to_wrong_change_in_three_class_task(self):
        trace = make_trace([("A", "B", "C", "C")], alphabet=("A", "B", "C"))
        s = decision_changes(trace)
        assert s.changed == Ratio(1, 1)
        assert s.changed_to_right == Ratio(0, 1)
        assert s.changed_to_wrong == Ratio(0, 1)


class TestInterventionLatency:
    def test_simple_mean(self):
        trace = make_trace(
            T1_ROWS[:3],
            t_ai_shown=[1000, 2000, 3000],
            t_final=[2000, 4000, 6000],
        )
        mean, count = intervention_latency(trace)
        assert mean == 2000.0
        assert count == 3

    def test_no_timestamps(self, t1):
        mean, count = intervention_latency(t1)
        assert mean is None
        assert count == 0

    def test_mixed_timestamps(self):
        trace = make_trace(
            T1_ROWS[:5],
            t_ai_shown=[1000, None, 5000, None, None],
            t_final=[1500, None, 6500, None, None],
        )
        mean, count = intervention_latency(trace)
        assert mean == 1000.0
        assert count == 2


def asymmetry_fixture(post_late_accepts: bool, window: int = 5):
    """Wrong-AI records throughout: accept pre-exposure, reject in the early
    window, then accept again (revert) or keep rejecting (persist)."""
    rows = []
    fb = []
    # pre: 5 wrong-AI cases, all accepted (accept-on-wrong = 1)
    for _ in range(5):
        rows.append(("1", "1", "0", "0"))
        fb.append(False)
    # exposure: wrong-AI case with feedback
    rows.append(("1", "1", "0", "0"))
    fb.append(True)
    # post_early: W wrong-AI cases, all rejected (accept-on-wrong = 0)
    for _ in range(window):
        rows.append(("1", "1", "0", "1"))
        fb.append(False)
    # post_late: W wrong-AI cases
    for _ in range(window):
        rows.append(("1", "1", "0", "0" if post_late_accepts else "1"))
        fb.append(False)
    return make_trace(rows, feedback_observed=fb)


class TestUpdateAsymmetry:
    def test_no_exposure(self, t1):
        report = update_asymmetry(t1, window=5, epsilon=0.05)
        assert report.classification == "no_exposure"
        assert report.exposure_index is None
        assert report.pre is None and report.post_early is None and report.post_late is None

    def test_global_update(self):
        trace = asymmetry_fixture(post_late_accepts=False)
        report = update_asymmetry(trace, window=5, epsilon=0.05)
        assert report.exposure_index == 5
        assert report.pre.accept_on_wrong.value == 1.0
        assert report.post_early.accept_on_wrong.value == 0.0
        assert report.post_late.accept_on_wrong.value == 0.0
        assert report.persistence == 1.0
        assert report.classification == "global"

    def test_local_update(self):
        trace = asymmetry_fixture(post_late_accepts=True)
        report = update_asymmetry(trace, window=5, epsilon=0.05)
        assert report.post_late.accept_on_wrong.value == 1.0
        assert report.persistence == 0.0
        assert report.classification == "local"

    def test_matches_naive(self):
        for post_late_accepts in (True, False):
            trace = asymmetry_fixture(post_late_accepts)
            got = update_asymmetry(trace, window=5, epsilon=0.05)
            want = naive_metrics.update_asymmetry(trace.records, 5, 0.05)
            assert got.exposure_index == want["exposure"]
            assert got.classification == want["classification"]
            assert got.persistence == want["persistence"]

    def test_exposure_at_first_record_lacks_pre_window(self):
        rows = [("1", "1", "0", "0")] * 12
        trace = make_trace(rows, feedback_observed=[True] + [False] * 11)
        report = update_asymmetry(trace, window=5, epsilon=0.05)
        assert report.exposure_index == 0
        assert report.classification == "insufficient_data"
        assert report.persistence is None

    def test_small_early_effect_is_insufficient(self):
        # behavior never changes: accept everywhere
        rows = [("1", "1", "0", "0")] * 20
        trace = make_trace(rows, feedback_observed=[False] * 5 + [True] + [False] * 14)
        report = update_asymmetry(trace, window=5, epsilon=0.05)
        assert report.classification == "insufficient_data"
        assert report.early_effect == 0.0
        assert report.persistence is None

    def test_parameter_validation(self, t1):
        with pytest.raises(ValueError, match="window"):
            update_asymmetry(t1, window=0)
        with pytest.raises(ValueError, match="epsilon"):
            update_asymmetry(t1, window=5, epsilon=0.0)

    def test_order_dependence(self):
        trace = asymmetry_fixture(post_late_accepts=False)
        reversed_trace = trace.take(list(range(len(trace) - 1, -1, -1)))
        a = update_asymmetry(trace, window=5, epsilon=0.05)
        b = update_asymmetry(reversed_trace, window=5, epsilon=0.05)
        assert a.classification != b.classification or a.exposure_index != b.exposure_index


def test_changed_split_cross_module_identity():
    rng = random.Random(14)
    for _ in range(50):
        trace = random_trace(rng, n=rng.randint(1, 60))
        s = decision_changes(trace)
        counts = naive_metrics.counts(trace.records)
        assert s.changed_to_right.numerator == counts["ai_help"]
        assert s.changed_to_wrong.numerator == counts["ai_harm"]
        assert s.changed_to_right.numerator + s.changed_to_wrong.numerator <= s.changed.numerator
