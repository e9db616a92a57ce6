from __future__ import annotations

import random

import pytest

from teamtrace import (
    calibration_gap,
    retention,
    rolling_slopes,
    slope_trajectory,
    time_to_calibration,
    transfer,
)
from util import T1_ROWS, make_trace, random_trace, t1_trace

import naive_metrics

# Reliance slope building blocks: correct-AI accepted/rejected, wrong-AI accepted/rejected.
CA = ("1", "1", "1", "1")
CR = ("1", "1", "1", "0")
WA = ("1", "1", "0", "0")
WR = ("1", "1", "0", "1")


class TestCalibrationGap:
    def test_t1_with_stated_confidence(self, t1_confident):
        gap, count = calibration_gap(t1_confident)
        assert gap == pytest.approx(1 / 6)
        assert count == 6

    def test_perfectly_calibrated_binary(self):
        rows = [("1", "1", "1", "1"), ("1", "1", "0", "0"), ("0", "0", "1", "0")]
        correctness = [1.0, 0.0, 1.0]
        trace = make_trace(rows, confidence=correctness)
        gap, count = calibration_gap(trace)
        assert gap == 0.0
        assert count == 3

    def test_half_confidence_everywhere(self):
        trace = make_trace(T1_ROWS, confidence=[0.5] * 6)
        gap, _ = calibration_gap(trace)
        assert gap == 0.5

    def test_absent_without_confidence(self, t1):
        gap, count = calibration_gap(t1)
        assert gap is None
        assert count == 0

    def test_partial_coverage_counts(self):
        trace = make_trace(T1_ROWS, confidence=[0.5, None, None, 0.5, None, None])
        gap, count = calibration_gap(trace)
        assert count == 2
        assert gap == 0.5

    def test_permutation_invariant(self):
        rng = random.Random(31)
        trace = random_trace(rng, n=40)
        idx = list(range(40))
        rng.shuffle(idx)
        a = calibration_gap(trace)
        b = calibration_gap(trace.take(idx))
        assert a[1] == b[1]
        if a[0] is not None:
            assert a[0] == pytest.approx(b[0])


# Block with slope 0.1: |C|=5 accept 3, |W|=4 accept 2 -> 0.6 - 0.5
BLOCK_SLOPE_01 = [CA, CA, CA, CR, CR, WA, WA, WR, WR]
# Block with slope 0.6: |C|=5 accept 4, |W|=5 accept 1 -> 0.8 - 0.2
BLOCK_SLOPE_06 = [CA, CA, CA, CA, CR, WA, WR, WR, WR, WR]
# Block with slope 0.2: |C|=5 accept 3, |W|=5 accept 2 -> 0.6 - 0.4
BLOCK_SLOPE_02 = [CA, CA, CA, CR, CR, WA, WA, WR, WR, WR]
# Block with slope 0.4: |C|=5 accept 4, |W|=5 accept 2 -> 0.8 - 0.4
BLOCK_SLOPE_04 = [CA, CA, CA, CA, CR, WA, WA, WR, WR, WR]


class TestSlopeTrajectory:
    def test_single_block_has_no_delta(self, t1):
        slopes, delta = slope_trajectory(t1, 10)
        assert len(slopes) == 1
        assert slopes[0].slope == 0.0
        assert delta is None

    def test_two_blocks_hand_counted(self):
        rows = BLOCK_SLOPE_01 + BLOCK_SLOPE_06
        labels = ["b1"] * len(BLOCK_SLOPE_01) + ["b2"] * len(BLOCK_SLOPE_06)
        trace = make_trace(rows, block_id=labels)
        slopes, delta = slope_trajectory(trace, "by_label")
        assert [s.label for s in slopes] == ["b1", "b2"]
        assert slopes[0].slope == pytest.approx(0.1)
        assert slopes[1].slope == pytest.approx(0.6)
        assert delta == pytest.approx(0.5)

    def test_first_and_last_defined_rule(self):
        all_correct = [CA] * 4  # no wrong-AI records: slope absent
        rows = all_correct + BLOCK_SLOPE_02 + BLOCK_SLOPE_04
        labels = ["a"] * 4 + ["b"] * 10 + ["c"] * 10
        trace = make_trace(rows, block_id=labels)
        slopes, delta = slope_trajectory(trace, "by_label")
        assert slopes[0].slope is None
        assert slopes[1].slope == pytest.approx(0.2)
        assert slopes[2].slope == pytest.approx(0.4)
        assert delta == pytest.approx(0.2)

    def test_matches_per_block_conditional_reliance(self):
        from teamtrace import conditional_reliance, split_blocks

        rng = random.Random(32)
        for _ in range(20):
            trace = random_trace(rng, n=rng.randint(1, 60))
            size = rng.choice((1, 3, 10))
            slopes, _ = slope_trajectory(trace, size)
            for block, got in zip(split_blocks(trace, size), slopes):
                assert got.slope == conditional_reliance(block.trace).reliance_slope

    def test_bad_scheme_propagates(self, t1):
        with pytest.raises(ValueError):
            slope_trajectory(t1, 0)


class TestRetention:
    def test_adjacent_diffs(self):
        sessions = [
            ("s1", {"calibration_gap": 0.30}),
            ("s2", {"calibration_gap": 0.25}),
            ("s3", {"calibration_gap": 0.25}),
        ]
        diffs, note = retention(sessions, metrics=("calibration_gap",))
        assert note is None
        assert [d.diff for d in diffs] == [pytest.approx(0.05), pytest.approx(0.0)]
        assert [(d.left, d.right) for d in diffs] == [("s1", "s2"), ("s2", "s3")]

    def test_single_session_diagnostic(self):
        diffs, note = retention([("s1", {"calibration_gap": 0.1})])
        assert diffs == []
        assert "at least 2 sessions" in note

    def test_absent_values_propagate(self):
        sessions = [
            ("s1", {"reliance_slope": 0.2}),
            ("s2", {"reliance_slope": None}),
            ("s3", {"reliance_slope": 0.5}),
        ]
        diffs, _ = retention(sessions, metrics=("reliance_slope",))
        assert [d.diff for d in diffs] == [None, None]

    def test_default_metrics(self):
        sessions = [
            ("s1", {"calibration_gap": 0.3, "reliance_slope": 0.1}),
            ("s2", {"calibration_gap": 0.2, "reliance_slope": 0.4}),
        ]
        diffs, _ = retention(sessions)
        assert {d.metric for d in diffs} == {"calibration_gap", "reliance_slope"}


class TestTransfer:
    def test_two_tasks(self):
        diffs = transfer(
            {"A": {"acc_team": 0.8}, "B": {"acc_team": 0.7}}, metrics=("acc_team",)
        )
        (d,) = diffs
        assert d.diff == pytest.approx(0.1)
        assert (d.left, d.right) == ("A", "B")

    def test_identical_tasks(self):
        summaries = {"A": {"acc_team": 0.8}, "B": {"acc_team": 0.8}}
        (d,) = transfer(summaries, metrics=("acc_team",))
        assert d.diff == 0.0

    def test_three_tasks_give_three_pairs(self):
        summaries = {t: {"acc_team": 0.5} for t in ("A", "B", "C")}
        diffs = transfer(summaries, metrics=("acc_team",))
        assert [(d.left, d.right) for d in diffs] == [("A", "B"), ("A", "C"), ("B", "C")]

    def test_unknown_task_rejected(self):
        with pytest.raises(ValueError, match="unknown task"):
            transfer({"A": {}}, pairs=[("A", "Z")])

    def test_absent_propagates(self):
        (d,) = transfer(
            {"A": {"acc_team": None}, "B": {"acc_team": 0.7}}, metrics=("acc_team",)
        )
        assert d.diff is None


class TestRollingSlopes:
    def test_matches_naive(self):
        rng = random.Random(33)
        for _ in range(20):
            trace = random_trace(rng, n=rng.randint(1, 80))
            for window in (1, 3, 7):
                assert rolling_slopes(trace, window) == naive_metrics.rolling_slopes(
                    trace.records, window
                )

    def test_short_trace_empty(self, t1):
        assert rolling_slopes(t1, 10) == []


class TestTimeToCalibration:
    def test_constant_behavior_stabilizes_at_zero(self):
        trace = make_trace([CA, WR] * 20)  # deterministic, slope 1 in every window
        assert time_to_calibration(trace, window=4, epsilon=0.05, stability=3) == 0

    def test_trace_shorter_than_window_absent(self, t1):
        assert time_to_calibration(t1, window=10) is None

    def test_matches_naive_on_random_traces(self):
        rng = random.Random(34)
        for _ in range(30):
            trace = random_trace(rng, n=rng.randint(1, 80))
            for window, k in ((3, 1), (5, 2), (5, 3)):
                got = time_to_calibration(trace, window=window, epsilon=0.05, stability=k)
                want = naive_metrics.time_to_calibration(trace.records, window, 0.05, k)
                assert got == want

    def test_deterministic_step_monotonicity(self):
        # Wrong-AI advice accepted before the change point, rejected after it;
        # delaying the change by d shifts the stabilization index by exactly d.
        def step_trace(change: int, n: int = 120):
            rows = [(CA if i % 2 == 0 else (WA if i < change else WR)) for i in range(n)]
            return make_trace(rows)

        base = time_to_calibration(step_trace(40), window=10, epsilon=0.05, stability=3)
        later = time_to_calibration(step_trace(46), window=10, epsilon=0.05, stability=3)
        assert later - base == 6

    def test_parameter_validation(self, t1):
        with pytest.raises(ValueError):
            time_to_calibration(t1, window=0)
        with pytest.raises(ValueError):
            time_to_calibration(t1, window=5, epsilon=-1.0)
        with pytest.raises(ValueError):
            time_to_calibration(t1, window=5, stability=0)

    def test_undefined_final_window_absent(self):
        # last window is all correct-AI records: no terminal slope to anchor on
        rows = [WA, CA] * 3 + [CA] * 6
        trace = make_trace(rows)
        assert time_to_calibration(trace, window=6, epsilon=0.05, stability=1) is None
