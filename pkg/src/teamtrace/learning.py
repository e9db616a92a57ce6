"""Learning and readiness metrics: what changed over time.

Calibration gap (confidence vs. final-decision correctness), the reliance
slope trajectory across blocks, retention across sessions, transfer across
tasks, and time-to-calibration (when the rolling reliance slope stabilizes
near its terminal value). Trajectory metrics are order-dependent by design and
expect a single participant's ordered trace.
"""

from __future__ import annotations

from typing import Mapping, NamedTuple, Optional, Sequence

from .records import BlockScheme, Trace, block_bounds

#: Metrics compared across sessions by default.
RETENTION_METRICS = ("calibration_gap", "reliance_slope")
#: Metrics compared across task pairs by default.
TRANSFER_METRICS = ("acc_team", "reliance_slope")


class BlockSlope(NamedTuple):
    block: int
    label: Optional[str]  # block_id for by_label blocking
    slope: Optional[float]  # absent when the block lacks correct-AI or wrong-AI records


class MetricDiff(NamedTuple):
    metric: str
    left: str  # session or task key
    right: str
    diff: Optional[float]  # |left - right|, absent when either side is absent


def calibration_gap(trace: Trace) -> tuple[Optional[float], int]:
    """Mean |confidence - correctness| over records that report confidence.

    Returns (gap, contributing count); the gap is absent when no record
    carries confidence. For binary confidences this is the fraction of records
    where confidence disagrees with final-decision correctness.
    """
    total = 0.0
    count = 0
    for c, y, h1 in zip(
        trace.column("confidence"), trace.column("ground_truth"), trace.column("human_final")
    ):
        if c is not None:
            total += abs(c - (1.0 if h1 == y else 0.0))
            count += 1
    return (total / count if count else None, count)


def slope_trajectory(
    trace: Trace, scheme: BlockScheme
) -> tuple[list[BlockSlope], Optional[float]]:
    """Per-block reliance slopes and the change from first to last defined block.

    Blocks lacking correct-AI or wrong-AI records carry an absent slope. The
    slope change is last defined minus first defined, absent when fewer than
    two blocks have defined slopes.
    """
    y_col = trace.column("ground_truth")
    a_col = trace.column("ai_prediction")
    h1_col = trace.column("human_final")
    slopes = []
    for index, label, start, stop in block_bounds(trace, scheme):
        c_n = c_a = w_n = w_a = 0
        for i in range(start, stop):
            if a_col[i] == y_col[i]:
                c_n += 1
                c_a += h1_col[i] == a_col[i]
            else:
                w_n += 1
                w_a += h1_col[i] == a_col[i]
        slope = c_a / c_n - w_a / w_n if c_n and w_n else None
        slopes.append(BlockSlope(index, label, slope))
    defined = [s.slope for s in slopes if s.slope is not None]
    delta = defined[-1] - defined[0] if len(defined) >= 2 else None
    return slopes, delta


def retention(
    session_summaries: Sequence[tuple[str, Mapping[str, Optional[float]]]],
    metrics: Sequence[str] = RETENTION_METRICS,
) -> tuple[list[MetricDiff], Optional[str]]:
    """Absolute differences of each metric between adjacent sessions.

    ``session_summaries`` is ordered by session key. Pairs where either side is
    absent are reported with an absent diff. With fewer than two sessions the
    list is empty and a diagnostic says why.
    """
    if len(session_summaries) < 2:
        return [], f"retention needs at least 2 sessions, got {len(session_summaries)}"
    diffs = []
    for (left_key, left), (right_key, right) in zip(session_summaries, session_summaries[1:]):
        for m in metrics:
            lv, rv = left.get(m), right.get(m)
            diff = abs(lv - rv) if lv is not None and rv is not None else None
            diffs.append(MetricDiff(m, left_key, right_key, diff))
    return diffs, None


def transfer(
    task_summaries: Mapping[str, Mapping[str, Optional[float]]],
    metrics: Sequence[str] = TRANSFER_METRICS,
    pairs: Optional[Sequence[tuple[str, str]]] = None,
) -> list[MetricDiff]:
    """Absolute differences of each metric across task pairs.

    Defaults to all unordered task pairs in sorted order. Naming an unknown
    task raises ValueError. Absent values propagate to absent diffs.
    """
    tasks = sorted(task_summaries)
    if pairs is None:
        pairs = [(a, b) for i, a in enumerate(tasks) for b in tasks[i + 1 :]]
    diffs = []
    for a, b in pairs:
        for t in (a, b):
            if t not in task_summaries:
                raise ValueError(f"unknown task {t!r}; have {tasks}")
        for m in metrics:
            lv, rv = task_summaries[a].get(m), task_summaries[b].get(m)
            diff = abs(lv - rv) if lv is not None and rv is not None else None
            diffs.append(MetricDiff(m, a, b, diff))
    return diffs


def rolling_slopes(trace: Trace, window: int) -> list[Optional[float]]:
    """Reliance slope over each rolling window [j, j+window), j = 0..N-window.

    Incremental exact counts; entry j is absent when that window lacks
    correct-AI or wrong-AI records. Empty when the trace is shorter than the
    window.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    y_col = trace.column("ground_truth")
    a_col = trace.column("ai_prediction")
    h1_col = trace.column("human_final")
    n = len(y_col)
    if n < window:
        return []
    ai_ok = [a == y for a, y in zip(a_col, y_col)]
    agree = [h1 == a for h1, a in zip(h1_col, a_col)]

    c_n = c_a = w_n = w_a = 0
    out: list[Optional[float]] = []
    for j in range(n):
        if ai_ok[j]:
            c_n += 1
            c_a += agree[j]
        else:
            w_n += 1
            w_a += agree[j]
        if j >= window:
            k = j - window
            if ai_ok[k]:
                c_n -= 1
                c_a -= agree[k]
            else:
                w_n -= 1
                w_a -= agree[k]
        if j >= window - 1:
            out.append(c_a / c_n - w_a / w_n if c_n and w_n else None)
    return out


def time_to_calibration(
    trace: Trace, window: int = 20, epsilon: float = 0.05, stability: int = 3
) -> Optional[int]:
    """Earliest window start from which ``stability`` consecutive rolling
    windows all have defined slopes within ``epsilon`` of the final window's
    slope. Absent when the trace is shorter than the window, the final window's
    slope is undefined, or no such run exists.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    if stability < 1:
        raise ValueError(f"stability must be >= 1, got {stability}")
    slopes = rolling_slopes(trace, window)
    if not slopes:
        return None
    target = slopes[-1]
    if target is None:
        return None
    run = 0
    for j, s in enumerate(slopes):
        if s is not None and abs(s - target) <= epsilon:
            run += 1
            if run >= stability:
                return j - stability + 1
        else:
            run = 0
    return None
