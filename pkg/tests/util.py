"""Shared builders for test traces."""

from __future__ import annotations

import random
from typing import Optional, Sequence

from teamtrace import Trace, validate_trace

BINARY = ("0", "1")


def rec(
    case_id: str,
    y: str,
    h0: str,
    a: str,
    h1: str,
    **optional,
) -> dict:
    d = {
        "case_id": case_id,
        "ground_truth": y,
        "human_initial": h0,
        "ai_prediction": a,
        "human_final": h1,
    }
    d.update(optional)
    return d


def make_trace(rows: Sequence[tuple], alphabet: Sequence[str] = BINARY, **common) -> Trace:
    """Trace from (y, h0, a, h1) tuples; extra per-record fields via ``common``
    mapping field -> sequence."""
    records = []
    for i, (y, h0, a, h1) in enumerate(rows):
        extra = {k: v[i] for k, v in common.items() if v[i] is not None}
        records.append(rec(f"c{i}", y, h0, a, h1, **extra))
    return validate_trace(records, alphabet)


# T1, the shared worked fixture: 6 binary records as (y, h0, a, h1).
T1_ROWS = [
    ("1", "1", "1", "1"),
    ("1", "0", "1", "1"),
    ("1", "1", "0", "0"),
    ("0", "1", "0", "1"),
    ("0", "0", "1", "0"),
    ("1", "0", "0", "0"),
]
T1_CONFIDENCE = (1.0, 1.0, 1.0, 0.0, 1.0, 0.0)


def t1_trace(with_confidence: bool = False, risk: Optional[Sequence[str]] = None) -> Trace:
    kwargs = {}
    if with_confidence:
        kwargs["confidence"] = T1_CONFIDENCE
    if risk is not None:
        kwargs["risk"] = risk
    return make_trace(T1_ROWS, **kwargs)


def random_trace(rng: random.Random, n: Optional[int] = None, k: Optional[int] = None) -> Trace:
    """A random valid trace with every optional field randomized.

    Built directly (not via validate_trace) so large fuzz runs stay fast; the
    construction satisfies the validation invariants.
    """
    n = n if n is not None else rng.randint(1, 200)
    k = k if k is not None else rng.randint(2, 5)
    labels = [str(i) for i in range(k)]
    cols: dict[str, list] = {f: [] for f in (
        "case_id", "ground_truth", "human_initial", "ai_prediction", "human_final",
        "confidence", "t_ai_shown", "t_final", "risk", "rollback", "escalated",
        "policy", "feedback_observed", "participant_id", "session_id", "block_id",
        "task_id", "condition_id", "model_version",
    )}
    t = 1_000_000
    for i in range(n):
        cols["case_id"].append(f"c{i:05d}")
        cols["ground_truth"].append(rng.choice(labels))
        cols["human_initial"].append(rng.choice(labels))
        cols["ai_prediction"].append(rng.choice(labels))
        cols["human_final"].append(rng.choice(labels))
        cols["confidence"].append(round(rng.random(), 4) if rng.random() < 0.7 else None)
        if rng.random() < 0.7:
            cols["t_ai_shown"].append(t)
            cols["t_final"].append(t + rng.randint(0, 60_000))
        else:
            cols["t_ai_shown"].append(None)
            cols["t_final"].append(None)
        t += rng.randint(1, 10_000)
        cols["risk"].append(rng.choice((None, "low", "medium", "high")))
        cols["rollback"].append(rng.random() < 0.1)
        cols["escalated"].append(rng.random() < 0.15)
        cols["policy"].append("escalate" if rng.random() < 0.2 else None)
        cols["feedback_observed"].append(rng.random() < 0.2)
        cols["participant_id"].append(rng.choice((None, "p1", "p2")))
        cols["session_id"].append(rng.choice((None, "s1", "s2", "s3")))
        cols["block_id"].append(rng.choice((None, "b1", "b2")))
        cols["task_id"].append(rng.choice((None, "tA", "tB")))
        cols["condition_id"].append(rng.choice((None, "control", "treatment")))
        cols["model_version"].append(rng.choice((None, "v1", "v2")))
    return Trace(cols, labels)
