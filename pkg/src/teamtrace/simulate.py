"""Parametric human-AI team simulator and its closed-form expectations.

Generative process per case: the ground truth is uniform over the alphabet;
the AI is correct with probability p_ai, else uniform over the other labels;
the human's initial decision is correct with probability p_h, independently of
the AI; the final decision adopts the AI with probability alpha_c (AI correct)
or alpha_w (AI wrong), otherwise it keeps the initial decision. Confidence,
timing, risk, and governance fields come from their own small models. A drift
schedule can override the four rate parameters over disjoint case ranges.

Generation is a single seeded stream: identical (config, seed) yields
byte-identical traces through write_jsonl. For stationary configs,
``expected_metrics`` gives closed forms that the measured engine metrics
converge to; they serve as the statistical oracle for engine validation.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, NamedTuple, Optional, Union

from .records import Trace

_EPOCH_BASE_MS = 1_600_000_000_000
_CASE_GAP_MS = 60_000


@dataclass(frozen=True)
class DriftRange:
    """Overrides of the rate parameters over cases [start, end)."""

    start: int
    end: int
    p_ai: Optional[float] = None
    p_h: Optional[float] = None
    alpha_c: Optional[float] = None
    alpha_w: Optional[float] = None


@dataclass(frozen=True)
class ConfidenceModel:
    """Reported confidence: mean by final-decision correctness, plus uniform noise."""

    m_correct: float = 0.8
    m_wrong: float = 0.4
    noise: float = 0.1


@dataclass(frozen=True)
class LatencyModel:
    """Confirm/override latency in ms: mean with uniform jitter, floored at 0."""

    mean_ms: float = 4000.0
    jitter_ms: float = 1500.0


@dataclass(frozen=True)
class SimConfig:
    n_cases: int
    alphabet_size: int = 2
    p_ai: float = 0.7
    p_h: float = 0.6
    alpha_c: float = 0.7
    alpha_w: float = 0.3
    drift: tuple[DriftRange, ...] = ()
    confidence_model: ConfidenceModel = field(default_factory=ConfidenceModel)
    latency_model: LatencyModel = field(default_factory=LatencyModel)
    risk_high_prob: float = 0.0
    rollback_prob: float = 0.0
    escalate_prob: float = 0.0
    policy_escalate_prob: float = 0.0
    feedback_observed_prob: float = 0.0
    seed: int = 0


class ExpectedMetrics(NamedTuple):
    acc_team: float
    accept_on_correct: float
    accept_on_wrong: float
    reliance_slope: float
    ai_help: float
    ai_harm: float


_PROB_FIELDS = (
    "p_ai",
    "p_h",
    "alpha_c",
    "alpha_w",
    "risk_high_prob",
    "rollback_prob",
    "escalate_prob",
    "policy_escalate_prob",
    "feedback_observed_prob",
)


def validate_config(config: SimConfig) -> SimConfig:
    """Check all SimConfig invariants; returns the config or raises ValueError."""
    problems = []
    if config.n_cases < 1:
        problems.append(f"n_cases must be >= 1, got {config.n_cases}")
    if config.alphabet_size < 2:
        problems.append(f"alphabet_size must be >= 2, got {config.alphabet_size}")
    for name in _PROB_FIELDS:
        v = getattr(config, name)
        if not 0.0 <= v <= 1.0:
            problems.append(f"{name} must be in [0, 1], got {v}")
    if config.confidence_model.noise < 0:
        problems.append("confidence noise must be >= 0")
    for name in ("m_correct", "m_wrong"):
        v = getattr(config.confidence_model, name)
        if not 0.0 <= v <= 1.0:
            problems.append(f"confidence {name} must be in [0, 1], got {v}")
    if config.latency_model.mean_ms < 0 or config.latency_model.jitter_ms < 0:
        problems.append("latency mean and jitter must be >= 0")
    if not isinstance(config.seed, int) or isinstance(config.seed, bool):
        problems.append("seed must be an integer")
    spans = sorted((d.start, d.end) for d in config.drift)
    for d in config.drift:
        if not 0 <= d.start < d.end <= config.n_cases:
            problems.append(f"drift range [{d.start}, {d.end}) must lie within [0, {config.n_cases})")
        for name in ("p_ai", "p_h", "alpha_c", "alpha_w"):
            v = getattr(d, name)
            if v is not None and not 0.0 <= v <= 1.0:
                problems.append(f"drift {name} must be in [0, 1], got {v}")
    for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
        if s2 < e1:
            problems.append(f"drift ranges overlap at case {s2}")
    if problems:
        raise ValueError("invalid simulation config: " + "; ".join(problems))
    return config


def load_config(source: Union[str, Path, bytes, dict]) -> SimConfig:
    """Build a SimConfig from a JSON file, bytes, or an already-parsed mapping.

    Field names must match the SimConfig schema exactly; unknown keys are
    rejected so typos do not silently fall back to defaults.
    """
    if isinstance(source, (str, Path)):
        raw = json.loads(Path(source).read_text("utf-8"))
    elif isinstance(source, bytes):
        raw = json.loads(source)
    else:
        raw = dict(source)
    if not isinstance(raw, dict):
        raise ValueError("simulation config must be a JSON object")

    def build(cls, data, where):
        if not isinstance(data, dict):
            raise ValueError(f"{where} must be a JSON object")
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ValueError(f"unknown {where} field(s): {', '.join(unknown)}")
        return cls(**data)

    data = dict(raw)
    drift = tuple(build(DriftRange, d, "drift") for d in data.pop("drift", []))
    conf = build(ConfidenceModel, data.pop("confidence_model", {}), "confidence_model")
    lat = build(LatencyModel, data.pop("latency_model", {}), "latency_model")
    config = build(SimConfig, data, "config")
    config = replace(config, drift=drift, confidence_model=conf, latency_model=lat)
    return validate_config(config)


def _segments(config: SimConfig) -> list[tuple[int, int, float, float, float, float]]:
    """Contiguous case ranges with their effective (p_ai, p_h, alpha_c, alpha_w)."""
    base = (config.p_ai, config.p_h, config.alpha_c, config.alpha_w)
    bounds = {0, config.n_cases}
    for d in config.drift:
        bounds.update((d.start, d.end))
    cuts = sorted(bounds)
    segments = []
    for start, end in zip(cuts, cuts[1:]):
        params = base
        for d in config.drift:
            if d.start <= start < d.end:
                params = (
                    d.p_ai if d.p_ai is not None else base[0],
                    d.p_h if d.p_h is not None else base[1],
                    d.alpha_c if d.alpha_c is not None else base[2],
                    d.alpha_w if d.alpha_w is not None else base[3],
                )
                break
        segments.append((start, end, *params))
    return segments


def simulate_trace(config: SimConfig) -> Trace:
    """Generate a synthetic decision trace; fully deterministic given the seed."""
    validate_config(config)
    rng = random.Random(config.seed)
    rand = rng.random
    randrange = rng.randrange

    k = config.alphabet_size
    labels = [str(i) for i in range(k)]
    n = config.n_cases
    cm, lm = config.confidence_model, config.latency_model
    noise, jitter = cm.noise, lm.jitter_ms

    case_id = [f"c{j:07d}" for j in range(n)]
    y_col: list[str] = []
    h0_col: list[str] = []
    a_col: list[str] = []
    h1_col: list[str] = []
    conf_col: list[float] = []
    tai_col: list[int] = []
    tf_col: list[int] = []
    risk_col: list[str] = []
    rb_col: list[bool] = []
    esc_col: list[bool] = []
    pol_col: list[Optional[str]] = []
    fb_col: list[bool] = []

    for start, end, p_ai, p_h, alpha_c, alpha_w in _segments(config):
        for j in range(start, end):
            yi = randrange(k)
            y = labels[yi]
            if rand() < p_ai:
                a = y
            else:
                wi = randrange(k - 1)
                a = labels[wi if wi < yi else wi + 1]
            if rand() < p_h:
                h0 = y
            else:
                wi = randrange(k - 1)
                h0 = labels[wi if wi < yi else wi + 1]
            adopt_p = alpha_c if a == y else alpha_w
            h1 = a if rand() < adopt_p else h0

            mean = cm.m_correct if h1 == y else cm.m_wrong
            c = mean + (rand() * 2.0 - 1.0) * noise if noise else mean
            conf = round(min(1.0, max(0.0, c)), 6)

            lat = lm.mean_ms + (rand() * 2.0 - 1.0) * jitter if jitter else lm.mean_ms
            t_ai = _EPOCH_BASE_MS + j * _CASE_GAP_MS

            y_col.append(y)
            h0_col.append(h0)
            a_col.append(a)
            h1_col.append(h1)
            conf_col.append(conf)
            tai_col.append(t_ai)
            tf_col.append(t_ai + max(0, round(lat)))
            risk_col.append("high" if rand() < config.risk_high_prob else "low")
            rb_col.append(rand() < config.rollback_prob)
            esc_col.append(rand() < config.escalate_prob)
            pol_col.append("escalate" if rand() < config.policy_escalate_prob else None)
            fb_col.append(rand() < config.feedback_observed_prob)

    columns: dict[str, list[Any]] = {
        "case_id": case_id,
        "ground_truth": y_col,
        "human_initial": h0_col,
        "ai_prediction": a_col,
        "human_final": h1_col,
        "confidence": conf_col,
        "t_ai_shown": tai_col,
        "t_final": tf_col,
        "risk": risk_col,
        "rollback": rb_col,
        "escalated": esc_col,
        "policy": pol_col,
        "feedback_observed": fb_col,
    }
    return Trace(columns, labels, {"generator": "teamtrace-sim/1", "seed": config.seed})


def expected_metrics(config: SimConfig) -> ExpectedMetrics:
    """Closed-form expectations of the measured metrics for a stationary config.

    The measured acceptance rates include coincidental agreement: a kept
    initial decision can equal the AI prediction, with chance q = 1/(K-1) when
    both are wrong. Configs with a drift schedule have no closed form and are
    rejected.
    """
    validate_config(config)
    if config.drift:
        raise ValueError("no closed form under drift")
    p_ai, p_h = config.p_ai, config.p_h
    alpha_c, alpha_w = config.alpha_c, config.alpha_w
    q = 1.0 / (config.alphabet_size - 1)

    accept_on_correct = alpha_c + (1 - alpha_c) * p_h
    accept_on_wrong = alpha_w + (1 - alpha_w) * (1 - p_h) * q
    return ExpectedMetrics(
        acc_team=p_ai * (alpha_c + (1 - alpha_c) * p_h) + (1 - p_ai) * (1 - alpha_w) * p_h,
        accept_on_correct=accept_on_correct,
        accept_on_wrong=accept_on_wrong,
        reliance_slope=accept_on_correct - accept_on_wrong,
        ai_help=(1 - p_h) * p_ai * alpha_c,
        ai_harm=p_h * (1 - p_ai) * alpha_w,
    )
