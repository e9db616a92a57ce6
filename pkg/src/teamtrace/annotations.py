"""Static metric metadata: families, lifecycle stages, and design-action hints.

Every metric the engine reports is tagged with its family, the onboarding
lifecycle stage where it is observable and actionable (Understand, Control,
Improve, or a combination), and a short hint for what to do when the value
looks bad. This table is fixed guidance attached to reports, not computed
output. MANIFEST lists the core metric names that every report must contain
exactly once; update_asymmetry and time_to_calibration are additional
engine outputs with the same tagging.
"""

from __future__ import annotations

from typing import NamedTuple

OUTCOME = "outcome"
RELIANCE = "reliance_interaction"
SAFETY = "safety_harm"
LEARNING = "learning_readiness"

FAMILY_TITLES = {
    OUTCOME: "Outcome (What happened?)",
    RELIANCE: "Reliance & Interaction (How was AI used?)",
    SAFETY: "Safety & Harm (What went wrong?)",
    LEARNING: "Learning & Readiness (What changed over time?)",
}

UNDERSTAND = "Understand"
CONTROL = "Control"
IMPROVE = "Improve"
UNDERSTAND_CONTROL = "Understand+Control"
CONTROL_IMPROVE = "Control+Improve"
UNDERSTAND_IMPROVE = "Understand+Improve"

STAGES = (UNDERSTAND, CONTROL, IMPROVE, UNDERSTAND_CONTROL, CONTROL_IMPROVE, UNDERSTAND_IMPROVE)


class Annotation(NamedTuple):
    family: str
    display: str
    stage: str
    hint: str


METRIC_ANNOTATIONS: dict[str, Annotation] = {
    # Outcome: what happened
    "acc_h0": Annotation(OUTCOME, "Human accuracy", IMPROVE,
                         "Baseline for team gain; revisit delegation if the team cannot beat it."),
    "acc_ai": Annotation(OUTCOME, "AI accuracy", IMPROVE,
                         "Baseline for team gain; compare against team accuracy before adjusting autonomy."),
    "acc_team": Annotation(OUTCOME, "Team accuracy", IMPROVE,
                           "Adjust delegation policy and route high-risk cases to human review."),
    "gain_vs_human": Annotation(OUTCOME, "Team gain vs human", IMPROVE,
                                "If negative, AI involvement degrades outcomes; rework the workflow."),
    "gain_vs_ai": Annotation(OUTCOME, "Team gain vs AI", IMPROVE,
                             "If negative, human edits hurt; reconsider when to defer."),
    "acc_oracle": Annotation(OUTCOME, "Oracle best accuracy", IMPROVE,
                             "Reference upper bound separating model limits from collaboration failures."),
    "regret_best": Annotation(OUTCOME, "Regret (best)", IMPROVE,
                              "Target training on cases where one agent was right but the team failed."),
    # Reliance & interaction: how the AI was used
    "accept_on_correct": Annotation(RELIANCE, "Accept-on-correct", UNDERSTAND_CONTROL,
                                    "If low, beneficial reliance is missing; add reliability cues."),
    "accept_on_wrong": Annotation(RELIANCE, "Accept-on-wrong", UNDERSTAND_CONTROL,
                                  "Curate failure sets, add regions-of-no-use, require second checks on risky acceptance."),
    "reject_on_correct": Annotation(RELIANCE, "Reject-on-correct", UNDERSTAND_CONTROL,
                                    "Unnecessary rejection; improve when-to-trust instruction."),
    "reject_on_wrong": Annotation(RELIANCE, "Reject-on-wrong", UNDERSTAND_CONTROL,
                                  "If low, users cannot spot failures; practice on curated failure sets."),
    "reliance_slope": Annotation(RELIANCE, "Reliance slope", UNDERSTAND,
                                 "If low, strengthen training on discriminating correct from incorrect AI."),
    "changed": Annotation(RELIANCE, "Changed", UNDERSTAND_CONTROL,
                          "Expose boundary conditions in training; review advice timing."),
    "changed_to_right": Annotation(RELIANCE, "Changed-to-right", UNDERSTAND_CONTROL,
                                   "Beneficial flips; preserve whatever advice presentation drives them."),
    "changed_to_wrong": Annotation(RELIANCE, "Changed-to-wrong", UNDERSTAND_CONTROL,
                                   "Harmful flips; rework advice timing and add counterfactual practice."),
    "intervention_latency": Annotation(RELIANCE, "Intervention latency", CONTROL,
                                       "Tune interaction costs; add pause-and-check for risky cases; streamline overrides."),
    "update_asymmetry": Annotation(RELIANCE, "Update asymmetry", UNDERSTAND,
                                   "Local-only updates mean failures do not revise the mental model; revisit feedback design."),
    # Safety & harm: what went wrong
    "ai_help": Annotation(SAFETY, "AI-help", CONTROL_IMPROVE,
                          "Error recovery; compare with AI-harm before changing autonomy."),
    "ai_harm": Annotation(SAFETY, "AI-harm", CONTROL_IMPROVE,
                          "Add guardrails and limit deferral where advice induces harm; fix harm-heavy slices first."),
    "missed_help": Annotation(SAFETY, "Missed-help", UNDERSTAND,
                              "Under-reliance; show exemplars of correct advice and calibrated confidence cues."),
    "correct_ignore": Annotation(SAFETY, "Correct-ignore", UNDERSTAND_CONTROL,
                                 "Appropriate rejection; reinforce the discrimination skills behind it."),
    "near_miss": Annotation(SAFETY, "Near-miss rate", CONTROL,
                            "Require second review and risk-based escalation for high-risk disagreements."),
    "rollback_rate": Annotation(SAFETY, "Rollback rate", CONTROL_IMPROVE,
                                "Audit contested decisions; improve contestability pathways."),
    "escalation_rate": Annotation(SAFETY, "Escalation rate", CONTROL_IMPROVE,
                                  "Check whether oversight referrals match policy expectations."),
    "contradiction_rate": Annotation(SAFETY, "Contradiction rate", CONTROL_IMPROVE,
                                     "Required actions skipped; make them salient and fix compliance gaps."),
    # Learning & readiness: what changed over time
    "calibration_gap": Annotation(LEARNING, "Calibration gap", UNDERSTAND,
                                  "Improve calibration aids; give feedback on confidence miscalibration."),
    "delta_slope": Annotation(LEARNING, "Slope change", UNDERSTAND_IMPROVE,
                              "If flat, discrimination is not improving with practice; extend training."),
    "retention": Annotation(LEARNING, "Retention", IMPROVE,
                            "Iterate the curriculum; schedule refreshers for skills that fade."),
    "transfer": Annotation(LEARNING, "Transfer", IMPROVE,
                           "Refresh onboarding for new tasks or model versions; add reliance regression checks."),
    "time_to_calibration": Annotation(LEARNING, "Time-to-calibration", UNDERSTAND_IMPROVE,
                                      "Personalize onboarding length; stop training once calibration stabilizes."),
}

#: The 28 core metrics; every report carries each exactly once.
MANIFEST: tuple[str, ...] = (
    "acc_h0", "acc_ai", "acc_team", "gain_vs_human", "gain_vs_ai", "acc_oracle", "regret_best",
    "accept_on_correct", "accept_on_wrong", "reject_on_correct", "reject_on_wrong",
    "reliance_slope", "changed", "changed_to_right", "changed_to_wrong", "intervention_latency",
    "ai_help", "ai_harm", "missed_help", "correct_ignore", "near_miss",
    "rollback_rate", "escalation_rate", "contradiction_rate",
    "calibration_gap", "delta_slope", "retention", "transfer",
)

assert len(MANIFEST) == 28 and set(MANIFEST) <= set(METRIC_ANNOTATIONS)
assert all(a.stage in STAGES for a in METRIC_ANNOTATIONS.values())
