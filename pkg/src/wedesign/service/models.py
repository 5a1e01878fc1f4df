"""Pydantic request/response models for the conduct API."""

from __future__ import annotations

from pydantic import BaseModel, Field


class SafetyModel(BaseModel):
    gamma_star: float
    r: float
    theta_final: float = 0.3
    toxicity_outcome: int = 0
    scope: str = "trial"


class TestingModel(BaseModel):
    control_index: int = 0
    alpha_target: float = 0.05
    cutoff: float | None = None


class PriorModel(BaseModel):
    mode: list[float]
    beta: float


class TrialConfigModel(BaseModel):
    arms: int
    outcomes: int
    gamma: list[float]
    priors: list[PriorModel]
    max_patients: int
    kappa: float = 0.5
    rule: str = "rule2"
    safety: SafetyModel | None = None
    testing: TestingModel | None = None
    seed: int = 0
    success_outcome: int = 1
    experimental_low_kappa: bool = False


class OutcomeRequest(BaseModel):
    arm: int
    outcome: int
    idempotency_key: str | None = Field(default=None, max_length=128)


class ArmView(BaseModel):
    index: int
    n: int
    counts: list[int]
    posterior_mode: list[float]
    delta: float
    delta_final: float
    admissible: bool
    selection_probability: float | None = None
    safety_threshold: float | None = None
    overdose_probability: float | None = None


class NextPreview(BaseModel):
    kind: str
    arm: int | None = None
    probabilities: list[float] | None = None


class SessionView(BaseModel):
    id: str
    status: str
    seq: int
    patients_treated: int
    max_patients: int
    rule: str
    kappa: float
    gamma: list[float]
    pending_assignment: int | None = None
    recommendation: int | None = None
    recommended: bool
    arms: list[ArmView]
    next_preview: NextPreview
    hypothetical: bool = False


class AssignmentResponse(BaseModel):
    kind: str  # "assign" | "terminate"
    arm: int | None = None
    view: SessionView


class RecommendationResponse(BaseModel):
    recommendation: int | None
    terminated: bool
    view: SessionView


class ErrorBody(BaseModel):
    code: str
    message: str
    field: str | None = None
