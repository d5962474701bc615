"""Pydantic request/response models for the session service."""
from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class RubricQuestionView(BaseModel):
    id: str
    text: str
    is_overall_success: bool


class AssignmentViewModel(BaseModel):
    rollout_index: int
    blinded_label: str
    ic_id: int
    ic_description: str
    reference_image: Optional[str] = None
    rubric: list[RubricQuestionView]


class NextResponse(BaseModel):
    complete: bool
    assignment: Optional[AssignmentViewModel] = None
    progress: "ProgressModel"


class ProgressModel(BaseModel):
    completed: int
    total: int
    blinded: bool


class CreateSessionRequest(BaseModel):
    task: dict
    policies: list[str]
    repetitions: int = Field(ge=1)
    seed: int = 0


class CreateSessionResponse(BaseModel):
    session_id: str
    total_rollouts: int


class RubricSubmission(BaseModel):
    answers: dict[str, bool]
    failure_note: str = ""
    amend: bool = False


class SubmitResponse(BaseModel):
    ok: bool
    progress: ProgressModel


class FinalizeRequest(BaseModel):
    force: bool = False


class FinalizeResponse(BaseModel):
    plan: dict
    rubric_counts: dict
    success_counts: dict
    comparisons: list[dict]
    excluded_rollouts: list[int]


class ErrorBody(BaseModel):
    error: str
    detail: str
