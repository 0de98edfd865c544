"""Pydantic request/response models for the service API."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

ExpertType = Literal["perfect", "online", "random", "adversarial", "dummy", "scripted"]


class InstanceModel(BaseModel):
    n: int
    costs: list[float]
    rows: list[list[float]]
    meta: dict = Field(default_factory=dict)


class RosterEntryModel(BaseModel):
    type: ExpertType
    seed: int | None = None
    predictions: list[list[float]] | None = None  # scripted: one vector per step


class GenerateRequest(BaseModel):
    family: Literal["random", "mwa-worst", "anand"]
    params: dict = Field(default_factory=dict)
    seed: int | None = None


class GenerateResponse(BaseModel):
    instance: InstanceModel
    # scripted expert predictions for the batched family: steps x experts x resources
    predictions: list[list[list[float]]] | None = None


class ValidateRequest(BaseModel):
    instance: InstanceModel


class ValidateResponse(BaseModel):
    ok: bool
    violations: list[str]


class RunRequest(BaseModel):
    instance: InstanceModel
    roster: list[RosterEntryModel]
    algos: list[Literal["alg", "mwa", "anand"]] = ["alg", "mwa"]
    append_dummy: bool = True
    benchmarks: bool = True
    include_trace: bool = True
    label: str | None = None


class CheckModel(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class ReportModel(BaseModel):
    label: str
    num_resources: int
    num_steps: int
    num_user_experts: int
    effective_num_experts: int | None
    discrepancy: float | None
    raw_discrepancy: float | None
    costs: dict[str, float | None]
    benchmarks: dict[str, float | None]
    ratio_constant: float
    checks: list[CheckModel]
    passed: bool


class RunResponse(BaseModel):
    report: ReportModel
    trace: list[dict] | None = None


class BenchmarkRequest(BaseModel):
    jobs: list[RunRequest]


class BenchmarkResponse(BaseModel):
    reports: list[ReportModel]
    table_markdown: str
    table_csv: str
    passed: bool


class VerifyRequest(BaseModel):
    report: ReportModel


class VerifyResponse(BaseModel):
    passed: bool
    problems: list[str]


class HealthResponse(BaseModel):
    status: str
    version: str
