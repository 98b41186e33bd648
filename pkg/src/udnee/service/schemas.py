"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field


class ScenarioEcho(BaseModel):
    params: dict[str, Any]
    non_paper_defaults: list[str]
    mu_norm: float


class AnalyticsRequest(BaseModel):
    overrides: dict[str, Any] = Field(default_factory=dict)
    t: float | None = None


class AnalyticsResponse(BaseModel):
    report: dict[str, float]
    scenario: ScenarioEcho


class CheckRequest(BaseModel):
    overrides: dict[str, Any] = Field(default_factory=dict)
    threshold: float = 100.0


class CheckResponse(BaseModel):
    report: dict[str, Any]
    scenario: ScenarioEcho


class EpisodeRequest(BaseModel):
    overrides: dict[str, Any] = Field(default_factory=dict)
    variant: Literal["full-comparison", "mf-window", "fixed-baseline"] = "mf-window"
    horizon: float | None = None
    seed: int | None = None
    fixed_tx_power: float = 0.25
    fading_mode: Literal["dynamic", "stationary"] = "dynamic"
    record_trace: bool = False


class EpisodeResponse(BaseModel):
    summary: dict[str, Any]
    variant: str
    seed: int
    horizon: float
    scenario: ScenarioEcho
    trace: list[dict[str, Any]] | None = None


class FigureRequest(BaseModel):
    overrides: dict[str, Any] = Field(default_factory=dict)
    seeds: list[int] | None = None
    horizon: float | None = None
    fading_modes: list[Literal["dynamic", "stationary"]] = Field(
        default_factory=lambda: ["dynamic"])


class SweepPayload(BaseModel):
    name: str
    columns: list[str]
    rows: list[list[Any]]
    notes: list[str]
    scenario: dict[str, Any]


class FigureResponse(BaseModel):
    results: list[SweepPayload]
    ratio: float | None = None
    proposed_longterm: float | None = None
    baseline_longterm: float | None = None
    longterm: dict[str, list[float]] | None = None


class ErrorDetail(BaseModel):
    error_type: str
    message: str
    exit_code: int
