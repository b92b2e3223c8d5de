"""Request/response schemas for the HTTP service."""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field


class TableModel(BaseModel):
    name: str
    header: list[str]
    rows: list[list[Any]]


class RunRequest(BaseModel):
    config: dict[str, Any]
    jobs: int = Field(default=1, ge=1, le=64)


class RunResponse(BaseModel):
    mode: str
    output_prefix: str
    tables: list[TableModel]
    metadata: dict[str, Any]
    summary: dict[str, Any]


class ValidateRequest(BaseModel):
    config: dict[str, Any]


class Violation(BaseModel):
    path: str
    message: str


class ValidateResponse(BaseModel):
    ok: bool
    violations: list[Violation]
    warnings: list[str]


class ParamsResponse(BaseModel):
    params: dict[str, float]
    provenance: dict[str, str]
    summary: dict[str, Any]


class HealthResponse(BaseModel):
    status: str
    version: str
