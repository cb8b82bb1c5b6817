"""Request and response models for the service endpoints."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..config import ScenarioConfig, SweepConfig
from ..policies import POLICY_NAMES


class RunRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scenario: ScenarioConfig
    timing_in_csv: bool = False


class RunResponse(BaseModel):
    summary: dict[str, Any]
    csv: str
    payload: dict[str, Any]
    checks_passed: bool


class CompareRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scenario: ScenarioConfig
    policies: list[str] = Field(min_length=1)
    timing_in_csv: bool = False

    @field_validator("policies")
    @classmethod
    def _known_policies(cls, value):
        unknown = [p for p in value if p not in POLICY_NAMES]
        if unknown:
            raise ValueError(
                f"unknown policies {', '.join(unknown)}; "
                f"valid names: {', '.join(POLICY_NAMES)}"
            )
        return value


class CompareResponse(BaseModel):
    summaries: dict[str, dict[str, Any]]
    csv: str
    checks_passed: bool


class SweepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scenario: ScenarioConfig
    sweep: SweepConfig
    jobs: int = Field(default=1, ge=1)
    base_seed: Optional[int] = Field(default=None, ge=0)

    @field_validator("sweep")
    @classmethod
    def _known_policies(cls, value):
        unknown = [p for p in value.policies if p not in POLICY_NAMES]
        if unknown:
            raise ValueError(
                f"unknown policies {', '.join(unknown)}; "
                f"valid names: {', '.join(POLICY_NAMES)}"
            )
        return value


class SweepResponse(BaseModel):
    rows: list[dict[str, Any]]
    csv: str
    checks_passed: bool
