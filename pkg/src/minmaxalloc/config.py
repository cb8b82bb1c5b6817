"""Scenario and sweep configuration models.

These are the validation boundary for config files and service requests:
unknown keys are rejected so typos in sweep definitions fail loudly.
"""

from __future__ import annotations

from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

SCHEMA_VERSION = 1

SWEEPABLE_PARAMETERS = ("bandwidth_hz", "velocity_mps", "num_agents")


class RadioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    bandwidth_hz: float = Field(default=20e6, gt=0.0)
    tx_power_w: float = Field(default=1.0, gt=0.0)
    noise_density_dbm_hz: float = -174.0
    pathloss_const_db: float = -40.0
    ref_distance_m: float = Field(default=1.0, gt=0.0)
    pathloss_exp: float = Field(default=4.0, ge=2.0)


class ArenaSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    side_m: float = Field(default=500.0, gt=0.0)
    server_xy: Optional[tuple[float, float]] = None

    def server_position(self) -> tuple[float, float]:
        if self.server_xy is not None:
            return self.server_xy
        return (self.side_m / 2.0, self.side_m / 2.0)


class ProcessingConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mode: Literal["stochastic", "trace"] = "stochastic"
    base_s: Union[float, list[float]] = 1.0
    jitter_scale_s: float = Field(default=0.05, ge=0.0)
    trace_path: Optional[str] = None

    @model_validator(mode="after")
    def _check_trace(self):
        if self.mode == "trace" and not self.trace_path:
            raise ValueError("trace mode requires trace_path")
        return self


class AgentsConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    data_size_bits: Union[float, list[float]] = 2.8e6
    velocity_mps: float = Field(default=0.0, ge=0.0)
    positions_m: Optional[list[tuple[float, float]]] = None
    processing: ProcessingConfig = ProcessingConfig()


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    num_agents: int = Field(default=5, ge=1)
    horizon: int = Field(default=470, ge=1)
    step_size: float = Field(default=0.02, gt=0.0, lt=1.0)
    algorithm: str = "dora"
    seed: int = Field(default=0, ge=0)
    bisection_tol: float = Field(default=1e-10, gt=0.0)
    checks: bool = True
    domain_floor: float = Field(default=1e-9, gt=0.0)
    fkm_delta: float = Field(default=0.05, gt=0.0)
    fkm_step_size: Optional[float] = Field(default=None, gt=0.0)
    omd_weight: Optional[float] = Field(default=None, gt=0.0)
    initial_allocation: Optional[list[float]] = None
    mobility_dt_floor_s: float = Field(default=0.1, gt=0.0)
    radio: RadioConfig = RadioConfig()
    arena: ArenaSpec = ArenaSpec()
    agents: AgentsConfig = AgentsConfig()

    @field_validator("initial_allocation")
    @classmethod
    def _check_initial(cls, value):
        if value is not None:
            if any(v < 0.0 for v in value):
                raise ValueError("initial allocation has negative shares")
            if sum(value) > 1.0 + 1e-9:
                raise ValueError("initial allocation exceeds the unit budget")
        return value

    @model_validator(mode="after")
    def _check_sizes(self):
        n = self.num_agents
        if self.initial_allocation is not None and len(self.initial_allocation) != n:
            raise ValueError("initial allocation length must equal num_agents")
        if self.agents.positions_m is not None:
            if len(self.agents.positions_m) != n:
                raise ValueError("positions_m length must equal num_agents")
            side = self.arena.side_m
            for x, y in self.agents.positions_m:
                if not (0.0 <= x <= side and 0.0 <= y <= side):
                    raise ValueError(f"position ({x}, {y}) outside the arena")
        for name in ("data_size_bits", "base_s"):
            value = (
                self.agents.data_size_bits if name == "data_size_bits"
                else self.agents.processing.base_s
            )
            if isinstance(value, list) and len(value) != n:
                raise ValueError(f"{name} list length must equal num_agents")
        if any(d <= 0.0 for d in self.per_agent_data_bits()):
            raise ValueError("data_size_bits must be positive")
        if any(b < 0.0 for b in self.per_agent_base_s()):
            raise ValueError("base_s must be non-negative")
        return self

    def per_agent_data_bits(self) -> list[float]:
        d = self.agents.data_size_bits
        return list(d) if isinstance(d, list) else [float(d)] * self.num_agents

    def per_agent_base_s(self) -> list[float]:
        b = self.agents.processing.base_s
        return list(b) if isinstance(b, list) else [float(b)] * self.num_agents


class SweepConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    parameter: Literal["bandwidth_hz", "velocity_mps", "num_agents"]
    values: list[float] = Field(min_length=1)
    repetitions: int = Field(default=1, ge=1)
    policies: list[str] = Field(default_factory=lambda: ["dora"], min_length=1)
    per_value_overrides: Optional[list[dict[str, Any]]] = None

    @model_validator(mode="after")
    def _check_overrides(self):
        if self.per_value_overrides is not None and len(self.per_value_overrides) != len(self.values):
            raise ValueError("per_value_overrides must align with values")
        return self


class ScenarioFile(BaseModel):
    """Top-level layout of a run/compare config file."""

    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1]
    scenario: ScenarioConfig


class SweepFile(BaseModel):
    """Top-level layout of a sweep config file."""

    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1]
    scenario: ScenarioConfig
    sweep: SweepConfig


def apply_sweep_value(base: ScenarioConfig, parameter: str, value: float) -> ScenarioConfig:
    """Return a copy of the scenario with one swept parameter replaced."""
    data = base.model_dump()
    if parameter == "bandwidth_hz":
        data["radio"]["bandwidth_hz"] = value
    elif parameter == "velocity_mps":
        data["agents"]["velocity_mps"] = value
    elif parameter == "num_agents":
        if value != int(value):
            raise ValueError(f"num_agents must be integral, got {value}")
        data["num_agents"] = int(value)
    else:
        raise ValueError(f"unknown sweep parameter {parameter!r}")
    return ScenarioConfig.model_validate(data)


def apply_overrides(base: ScenarioConfig, overrides: dict[str, Any]) -> ScenarioConfig:
    """Deep-merge override keys into the scenario and re-validate."""
    data = base.model_dump()
    _merge(data, overrides)
    return ScenarioConfig.model_validate(data)


def _merge(target: dict, patch: dict) -> None:
    for key, value in patch.items():
        if isinstance(value, dict) and isinstance(target.get(key), dict):
            _merge(target[key], value)
        else:
            target[key] = value
