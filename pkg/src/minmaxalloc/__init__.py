"""Online min-max resource allocation: relinquish-based re-allocation,
baseline policies, a wireless delay simulator, and a service/CLI front end."""

from .baselines import (
    BaselineState,
    dynamic_opt,
    equal_step,
    fkm_step,
    ocg_step,
    ogd_step,
    omd_step,
    project_feasible,
    subgradient_max,
)
from .config import ScenarioConfig, SweepConfig
from .core import (
    Allocation,
    CostFunction,
    CostVector,
    evaluate_global,
    inverse_cost,
)
from .dora import (
    DoraState,
    UpdateDirection,
    agent_update,
    dora_round,
    server_reallocate,
    update_direction,
)
from .sim import (
    RoundRecord,
    RunResult,
    RunSummary,
    check_relinquish_properties,
    check_gap_direction_bound,
    dynamic_regret,
    path_length,
    regret_bound,
    run,
)

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "BaselineState",
    "CostFunction",
    "CostVector",
    "DoraState",
    "RoundRecord",
    "RunResult",
    "RunSummary",
    "ScenarioConfig",
    "SweepConfig",
    "UpdateDirection",
    "agent_update",
    "check_relinquish_properties",
    "check_gap_direction_bound",
    "dora_round",
    "dynamic_opt",
    "dynamic_regret",
    "equal_step",
    "evaluate_global",
    "fkm_step",
    "inverse_cost",
    "ocg_step",
    "ogd_step",
    "omd_step",
    "path_length",
    "project_feasible",
    "regret_bound",
    "run",
    "server_reallocate",
    "subgradient_max",
    "update_direction",
]
