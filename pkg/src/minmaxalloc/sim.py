"""Round-driven orchestration of the allocation message flow for any policy,
with per-round telemetry: worst-case latency, dynamic regret against the
instantaneous optimum, minimizer path length, the worst-case regret bound,
and runtime checks of the relinquish-step properties."""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

from .baselines import dynamic_opt
from .config import ScenarioConfig
from .core import Allocation, BUDGET_SLACK, evaluate_costs
from .costmodel import EdgeDelaySource
from .dora import UpdateDirection, relinquish_targets, update_direction
from .policies import Policy, initial_allocation, make_policy

CHECK_TOL = 1e-6

RUN_CSV_BASE_COLUMNS = (
    "t",
    "algorithm",
    "global_cost",
    "oracle_cost",
    "regret_cum",
    "path_length_cum",
    "straggler",
    "policy_time_s",
)


@dataclass(frozen=True)
class RoundRecord:
    round_index: int
    shares: tuple[float, ...]
    per_agent_costs: tuple[float, ...]
    global_cost: float
    straggler: int
    oracle_shares: tuple[float, ...]
    oracle_cost: float
    regret_inst: float
    regret_cum: float
    path_increment: float
    path_cum: float
    policy_time_s: float


@dataclass(frozen=True)
class RunSummary:
    algorithm: str
    seed: int
    num_agents: int
    horizon: int
    final_regret: float
    tail_window: int
    tail_avg_regret: float
    total_policy_time_s: float
    path_length: float
    lipschitz_bound: Optional[float]
    regret_bound_value: Optional[float]
    checks_enabled: bool
    check_failures: tuple[str, ...]


@dataclass(frozen=True)
class RunResult:
    config: ScenarioConfig
    records: list[RoundRecord]
    summary: RunSummary

    @property
    def checks_passed(self) -> bool:
        return not self.summary.check_failures


def dynamic_regret(records: Sequence[RoundRecord]) -> float:
    """Cumulative gap between the policy's worst costs and the oracle's."""
    return sum(r.global_cost - r.oracle_cost for r in records)


def path_length(records: Sequence[RoundRecord]) -> float:
    """Total Euclidean travel of the per-round minimizers."""
    total = 0.0
    for prev, cur in zip(records, records[1:]):
        total += math.dist(prev.oracle_shares, cur.oracle_shares)
    return total


def regret_bound(horizon: int, lipschitz: float, step_size: float, path_len: float) -> float:
    """Worst-case dynamic-regret bound for the relinquish policy:
    sqrt(T L^2 (3/(2a) + P/a + T(4+a)/2))."""
    inner = (
        3.0 / (2.0 * step_size)
        + path_len / step_size
        + horizon * (4.0 + step_size) / 2.0
    )
    return math.sqrt(horizon * lipschitz * lipschitz * inner)


def check_relinquish_properties(
    record: RoundRecord,
    targets: Sequence[float],
    tol: float = CHECK_TOL,
) -> list[bool]:
    """Five properties tying any feasible allocation, its relinquish targets,
    and the round optimum together."""
    x = record.shares
    opt = record.oracle_shares
    s = record.straggler
    c1 = x[s] <= opt[s] + tol
    c2 = all(t <= xi + tol for t, xi in zip(targets, x))
    c3 = sum(targets) <= 1.0 + tol
    c4 = all(t <= oi + tol for t, oi in zip(targets, opt))
    c5 = (
        sum((x[i] - targets[i]) * (x[i] - opt[i]) for i in range(len(x)) if i != s)
        >= -2.0 - tol
    )
    return [c1, c2, c3, c4, c5]


def check_gap_direction_bound(
    record: RoundRecord,
    direction: UpdateDirection,
    lipschitz: float,
    tol: float = CHECK_TOL,
) -> bool:
    """((f_t(x_t) - f_t(x*_t)) / L)^2 <= 2 + <G, x_t - x*_t>, within tol."""
    gap = (record.global_cost - record.oracle_cost) / lipschitz
    inner = sum(
        g * (xi - oi)
        for g, xi, oi in zip(direction.components, record.shares, record.oracle_shares)
    )
    return gap * gap <= 2.0 + inner + tol


def tail_window_length(horizon: int) -> int:
    """Averaging window for the converged regret: the final 11 rounds at the
    reference horizon of 470, scaled proportionally for other horizons."""
    return max(1, min(horizon, round(horizon * 11 / 470)))


def run(config: ScenarioConfig, cost_source=None, policy: Optional[Policy] = None) -> RunResult:
    """Simulate one scenario.  Online policies act at round t on the round
    t-1 cost functions and feedback only; round-t costs are generated after
    the decision.  Deterministic given (config, seed) apart from measured
    wall-clock."""
    source = cost_source if cost_source is not None else EdgeDelaySource(config)
    policy = policy if policy is not None else make_policy(config)
    tol = config.bisection_tol
    horizon = config.horizon
    lipschitz = getattr(source, "lipschitz_bound", None)

    records: list[RoundRecord] = []
    failures: list[str] = []
    alloc = initial_allocation(config)
    prev_costs = None
    prev_cv = None
    prev_duration = 0.0
    regret_cum = 0.0
    path_cum = 0.0
    total_policy_time = 0.0

    for t in range(1, horizon + 1):
        if policy.clairvoyant:
            costs = source.costs_for_round(t, prev_duration)
            start = time.perf_counter()
            oracle_alloc, _level = dynamic_opt(costs, tol)
            policy_time = time.perf_counter() - start
            alloc = oracle_alloc
        else:
            if t == 1:
                policy_time = 0.0
            else:
                start = time.perf_counter()
                alloc = policy.decide(prev_costs, prev_cv, alloc)
                policy_time = time.perf_counter() - start
            costs = source.costs_for_round(t, prev_duration)
            oracle_alloc, _level = dynamic_opt(costs, tol)

        cv = evaluate_costs(costs, alloc.shares)
        oracle_cv = evaluate_costs(costs, oracle_alloc.shares)
        regret_inst = cv.global_cost - oracle_cv.global_cost
        regret_cum += regret_inst
        path_inc = (
            math.dist(records[-1].oracle_shares, oracle_alloc.shares) if records else 0.0
        )
        path_cum += path_inc
        total_policy_time += policy_time

        record = RoundRecord(
            round_index=t,
            shares=alloc.shares,
            per_agent_costs=cv.per_agent,
            global_cost=cv.global_cost,
            straggler=cv.straggler_index,
            oracle_shares=oracle_alloc.shares,
            oracle_cost=oracle_cv.global_cost,
            regret_inst=regret_inst,
            regret_cum=regret_cum,
            path_increment=path_inc,
            path_cum=path_cum,
            policy_time_s=policy_time,
        )
        records.append(record)

        if config.checks:
            _round_checks(policy, record, costs, cv, tol, lipschitz, failures)

        prev_duration = max(oracle_cv.global_cost, config.mobility_dt_floor_s)
        prev_costs = costs
        prev_cv = cv

    bound_value = None
    if policy.name == "dora" and lipschitz is not None:
        bound_value = regret_bound(horizon, lipschitz, config.step_size, path_cum)
        if config.checks and regret_cum > bound_value + 1e-9:
            failures.append(
                f"worst-case bound violated: regret {regret_cum} > bound {bound_value}"
            )

    window = tail_window_length(horizon)
    tail = [r.regret_cum for r in records[-window:]]
    summary = RunSummary(
        algorithm=policy.name,
        seed=config.seed,
        num_agents=config.num_agents,
        horizon=horizon,
        final_regret=regret_cum,
        tail_window=window,
        tail_avg_regret=sum(tail) / len(tail),
        total_policy_time_s=total_policy_time,
        path_length=path_cum,
        lipschitz_bound=lipschitz,
        regret_bound_value=bound_value,
        checks_enabled=config.checks,
        check_failures=tuple(failures),
    )
    return RunResult(config=config, records=records, summary=summary)


def _round_checks(policy, record, costs, cv, tol, lipschitz, failures):
    t = record.round_index
    total = sum(record.shares)
    if total > 1.0 + BUDGET_SLACK or any(s < 0.0 for s in record.shares):
        failures.append(f"round {t}: infeasible allocation {record.shares}")
    if record.regret_inst < -(tol + 1e-12):
        failures.append(f"round {t}: negative oracle gap {record.regret_inst}")
    if policy.name != "dora":
        return
    if t > 1 and abs(total - 1.0) > BUDGET_SLACK:
        failures.append(f"round {t}: budget not exhausted, sum {total}")
    targets = relinquish_targets(Allocation(record.shares), costs, cv.global_cost, tol)
    flags = check_relinquish_properties(record, targets)
    for idx, ok in enumerate(flags, start=1):
        if not ok:
            failures.append(f"round {t}: relinquish property {idx} violated")
    direction = update_direction(Allocation(record.shares), targets, cv.straggler_index)
    if direction.squared_norm() > 1.0 + CHECK_TOL:
        failures.append(
            f"round {t}: direction norm^2 {direction.squared_norm()} exceeds 1"
        )
    if lipschitz is not None and not check_gap_direction_bound(record, direction, lipschitz):
        failures.append(f"round {t}: gap-direction inequality violated")


def render_run_csv(result: RunResult, include_timing: bool = False) -> str:
    """Plot-ready per-round table.  The timing column is zeroed by default so
    identical (config, seed) runs produce byte-identical files; measured
    times always live in the JSON payload and the summary."""
    n = result.summary.num_agents
    header = ",".join(RUN_CSV_BASE_COLUMNS + tuple(f"x_{i}" for i in range(n)))
    lines = [header]
    name = result.summary.algorithm
    for r in result.records:
        ptime = r.policy_time_s if include_timing else 0.0
        fields = [
            str(r.round_index),
            name,
            repr(r.global_cost),
            repr(r.oracle_cost),
            repr(r.regret_cum),
            repr(r.path_cum),
            str(r.straggler),
            repr(ptime),
        ]
        fields.extend(repr(s) for s in r.shares)
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def run_payload(result: RunResult) -> dict:
    """JSON document with the config echo, summary, and full round records."""
    return {
        "schema_version": 1,
        "config": result.config.model_dump(mode="json"),
        "summary": asdict(result.summary),
        "records": [asdict(r) for r in result.records],
    }


def run_payload_json(result: RunResult) -> str:
    return json.dumps(run_payload(result), indent=2) + "\n"
