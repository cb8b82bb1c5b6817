"""Multi-run orchestration: paired-seed policy comparisons and parameter
sweeps emitting plot-ready tables."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

from .config import ScenarioConfig, SweepConfig, apply_overrides, apply_sweep_value
from .policies import POLICY_NAMES, make_policy
from .sim import RUN_CSV_BASE_COLUMNS, RunResult, run


def validate_policies(policies: Sequence[str]) -> list[str]:
    unknown = [p for p in policies if p not in POLICY_NAMES]
    if unknown:
        raise ValueError(
            f"unknown policies {', '.join(unknown)}; valid names: {', '.join(POLICY_NAMES)}"
        )
    return list(policies)


def run_scenario(config: ScenarioConfig) -> RunResult:
    return run(config)


def run_compare(config: ScenarioConfig, policies: Sequence[str]) -> list[RunResult]:
    """Run each policy on the identical cost-stream seed so comparisons are
    paired: same channel and processing realizations round by round."""
    validate_policies(policies)
    results = []
    for name in policies:
        scenario = config.model_copy(update={"algorithm": name})
        results.append(run(scenario, policy=make_policy(scenario)))
    return results


def render_compare_csv(results: Sequence[RunResult], include_timing: bool = False) -> str:
    """Long-format per-round table keyed by algorithm, one block per policy."""
    if not results:
        raise ValueError("nothing to render")
    n = results[0].summary.num_agents
    header = ",".join(RUN_CSV_BASE_COLUMNS + tuple(f"x_{i}" for i in range(n)))
    lines = [header]
    for result in results:
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


@dataclass(frozen=True)
class SweepRow:
    param: str
    value: float
    algorithm: str
    seed: int
    avg_regret: float
    total_policy_time_s: float
    checks_passed: bool


def run_sweep(
    base: ScenarioConfig,
    sweep: SweepConfig,
    jobs: int = 1,
    base_seed: Optional[int] = None,
) -> list[SweepRow]:
    """One run per (value, repetition, policy).  The seed is held fixed across
    policies within a cell (paired comparisons) and varies across repetitions.
    Row order is deterministic regardless of execution order."""
    validate_policies(sweep.policies)
    seed0 = base.seed if base_seed is None else base_seed
    tasks = []
    for vi, value in enumerate(sweep.values):
        scenario = apply_sweep_value(base, sweep.parameter, value)
        if sweep.per_value_overrides is not None:
            scenario = apply_overrides(scenario, sweep.per_value_overrides[vi])
        for rep in range(sweep.repetitions):
            seed = seed0 + rep
            cell = scenario.model_copy(update={"seed": seed})
            for pi, name in enumerate(sweep.policies):
                tasks.append((vi, rep, pi, value, name, cell))

    def execute(task):
        vi, rep, pi, value, name, cell = task
        scenario = cell.model_copy(update={"algorithm": name})
        result = run(scenario)
        return (
            (vi, pi, rep),
            SweepRow(
                param=sweep.parameter,
                value=value,
                algorithm=name,
                seed=cell.seed,
                avg_regret=result.summary.tail_avg_regret,
                total_policy_time_s=result.summary.total_policy_time_s,
                checks_passed=result.checks_passed,
            ),
        )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            keyed = list(pool.map(execute, tasks))
    else:
        keyed = [execute(t) for t in tasks]
    keyed.sort(key=lambda kv: kv[0])
    return [row for _, row in keyed]


def render_sweep_csv(rows: Sequence[SweepRow]) -> str:
    lines = ["param,value,algorithm,seed,avg_regret,total_policy_time_s"]
    for r in rows:
        lines.append(
            f"{r.param},{r.value!r},{r.algorithm},{r.seed},"
            f"{r.avg_regret!r},{r.total_policy_time_s!r}"
        )
    return "\n".join(lines) + "\n"
