"""Relinquish-and-reallocate updates: agents shrink toward the smallest share
that still meets the previous round's worst cost, and the server hands the
freed budget to the previous straggler."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .core import (
    Allocation,
    BUDGET_SLACK,
    CostFunction,
    CostVector,
    DEFAULT_ROOT_TOL,
    inverse_cost,
)


@dataclass(frozen=True)
class DoraState:
    """Carry-over between rounds: last allocation, the costs observed at it,
    and the fixed step size in (0, 1)."""

    prev_alloc: Allocation
    prev_costs: Optional[CostVector]
    step_size: float

    def __post_init__(self):
        if not 0.0 < self.step_size < 1.0:
            raise ValueError(f"step size must lie in (0, 1), got {self.step_size}")


@dataclass(frozen=True)
class UpdateDirection:
    """Zero-sum direction combining per-agent relinquish amounts with the
    straggler's matching receipt."""

    components: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(float(c) for c in self.components))
        if abs(sum(self.components)) > 1e-9:
            raise ValueError("direction components must sum to zero")

    def squared_norm(self) -> float:
        return sum(c * c for c in self.components)


def relinquish_target(
    f: CostFunction,
    target_cost: float,
    share: float,
    tol: float = DEFAULT_ROOT_TOL,
    cost_at_share: Optional[float] = None,
) -> float:
    """Smallest share in [domain_floor, share] whose cost stays at or below
    target_cost.  Passing the already-observed cost_at_share (the agent's own
    cost this round) skips re-evaluating the function at the current share,
    which keeps the per-agent work of a round at one root solve."""
    own = f.evaluator(share) if cost_at_share is None else cost_at_share
    if target_cost < own:
        raise ValueError(
            f"target cost {target_cost} below achievable cost {own} at share {share}"
        )
    if target_cost - own <= tol:
        return share
    if f.inverse is not None:
        root = f.inverse(target_cost)
        floor = f.domain_floor
        return share if root > share else (floor if root < floor else root)
    return inverse_cost(f, target_cost, share, tol)


def agent_update(
    state: DoraState,
    agent: int,
    f_prev: CostFunction,
    tol: float = DEFAULT_ROOT_TOL,
) -> float:
    """One agent's next share: move a step-size fraction of the way from the
    current share toward the smallest share meeting the previous worst cost."""
    if state.prev_costs is None:
        raise ValueError("no observed costs to update from")
    share = state.prev_alloc.shares[agent]
    target = relinquish_target(
        f_prev,
        state.prev_costs.global_cost,
        share,
        tol,
        cost_at_share=state.prev_costs.per_agent[agent],
    )
    return share - state.step_size * (share - target)


def relinquish_targets(
    prev_alloc: Allocation,
    observed: Sequence[CostFunction],
    global_cost: float,
    tol: float = DEFAULT_ROOT_TOL,
) -> list[float]:
    """Smallest share each agent can keep while its observed cost stays at or
    below global_cost.  The straggler's target equals its own share."""
    return [
        inverse_cost(f, global_cost, share, tol)
        for f, share in zip(observed, prev_alloc.shares)
    ]


def server_reallocate(partial: Sequence[float], straggler_prev: int) -> Allocation:
    """Give the previous straggler everything the others left on the table."""
    shares = [float(s) for s in partial]
    if not 0 <= straggler_prev < len(shares):
        raise ValueError(f"straggler index {straggler_prev} out of range")
    others = 0.0
    for i, s in enumerate(shares):
        if s < -BUDGET_SLACK or s > 1.0 + BUDGET_SLACK:
            raise ValueError(f"corrupted agent message: share {s} from agent {i}")
        if i != straggler_prev:
            others += s
    if others > 1.0 + BUDGET_SLACK:
        raise ValueError(
            f"corrupted agent messages: non-straggler shares sum to {others}"
        )
    shares[straggler_prev] = 1.0 - others
    return Allocation(tuple(shares))


def dora_round(
    state: DoraState,
    observed: Sequence[CostFunction],
    tol: float = DEFAULT_ROOT_TOL,
) -> tuple[Allocation, DoraState]:
    """One full round: every agent relinquishes, then the server re-allocates.

    observed must be the cost functions actually incurred at state.prev_alloc;
    the straggler and the worst cost are taken from state.prev_costs as
    reported by the server.  Work is one root solve per agent.
    """
    if state.prev_costs is None:
        raise ValueError("state carries no observed costs; replay the allocation instead")
    shares = state.prev_alloc.shares
    if len(observed) != len(shares):
        raise ValueError("observed cost functions do not match the allocation size")
    worst = state.prev_costs.global_cost
    per_agent = state.prev_costs.per_agent
    alpha = state.step_size
    partial = [
        x - alpha * (x - relinquish_target(f, worst, x, tol, cost_at_share=c))
        for f, x, c in zip(observed, shares, per_agent)
    ]
    alloc = server_reallocate(partial, state.prev_costs.straggler_index)
    return alloc, DoraState(alloc, None, state.step_size)


def update_direction(
    prev_alloc: Allocation,
    targets: Sequence[float],
    straggler: int,
) -> UpdateDirection:
    """The round's direction vector: relinquish amounts for non-stragglers,
    minus their total for the straggler.  Stepping prev_alloc by step_size
    along it reproduces dora_round when the allocation uses the full budget."""
    shares = prev_alloc.shares
    if len(targets) != len(shares):
        raise ValueError("targets do not match the allocation size")
    for x, t in zip(shares, targets):
        if t > x + 1e-9:
            raise ValueError(f"relinquish target {t} exceeds share {x}")
    comps = [x - t for x, t in zip(shares, targets)]
    comps[straggler] = -sum(c for i, c in enumerate(comps) if i != straggler)
    return UpdateDirection(tuple(comps))
