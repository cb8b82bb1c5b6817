"""Benchmark allocation policies sharing the monotone-cost abstraction:
equal split, projected subgradient descent, entropic mirror descent,
single-point gradient estimation, conditional (projection-free) descent,
and the per-round exact optimum."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    Allocation,
    CostFunction,
    DEFAULT_ROOT_TOL,
    evaluate_costs,
    inverse_cost,
)

FD_STEP = 1e-6


@dataclass
class BaselineState:
    """Mutable per-run state shared by the benchmark policies."""

    current_alloc: Allocation
    step_size: float
    round_counter: int = 1
    aggregated_gradient: Optional[list[float]] = None
    fkm_delta: float = 0.05
    fkm_last_direction: Optional[tuple[float, ...]] = None
    fkm_center: Optional[tuple[float, ...]] = None


def subgradient_max(costs: Sequence[CostFunction], alloc: Allocation) -> list[float]:
    """Subgradient of the max-cost objective at alloc: supported on the
    straggler coordinate, estimated by a central difference with the stencil
    clamped into [domain_floor, 1]."""
    shares = alloc.shares
    if len(costs) != len(shares):
        raise ValueError("cost functions do not match the allocation size")
    cv = evaluate_costs(costs, shares)
    s = cv.straggler_index
    f = costs[s]
    x = max(shares[s], f.domain_floor)
    lo = max(x - FD_STEP, f.domain_floor)
    hi = min(x + FD_STEP, 1.0)
    if hi <= lo:
        raise ValueError(
            f"share {shares[s]} leaves no room for the difference stencil "
            f"above domain floor {f.domain_floor}"
        )
    grad = [0.0] * len(shares)
    grad[s] = (f.evaluator(hi) - f.evaluator(lo)) / (hi - lo)
    return grad


def _project_capped_simplex(values: Sequence[float], budget: float) -> list[float]:
    """Euclidean projection onto {x >= 0, sum(x) <= budget}."""
    clipped = [v if v > 0.0 else 0.0 for v in values]
    if sum(clipped) <= budget:
        return clipped
    # Budget binds: sort-based threshold for the sum(x) = budget face.
    ordered = sorted(values, reverse=True)
    theta = 0.0
    running = 0.0
    for j, u in enumerate(ordered, start=1):
        running += u
        candidate = (running - budget) / j
        if u - candidate > 0.0:
            theta = candidate
    return [max(v - theta, 0.0) for v in values]


def project_feasible(values: Sequence[float]) -> Allocation:
    """Euclidean projection onto the feasible set {x >= 0, sum(x) <= 1}."""
    values = [float(v) for v in values]
    if any(not math.isfinite(v) for v in values):
        raise ValueError("cannot project non-finite values")
    return Allocation(tuple(_project_capped_simplex(values, 1.0)))


def ogd_step(state: BaselineState, costs: Sequence[CostFunction]) -> Allocation:
    """Projected subgradient step on the max-cost objective."""
    grad = subgradient_max(costs, state.current_alloc)
    moved = [x - state.step_size * g for x, g in zip(state.current_alloc.shares, grad)]
    state.current_alloc = project_feasible(moved)
    state.round_counter += 1
    return state.current_alloc


def entropic_step(log_shares: Sequence[float], grad: Sequence[float], weight: float) -> list[float]:
    """Log-domain multiplicative update x_i ∝ x_i exp(-g_i / weight),
    renormalized to sum one.  Working in logs keeps long runs from
    underflowing the disadvantaged coordinates to exact zero."""
    if weight <= 0.0:
        raise ValueError("regularization weight must be positive")
    shifted = [ls - g / weight for ls, g in zip(log_shares, grad)]
    peak = max(shifted)
    total = sum(math.exp(v - peak) for v in shifted)
    log_total = peak + math.log(total)
    return [v - log_total for v in shifted]


def omd_step(
    state: BaselineState,
    costs: Sequence[CostFunction],
    weight: Optional[float] = None,
) -> Allocation:
    """Mirror-descent step under the entropic (KL) geometry; the closed-form
    minimizer of <x, g> + weight * KL(x, x_t) over the simplex."""
    shares = state.current_alloc.shares
    if min(shares) <= 0.0:
        raise ValueError("mirror step undefined at zero shares (bad initialization)")
    w = state.step_size if weight is None else weight
    grad = subgradient_max(costs, state.current_alloc)
    log_next = entropic_step([math.log(x) for x in shares], grad, w)
    state.current_alloc = Allocation(tuple(math.exp(v) for v in log_next))
    state.round_counter += 1
    return state.current_alloc


def fkm_gradient_estimate(
    num_agents: int,
    delta: float,
    observed_cost: float,
    direction: Sequence[float],
) -> list[float]:
    """Single-point gradient estimate (N/delta) * cost * unit direction."""
    if delta <= 0.0:
        raise ValueError("perturbation radius must be positive")
    scale = num_agents / delta * observed_cost
    return [scale * u for u in direction]


def fkm_safe_delta(num_agents: int, domain_floor: float, delta: float) -> float:
    """Cap the perturbation radius so the shrunk center set stays non-empty:
    centers need share >= floor + delta each and total <= 1 - delta*sqrt(N)."""
    cap = 0.5 * (1.0 - num_agents * domain_floor) / (num_agents + math.sqrt(num_agents))
    if cap <= 0.0:
        raise ValueError("domain floor leaves no room for perturbation")
    return min(delta, cap)


def _fkm_center_bounds(num_agents: int, domain_floor: float, delta: float) -> tuple[float, float]:
    lo = domain_floor + delta
    budget = 1.0 - delta * math.sqrt(num_agents)
    if num_agents * lo > budget:
        raise ValueError(
            f"perturbation radius {delta} too large for the shrunk feasible set"
        )
    return lo, budget


def fkm_project_center(
    values: Sequence[float],
    num_agents: int,
    domain_floor: float,
    delta: float,
) -> list[float]:
    """Project a center onto the margin-shrunk set, which keeps every
    perturbed point (center + delta * unit vector) feasible and evaluable."""
    lo, budget = _fkm_center_bounds(num_agents, domain_floor, delta)
    shifted = [v - lo for v in values]
    projected = _project_capped_simplex(shifted, budget - num_agents * lo)
    return [p + lo for p in projected]


def fkm_unit_direction(num_agents: int, rng: np.random.Generator) -> tuple[float, ...]:
    """Uniform random unit vector."""
    while True:
        raw = rng.standard_normal(num_agents)
        norm = float(np.linalg.norm(raw))
        if norm > 1e-12:
            return tuple(float(v) / norm for v in raw)


def fkm_step(
    state: BaselineState,
    observed_cost_at_perturbed_point: float,
    rng: np.random.Generator,
    domain_floor: float = 0.0,
) -> Allocation:
    """Bandit-feedback step: nudge the center against the estimated gradient,
    then play a fresh random perturbation of it."""
    n = len(state.current_alloc.shares)
    delta = state.fkm_delta
    if state.fkm_center is None:
        center = fkm_project_center(state.current_alloc.shares, n, domain_floor, delta)
    else:
        center = list(state.fkm_center)
        if state.fkm_last_direction is not None:
            est = fkm_gradient_estimate(
                n, delta, observed_cost_at_perturbed_point, state.fkm_last_direction
            )
            moved = [c - state.step_size * g for c, g in zip(center, est)]
            center = fkm_project_center(moved, n, domain_floor, delta)
    direction = fkm_unit_direction(n, rng)
    played = tuple(c + delta * u for c, u in zip(center, direction))
    state.fkm_center = tuple(center)
    state.fkm_last_direction = direction
    state.current_alloc = Allocation(played)
    state.round_counter += 1
    return state.current_alloc


def linear_minimizer(aggregated: Sequence[float]) -> list[float]:
    """argmin over {x >= 0, sum(x) <= 1} of <x, aggregated>: the full budget
    on the most negative coordinate, or the origin when none is negative."""
    best = 0
    for i, g in enumerate(aggregated):
        if g < aggregated[best]:
            best = i
    vertex = [0.0] * len(aggregated)
    if aggregated[best] < 0.0:
        vertex[best] = 1.0
    return vertex


def ocg_step(state: BaselineState, costs: Sequence[CostFunction]) -> Allocation:
    """Conditional (projection-free) step toward the linear minimizer of the
    aggregated subgradients, with the round-indexed 1/t mixing weight."""
    grad = subgradient_max(costs, state.current_alloc)
    if state.aggregated_gradient is None:
        state.aggregated_gradient = [0.0] * len(grad)
    state.aggregated_gradient = [a + g for a, g in zip(state.aggregated_gradient, grad)]
    vertex = linear_minimizer(state.aggregated_gradient)
    state.round_counter += 1
    coef = 1.0 / state.round_counter
    shares = [
        x + coef * (v - x) for x, v in zip(state.current_alloc.shares, vertex)
    ]
    state.current_alloc = Allocation(tuple(shares))
    return state.current_alloc


def equal_step(num_agents: int) -> Allocation:
    """Uniform split of the unit budget."""
    return Allocation.equal(num_agents)


def dynamic_opt(
    costs: Sequence[CostFunction],
    tol: float = DEFAULT_ROOT_TOL,
) -> tuple[Allocation, float]:
    """Instantaneous min-max optimum: bisect on the achievable worst cost for
    the smallest value whose per-agent minimum shares fit the budget.

    Exact for monotone non-increasing costs.  Leftover budget goes to agent 0
    (it cannot raise the max).  Returns the allocation and the worst cost.
    """
    n = len(costs)
    if n == 0:
        raise ValueError("need at least one cost function")

    def total_share(level: float) -> float:
        return sum(inverse_cost(f, level, 1.0, tol) for f in costs)

    # Root tolerance can put a boundary total a hair past the budget.
    budget = 1.0 + 1e-9

    # No agent can beat its full-budget cost; equal split is always feasible.
    lo = max(f.evaluator(1.0) for f in costs)
    hi = max(f.evaluator(max(1.0 / n, f.domain_floor)) for f in costs)
    if total_share(lo) <= budget:
        level = lo
    else:
        if total_share(hi) > budget:
            raise ValueError("degenerate scenario: no feasible worst-cost level")
        for _ in range(200):
            if hi - lo <= tol:
                break
            mid = 0.5 * (lo + hi)
            if total_share(mid) <= budget:
                hi = mid
            else:
                lo = mid
        level = hi
    shares = [inverse_cost(f, level, 1.0, tol) for f in costs]
    slack = 1.0 - sum(shares)
    if slack > 0.0:
        shares[0] += slack
    return Allocation(tuple(shares)), level
