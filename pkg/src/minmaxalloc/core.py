"""Domain types for allocations and monotone cost functions.

Shares are dimensionless fractions of a unit resource budget.  Costs are
seconds in the delay instantiation, but any non-increasing scalar map works.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

BUDGET_SLACK = 1e-9
DEFAULT_ROOT_TOL = 1e-10
MAX_BISECT_ITERS = 200


@dataclass(frozen=True)
class Allocation:
    """Per-agent resource fractions under a unit budget."""

    shares: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "shares", tuple(float(s) for s in self.shares))
        if not self.shares:
            raise ValueError("allocation needs at least one share")
        if any(s < 0.0 for s in self.shares):
            raise ValueError(f"negative share in allocation {self.shares}")
        total = sum(self.shares)
        if total > 1.0 + BUDGET_SLACK:
            raise ValueError(f"shares sum to {total}, exceeding the unit budget")

    @classmethod
    def equal(cls, num_agents: int) -> "Allocation":
        if num_agents < 1:
            raise ValueError("need at least one agent")
        return cls((1.0 / num_agents,) * num_agents)

    def __len__(self) -> int:
        return len(self.shares)


@dataclass(frozen=True)
class CostFunction:
    """Monotone non-increasing map from a resource share to a cost.

    evaluator must be total on [domain_floor, 1].  domain_floor is positive
    for costs that diverge at zero share.  lipschitz_bound, when declared,
    promises |f(x) - f(y)| <= L |x - y| on that interval.  inverse, when
    declared, is the analytic inverse of the evaluator (cost -> share) and is
    used by inverse_cost as a fast path; it must agree with the evaluator.
    """

    evaluator: Callable[[float], float]
    domain_floor: float = 0.0
    lipschitz_bound: Optional[float] = None
    inverse: Optional[Callable[[float], float]] = None

    def __call__(self, share: float) -> float:
        return self.evaluator(share)


@dataclass(frozen=True)
class CostVector:
    """Observed per-agent costs, their maximum, and who attained it."""

    per_agent: tuple[float, ...]
    global_cost: float
    straggler_index: int


def evaluate_costs(costs: Sequence[CostFunction], shares: Sequence[float]) -> CostVector:
    """Evaluate raw shares (no feasibility checks), clamping each share up to
    its function's domain floor so starved agents get a finite cost."""
    per = []
    worst = 0
    for i, (f, share) in enumerate(zip(costs, shares)):
        floor = f.domain_floor
        value = f.evaluator(share if share >= floor else floor)
        per.append(value)
        if value > per[worst]:
            worst = i
    return CostVector(tuple(per), per[worst], worst)


def evaluate_global(costs: Sequence[CostFunction], alloc: Allocation) -> CostVector:
    """Per-agent costs at a feasible allocation, the max, and the straggler.

    Ties on the max break toward the lowest agent index.
    """
    if len(costs) != len(alloc.shares):
        raise ValueError(f"{len(costs)} cost functions for {len(alloc.shares)} shares")
    for i, (f, share) in enumerate(zip(costs, alloc.shares)):
        if share < f.domain_floor:
            raise ValueError(
                f"share {share} of agent {i} below domain floor {f.domain_floor}"
            )
    return evaluate_costs(costs, alloc.shares)


def inverse_cost(
    f: CostFunction,
    target_cost: float,
    hi: float,
    tol: float = DEFAULT_ROOT_TOL,
) -> float:
    """Share x in [f.domain_floor, hi] with f(x) close to target_cost.

    Returns the domain floor when even the minimal share meets the target
    (f(floor) <= target), and hi when the target is already attained there.
    Otherwise finds a root with |f(x) - target_cost| <= tol, by the declared
    analytic inverse when present and by bisection when not.  On flat
    segments any root is acceptable.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    floor = f.domain_floor
    if hi < floor:
        raise ValueError(f"hi={hi} below domain floor {floor}")
    cost_hi = f.evaluator(hi)
    if target_cost < cost_hi:
        raise ValueError(
            f"target cost {target_cost} below achievable cost {cost_hi} at share {hi}"
        )
    if f.evaluator(floor) <= target_cost:
        return floor
    if target_cost - cost_hi <= tol:
        return hi
    if f.inverse is not None:
        root = f.inverse(target_cost)
        return min(max(root, floor), hi)
    lo = floor
    hi_b = hi
    mid = 0.5 * (lo + hi_b)
    for _ in range(MAX_BISECT_ITERS):
        mid = 0.5 * (lo + hi_b)
        cost_mid = f.evaluator(mid)
        if abs(cost_mid - target_cost) <= tol:
            return mid
        if cost_mid > target_cost:
            lo = mid
        else:
            hi_b = mid
    return mid
