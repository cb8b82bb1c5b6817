"""Per-run policy drivers gluing the update rules into the round loop.

Every online policy sees only the previous round's cost functions and the
costs observed at its own previous play (delayed information).  The
clairvoyant optimum is flagged so the simulator hands it the current round's
exact solution instead.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from . import baselines
from .config import ScenarioConfig
from .core import Allocation, CostFunction, CostVector
from .dora import DoraState, dora_round


class Policy:
    name = "base"
    clairvoyant = False

    def decide(
        self,
        observed_costs: Sequence[CostFunction],
        observed: CostVector,
        prev_alloc: Allocation,
    ) -> Allocation:
        raise NotImplementedError


class EqualPolicy(Policy):
    name = "equal"

    def __init__(self, num_agents: int):
        self.num_agents = num_agents

    def decide(self, observed_costs, observed, prev_alloc):
        return baselines.equal_step(self.num_agents)


class DoraPolicy(Policy):
    name = "dora"

    def __init__(self, step_size: float, tol: float):
        self.step_size = step_size
        self.tol = tol

    def decide(self, observed_costs, observed, prev_alloc):
        state = DoraState(prev_alloc, observed, self.step_size)
        alloc, _ = dora_round(state, observed_costs, self.tol)
        return alloc


class OgdPolicy(Policy):
    name = "ogd"

    def __init__(self, initial: Allocation, step_size: float):
        self.state = baselines.BaselineState(initial, step_size)

    def decide(self, observed_costs, observed, prev_alloc):
        return baselines.ogd_step(self.state, observed_costs)


class OmdPolicy(Policy):
    """Keeps its iterate in log space so disadvantaged coordinates never
    collapse to exact zero, which would leave the divergence undefined."""

    name = "omd"

    def __init__(self, initial: Allocation, step_size: float, weight: float):
        self.state = baselines.BaselineState(initial, step_size)
        self.weight = weight
        self.log_shares = [math.log(s) for s in initial.shares]

    def decide(self, observed_costs, observed, prev_alloc):
        grad = baselines.subgradient_max(observed_costs, self.state.current_alloc)
        self.log_shares = baselines.entropic_step(self.log_shares, grad, self.weight)
        self.state.current_alloc = Allocation(
            tuple(math.exp(v) for v in self.log_shares)
        )
        self.state.round_counter += 1
        return self.state.current_alloc


class FkmPolicy(Policy):
    name = "fkm"

    def __init__(
        self,
        initial: Allocation,
        step_size: float,
        delta: float,
        domain_floor: float,
        rng: np.random.Generator,
    ):
        n = len(initial.shares)
        safe = baselines.fkm_safe_delta(n, domain_floor, delta)
        self.state = baselines.BaselineState(initial, step_size, fkm_delta=safe)
        self.domain_floor = domain_floor
        self.rng = rng

    def decide(self, observed_costs, observed, prev_alloc):
        return baselines.fkm_step(
            self.state, observed.global_cost, self.rng, self.domain_floor
        )


class OcgPolicy(Policy):
    name = "ocg"

    def __init__(self, initial: Allocation, step_size: float):
        self.state = baselines.BaselineState(initial, step_size)

    def decide(self, observed_costs, observed, prev_alloc):
        return baselines.ocg_step(self.state, observed_costs)


class DynamicOptPolicy(Policy):
    """Plays the per-round exact optimum; the comparator in the regret."""

    name = "dynopt"
    clairvoyant = True

    def decide(self, observed_costs, observed, prev_alloc):
        raise RuntimeError("clairvoyant policy is driven by the simulator")


POLICY_NAMES = ("equal", "dora", "ogd", "omd", "fkm", "ocg", "dynopt")


def initial_allocation(config: ScenarioConfig) -> Allocation:
    if config.initial_allocation is not None:
        return Allocation(tuple(config.initial_allocation))
    return Allocation.equal(config.num_agents)


def make_policy(config: ScenarioConfig, name: Optional[str] = None) -> Policy:
    """Build the named policy (default: the scenario's algorithm field).

    FKM's perturbation stream is spawned from the scenario seed on a branch
    that the cost model never touches, so the channel and processing
    realizations stay identical across policies at a fixed seed.
    """
    name = name or config.algorithm
    initial = initial_allocation(config)
    alpha = config.step_size
    if name == "equal":
        return EqualPolicy(config.num_agents)
    if name == "dora":
        return DoraPolicy(alpha, config.bisection_tol)
    if name == "ogd":
        return OgdPolicy(initial, alpha)
    if name == "omd":
        weight = config.omd_weight if config.omd_weight is not None else 1.0 / alpha
        return OmdPolicy(initial, alpha, weight)
    if name == "fkm":
        fkm_ss = np.random.SeedSequence(config.seed).spawn(2)[1]
        rng = np.random.Generator(np.random.PCG64(fkm_ss))
        step = (
            config.fkm_step_size
            if config.fkm_step_size is not None
            else alpha * config.fkm_delta / config.num_agents
        )
        return FkmPolicy(initial, step, config.fkm_delta, config.domain_floor, rng)
    if name == "ocg":
        return OcgPolicy(initial, alpha)
    if name == "dynopt":
        return DynamicOptPolicy()
    raise ValueError(f"unknown policy {name!r}; valid names: {', '.join(POLICY_NAMES)}")
