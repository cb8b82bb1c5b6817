"""Shared builders for the test suite."""

from __future__ import annotations

import math

from minmaxalloc.config import ScenarioConfig
from minmaxalloc.core import CostFunction


def reciprocal_cost(scale: float, offset: float = 0.0, floor: float = 1e-9,
                    with_inverse: bool = False) -> CostFunction:
    """f(x) = scale / x + offset, optionally with its analytic inverse."""
    inverse = (lambda cost: scale / (cost - offset)) if with_inverse else None
    return CostFunction(
        evaluator=lambda x: scale / x + offset,
        domain_floor=floor,
        lipschitz_bound=scale / (floor * floor),
        inverse=inverse,
    )


def linear_cost(intercept: float, slope: float = 1.0) -> CostFunction:
    """f(x) = intercept - slope * x on [0, 1]."""
    return CostFunction(
        evaluator=lambda x: intercept - slope * x,
        domain_floor=0.0,
        lipschitz_bound=slope,
    )


class StaticCostSource:
    """Replays a fixed list of cost functions every round."""

    def __init__(self, costs, lipschitz_bound=None):
        self.costs = list(costs)
        if lipschitz_bound is None:
            lipschitz_bound = max(
                f.lipschitz_bound for f in costs if f.lipschitz_bound is not None
            )
        self.lipschitz_bound = lipschitz_bound

    def costs_for_round(self, round_number, prev_round_duration_s):
        return self.costs


def ring_positions(n: int, radius: float = 120.0, cx: float = 250.0, cy: float = 250.0):
    return [
        (cx + radius * math.cos(2 * math.pi * k / n),
         cy + radius * math.sin(2 * math.pi * k / n))
        for k in range(n)
    ]


def covered_arena_scenario(**overrides) -> ScenarioConfig:
    """Scenario whose whole arena sits well inside radio coverage, keeping the
    per-agent rate spread mild enough for fixed-step baselines."""
    base = dict(
        num_agents=5,
        horizon=470,
        step_size=0.02,
        algorithm="dora",
        seed=0,
        checks=False,
        radio={"bandwidth_hz": 20e6, "pathloss_const_db": -20.0, "pathloss_exp": 3.0},
        agents={
            "data_size_bits": 8e6,
            "velocity_mps": 0.0,
            "processing": {"mode": "stochastic", "base_s": 0.5, "jitter_scale_s": 0.01},
        },
    )
    base.update(overrides)
    return ScenarioConfig(**base)
