"""Edge-learning delay model: Shannon-rate communication delay over a
path-loss channel with random-waypoint mobility, plus per-round processing
delays from a trace or a stochastic model."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .config import ScenarioConfig
from .core import CostFunction

MAX_LEGS_PER_STEP = 16


@dataclass(frozen=True)
class RadioParams:
    """Channel and band parameters; noise is taken over the full band, so the
    SNR does not depend on the allocated share."""

    bandwidth_hz: float
    tx_power_w: float = 1.0
    noise_density_dbm_hz: float = -174.0
    pathloss_const_db: float = -40.0
    ref_distance_m: float = 1.0
    pathloss_exp: float = 4.0

    def __post_init__(self):
        if self.bandwidth_hz <= 0.0:
            raise ValueError("bandwidth must be positive")
        if self.ref_distance_m <= 0.0:
            raise ValueError("reference distance must be positive")
        if self.pathloss_exp < 2.0:
            raise ValueError("path-loss exponent below 2 is not a valid model")


@dataclass(frozen=True)
class ArenaConfig:
    side_m: float = 500.0
    server_xy: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if self.side_m <= 0.0:
            raise ValueError("arena side must be positive")

    @property
    def server_position(self) -> tuple[float, float]:
        if self.server_xy is not None:
            return self.server_xy
        return (self.side_m / 2.0, self.side_m / 2.0)


@dataclass
class AgentProfile:
    data_size_bits: float
    position: tuple[float, float]
    velocity_nominal: float = 0.0
    processing_base_s: float = 1.0

    def __post_init__(self):
        if self.data_size_bits <= 0.0:
            raise ValueError("data size must be positive")


def channel_gain(radio: RadioParams, distance_m: float) -> float:
    """Power gain h0 * (D0 / D)^n; invalid below the reference distance."""
    if distance_m < radio.ref_distance_m:
        raise ValueError(
            f"distance {distance_m} below reference distance {radio.ref_distance_m}"
        )
    return 10.0 ** (radio.pathloss_const_db / 10.0) * (
        radio.ref_distance_m / distance_m
    ) ** radio.pathloss_exp


def noise_power(radio: RadioParams) -> float:
    """White-noise power in watts over the full band."""
    dbm = radio.noise_density_dbm_hz + 10.0 * math.log10(radio.bandwidth_hz)
    return 10.0 ** ((dbm - 30.0) / 10.0)


def comm_delay(data_bits: float, share: float, radio: RadioParams, gain: float) -> float:
    """Upload time of data_bits over the allocated band fraction at the
    Shannon-bound rate; diverges as the share goes to zero."""
    if share <= 0.0:
        raise ValueError("share must be positive")
    snr = gain * radio.tx_power_w / noise_power(radio)
    rate = share * radio.bandwidth_hz * math.log2(1.0 + snr)
    return data_bits / rate


def _delay_cost(comm_scale: float, processing_s: float, floor: float) -> CostFunction:
    def evaluate(share: float) -> float:
        return comm_scale / share + processing_s

    def invert(cost: float) -> float:
        return comm_scale / (cost - processing_s)

    return CostFunction(
        evaluator=evaluate,
        domain_floor=floor,
        lipschitz_bound=comm_scale / (floor * floor),
        inverse=invert,
    )


def make_round_costs(
    profiles: Sequence[AgentProfile],
    radio: RadioParams,
    processing_delays: Sequence[float],
    server_xy: tuple[float, float],
    domain_floor: float = 1e-9,
) -> list[CostFunction]:
    """Per-agent total delay functions share -> comm + processing, with the
    analytic sensitivity bound on [domain_floor, 1] declared."""
    if len(profiles) != len(processing_delays):
        raise ValueError("profiles and processing delays disagree on agent count")
    noise = noise_power(radio)
    out = []
    for profile, proc in zip(profiles, processing_delays):
        if proc < 0.0:
            raise ValueError(f"negative processing delay {proc}")
        dx = profile.position[0] - server_xy[0]
        dy = profile.position[1] - server_xy[1]
        # The path-loss model saturates below the reference distance.
        dist = max(math.hypot(dx, dy), radio.ref_distance_m)
        gain = channel_gain(radio, dist)
        snr = gain * radio.tx_power_w / noise
        comm_scale = profile.data_size_bits / (radio.bandwidth_hz * math.log2(1.0 + snr))
        out.append(_delay_cost(comm_scale, proc, domain_floor))
    return out


def scenario_lipschitz(
    data_bits_max: float,
    radio: RadioParams,
    arena: ArenaConfig,
    domain_floor: float,
) -> float:
    """Worst-case analytic sensitivity bound over the whole arena: the corner
    agent has the lowest rate, and the bound scales as 1/floor^2."""
    sx, sy = arena.server_position
    corners = [(0.0, 0.0), (arena.side_m, 0.0), (0.0, arena.side_m), (arena.side_m, arena.side_m)]
    far = max(math.hypot(cx - sx, cy - sy) for cx, cy in corners)
    far = max(far, radio.ref_distance_m)
    snr_min = channel_gain(radio, far) * radio.tx_power_w / noise_power(radio)
    comm_scale_max = data_bits_max / (radio.bandwidth_hz * math.log2(1.0 + snr_min))
    return comm_scale_max / (domain_floor * domain_floor)


class WaypointWalker:
    """Random-waypoint motion in a square arena: head to a uniform waypoint at
    a speed drawn from [0.8v, 1.2v], redraw both on arrival, no pause time."""

    def __init__(
        self,
        start_xy: tuple[float, float],
        nominal_speed: float,
        arena_side: float,
        rng: np.random.Generator,
    ):
        self.position = (float(start_xy[0]), float(start_xy[1]))
        self.nominal_speed = float(nominal_speed)
        self.arena_side = float(arena_side)
        self.rng = rng
        self.speed_factor = float(rng.uniform(0.8, 1.2))
        self.waypoint = self._draw_waypoint()

    def _draw_waypoint(self) -> tuple[float, float]:
        return (
            float(self.rng.uniform(0.0, self.arena_side)),
            float(self.rng.uniform(0.0, self.arena_side)),
        )

    def step(self, dt: float) -> tuple[float, float]:
        if self.nominal_speed <= 0.0 or dt <= 0.0:
            return self.position
        x, y = self.position
        budget = dt
        legs = 0
        while budget > 0.0 and legs < MAX_LEGS_PER_STEP:
            wx, wy = self.waypoint
            dist = math.hypot(wx - x, wy - y)
            speed = self.nominal_speed * self.speed_factor
            reach = speed * budget
            if reach < dist:
                frac = reach / dist
                x += (wx - x) * frac
                y += (wy - y) * frac
                budget = 0.0
            else:
                x, y = wx, wy
                budget -= dist / speed if speed > 0.0 else budget
                self.waypoint = self._draw_waypoint()
                self.speed_factor = float(self.rng.uniform(0.8, 1.2))
                legs += 1
        self.position = (x, y)
        return self.position


class StochasticProcessing:
    """Base processing time plus half-normal jitter, per agent."""

    def __init__(self, base_s: Sequence[float], jitter_scale_s: float, rngs: Sequence[np.random.Generator]):
        if any(b < 0.0 for b in base_s):
            raise ValueError("negative base processing time")
        if jitter_scale_s < 0.0:
            raise ValueError("negative jitter scale")
        self.base_s = list(base_s)
        self.scale = float(jitter_scale_s)
        self.rngs = list(rngs)

    def delay(self, round_index: int, agent: int) -> float:
        base = self.base_s[agent]
        if self.scale == 0.0:
            return base
        return base + abs(float(self.rngs[agent].normal(0.0, self.scale)))


class TraceProcessing:
    """Round-indexed processing times ingested from a CSV trace."""

    def __init__(self, table: Sequence[Sequence[float]]):
        self.table = [list(row) for row in table]

    def delay(self, round_index: int, agent: int) -> float:
        if round_index >= len(self.table):
            raise ValueError(
                f"trace has {len(self.table)} rounds, round index {round_index} requested"
            )
        return self.table[round_index][agent]


def load_delay_trace(path: str, num_agents: int, horizon: int) -> list[list[float]]:
    """Read a `round,agent,delay_s` CSV into a [round][agent] table.

    Round indices are zero-based.  The trace must cover every (round, agent)
    pair up to the horizon, and delays must be non-negative.
    """
    entries: dict[tuple[int, int], float] = {}
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["round", "agent", "delay_s"]:
            raise ValueError(f"trace {path} must start with header round,agent,delay_s")
        for row in reader:
            if not row:
                continue
            r, a, delay = int(row[0]), int(row[1]), float(row[2])
            if delay < 0.0:
                raise ValueError(f"negative delay {delay} at round {r}, agent {a}")
            entries[(r, a)] = delay
    table = []
    for r in range(horizon):
        row = []
        for a in range(num_agents):
            if (r, a) not in entries:
                raise ValueError(
                    f"trace {path} is missing round {r}, agent {a} "
                    f"(horizon {horizon}, {num_agents} agents)"
                )
            row.append(entries[(r, a)])
        table.append(row)
    return table


class EdgeDelaySource:
    """Stateful per-run generator of round cost functions for a scenario.

    All randomness flows from the scenario seed through per-purpose spawned
    streams, so runs are bit-reproducible and two policies given the same
    seed see identical channel and processing realizations.
    """

    def __init__(self, config: ScenarioConfig):
        self.config = config
        n = config.num_agents
        seed_root = np.random.SeedSequence(config.seed)
        init_ss, _fkm_ss, *agent_ss = seed_root.spawn(2 + 2 * n)
        init_rng = np.random.Generator(np.random.PCG64(init_ss))
        mobility_rngs = [np.random.Generator(np.random.PCG64(s)) for s in agent_ss[:n]]
        processing_rngs = [np.random.Generator(np.random.PCG64(s)) for s in agent_ss[n:]]

        side = config.arena.side_m
        if config.agents.positions_m is not None:
            positions = [tuple(p) for p in config.agents.positions_m]
        else:
            positions = [
                (float(init_rng.uniform(0.0, side)), float(init_rng.uniform(0.0, side)))
                for _ in range(n)
            ]
        data_bits = config.per_agent_data_bits()
        base_s = config.per_agent_base_s()
        self.radio = RadioParams(
            bandwidth_hz=config.radio.bandwidth_hz,
            tx_power_w=config.radio.tx_power_w,
            noise_density_dbm_hz=config.radio.noise_density_dbm_hz,
            pathloss_const_db=config.radio.pathloss_const_db,
            ref_distance_m=config.radio.ref_distance_m,
            pathloss_exp=config.radio.pathloss_exp,
        )
        self.arena = ArenaConfig(side_m=side, server_xy=config.arena.server_xy)
        self.profiles = [
            AgentProfile(
                data_size_bits=data_bits[i],
                position=positions[i],
                velocity_nominal=config.agents.velocity_mps,
                processing_base_s=base_s[i],
            )
            for i in range(n)
        ]
        self.walkers = [
            WaypointWalker(positions[i], config.agents.velocity_mps, side, mobility_rngs[i])
            for i in range(n)
        ]
        proc_cfg = config.agents.processing
        if proc_cfg.mode == "trace":
            table = load_delay_trace(proc_cfg.trace_path, n, config.horizon)
            self.processing = TraceProcessing(table)
        else:
            self.processing = StochasticProcessing(base_s, proc_cfg.jitter_scale_s, processing_rngs)
        self.lipschitz_bound = scenario_lipschitz(
            max(data_bits), self.radio, self.arena, config.domain_floor
        )

    def costs_for_round(self, round_number: int, prev_round_duration_s: float) -> list[CostFunction]:
        """Cost functions for round t >= 1.  Positions advance by one mobility
        step of the previous round's duration (with the configured floor)."""
        if round_number > 1:
            dt = max(prev_round_duration_s, self.config.mobility_dt_floor_s)
            for profile, walker in zip(self.profiles, self.walkers):
                profile.position = walker.step(dt)
        delays = [
            self.processing.delay(round_number - 1, agent)
            for agent in range(self.config.num_agents)
        ]
        return make_round_costs(
            self.profiles,
            self.radio,
            delays,
            self.arena.server_position,
            self.config.domain_floor,
        )
