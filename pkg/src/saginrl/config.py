"""Configuration tree for simulator, agents, federation, and experiments.

One YAML (or JSON) file maps onto the dataclasses below. Every field has
a default, so a config file only lists overrides. Unknown keys raise
:class:`ConfigError` with the full field path.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml


class ConfigError(ValueError):
    """Invalid configuration; the message carries the offending field path."""


@dataclass
class AirGroundConfig:
    phi: float = 3.04
    eta: float = -23.29
    omega0_deg: float = -3.61
    gamma: float = 4.14
    k0: float = 20.7


@dataclass
class RainConfig:
    mode: str = "fixed"       # "fixed" | "weibull"
    fixed_db: float = 6.0
    shape: float = 2.0
    scale_db: float = 6.0


@dataclass
class RadioConfig:
    bandwidth_hz: float = 20e6
    tx_power_w: float = 1.0
    noise_power_w: float = 0.0   # 0 means "thermal floor for this bandwidth"
    tx_gain: float = 1.0
    rx_gain: float = 1.0
    wavelength_m: float = 0.015


@dataclass
class ChannelsConfig:
    """Radio constants per hop class plus the shared propagation models."""

    air_ground: AirGroundConfig = field(default_factory=AirGroundConfig)
    rain: RainConfig = field(default_factory=RainConfig)
    bs_uav: RadioConfig = field(default_factory=lambda: RadioConfig(
        bandwidth_hz=20e6, tx_power_w=1.0))
    bs_leo: RadioConfig = field(default_factory=lambda: RadioConfig(
        bandwidth_hz=37.5e6, tx_power_w=10.0, tx_gain=1000.0, rx_gain=1000.0))
    bs_geo: RadioConfig = field(default_factory=lambda: RadioConfig(
        bandwidth_hz=25e6, tx_power_w=2.0, tx_gain=10000.0, rx_gain=10000.0))
    uav_leo: RadioConfig = field(default_factory=lambda: RadioConfig(
        bandwidth_hz=10e6, tx_power_w=5.0, tx_gain=100.0, rx_gain=1000.0))
    uav_geo: RadioConfig = field(default_factory=lambda: RadioConfig(
        bandwidth_hz=5e6, tx_power_w=10.0, tx_gain=200.0, rx_gain=10000.0))
    leo_geo: RadioConfig = field(default_factory=lambda: RadioConfig(
        bandwidth_hz=25e6, tx_power_w=10.0, tx_gain=10000.0, rx_gain=10000.0))


@dataclass
class UavConfig:
    altitude_m: float = 150.0
    radio_radius_m: float = 4500.0     # horizontal coverage around the UAV
    speed_mps: float = 10.0
    direction_change_period_s: float = 5.0


@dataclass
class LeoConfig:
    altitude_m: float = 600e3
    coverage_period_s: float = 20.0    # desk-scale compressed orbit window
    duty_cycle: float = 0.4            # two phase-shifted LEOs leave coverage gaps
    track_amplitude_m: float = 400e3   # ground-track excursion for distance variation


@dataclass
class GeoConfig:
    altitude_m: float = 35786e3


@dataclass
class WorldConfig:
    n_bs: int = 8
    n_uav: int = 6
    n_leo: int = 2
    n_geo: int = 1
    n_source: int = 20
    n_dest: int = 10
    area_side_m: float = 10_000.0      # 100 km^2 square
    tick_dt_s: float = 0.01
    packet_size_bits: int = 12_000     # 1500 bytes
    queue_capacity: int = 200
    gen_rate_mean_bps: float = 1e6     # per source node
    gen_rate_rel_sigma: float = 0.1
    hotspot_fraction: float = 0.6      # sources packed into a service-intensive disk
    hotspot_radius_m: float = 1500.0
    ue_speed_mps: float = 5.0
    ue_access_rate_bps: float = 50e6
    backbone_rate_bps: float = 8e6
    bs_coverage_radius_m: float = 3200.0
    uav: UavConfig = field(default_factory=UavConfig)
    leo: LeoConfig = field(default_factory=LeoConfig)
    geo: GeoConfig = field(default_factory=GeoConfig)


@dataclass
class ObservationConfig:
    one_hop_slots: int = 12
    two_hop_slots: int = 12
    rate_norm_bps: float = 250e6       # divisor for link-rate entries


@dataclass
class AgentConfig:
    hidden: tuple[int, ...] = (64, 64)
    gamma: float = 0.99
    lr: float = 5e-4
    alpha_lr: float = 1e-3
    target_entropy: float = -4.0
    init_alpha: float = 0.25
    batch_size: int = 64
    replay_capacity: int = 100_000
    warmup: int = 600
    train_interval: int = 2
    reward_scale: float = 0.01         # training-side scaling of packet rewards
    polyak_tau: float = 5e-3           # baselines' local target update
    # DDQN baseline knobs
    ddqn_eps_start: float = 1.0
    ddqn_eps_end: float = 0.05
    ddqn_eps_decay_steps: int = 10_000
    ddqn_target_sync: int = 500
    full_action_space: bool = False    # one action per relay vs nearest-of-class


@dataclass
class FederationSettings:
    eps: float = 1e-2                  # aggregation factor
    k: int = 200                       # local train steps per round
    mode: str = "dfsac_soft"           # "dfsac_soft" | "fedavg_mean"


@dataclass
class BudgetConfig:
    train_episodes: int = 12
    episode_ticks: int = 500
    eval_ticks: int = 3000


@dataclass
class CartpoleConfig:
    pole_lengths: tuple[float, ...] = (0.3, 0.5, 0.8)
    episodes: int = 500
    max_episode_steps: int = 200
    target_entropy: float = -0.6793   # -0.98*ln(2); two-action override
    train_interval: int = 2
    warmup: int = 500
    final_window: int = 50            # episodes averaged for the summary reward


@dataclass
class DebugConfig:
    snapshot_path: str = ""            # NDJSON world dump when non-empty


@dataclass
class ExperimentConfig:
    scenario: str = "sagin_sweep"      # sagin_sweep | sagin_speed_sweep | cartpole_differentiated
    algorithm: str = "none"            # dfsac | fedavg_sac | ddqn | dfrl_ddqn | fl_ddqn
    #                                  # | greedy | none | centralized_sac
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    source_sweep: tuple[int, ...] = (20, 30, 40, 50, 60)
    uav_speed_sweep: tuple[float, ...] = (5.0, 15.0, 30.0)
    speed_sweep_sources: int = 40
    out_dir: str = "out"
    world: WorldConfig = field(default_factory=WorldConfig)
    channels: ChannelsConfig = field(default_factory=ChannelsConfig)
    observation: ObservationConfig = field(default_factory=ObservationConfig)
    agent: AgentConfig = field(default_factory=AgentConfig)
    federation: FederationSettings = field(default_factory=FederationSettings)
    budget: BudgetConfig = field(default_factory=BudgetConfig)
    cartpole: CartpoleConfig = field(default_factory=CartpoleConfig)
    debug: DebugConfig = field(default_factory=DebugConfig)

    def validate(self) -> None:
        if self.scenario not in ("sagin_sweep", "sagin_speed_sweep", "cartpole_differentiated"):
            raise ConfigError(f"scenario: unknown value {self.scenario!r}")
        known_algos = ("dfsac", "fedavg_sac", "ddqn", "dfrl_ddqn", "fl_ddqn",
                       "greedy", "none", "centralized_sac")
        if self.algorithm not in known_algos:
            raise ConfigError(f"algorithm: unknown value {self.algorithm!r}")
        if not self.seeds:
            raise ConfigError("seeds: must not be empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds: must be distinct")
        if not self.source_sweep:
            raise ConfigError("source_sweep: must not be empty")
        if not self.uav_speed_sweep:
            raise ConfigError("uav_speed_sweep: must not be empty")
        if not (0.0 < self.federation.eps <= 1.0):
            raise ConfigError("federation.eps: must be in (0, 1]")
        if self.federation.k < 1:
            raise ConfigError("federation.k: must be >= 1")
        if self.federation.mode not in ("dfsac_soft", "fedavg_mean"):
            raise ConfigError(f"federation.mode: unknown value {self.federation.mode!r}")
        if any(pl <= 0 for pl in self.cartpole.pole_lengths):
            raise ConfigError("cartpole.pole_lengths: must be positive")


def _merge_into(obj: Any, data: dict, path: str) -> Any:
    """Recursively apply a dict of overrides onto a dataclass tree."""
    if not dataclasses.is_dataclass(obj):
        raise ConfigError(f"{path}: cannot assign a mapping here")
    fields = {f.name: f for f in dataclasses.fields(obj)}
    for key, value in data.items():
        where = f"{path}.{key}" if path else key
        if key not in fields:
            raise ConfigError(f"{where}: unknown field")
        current = getattr(obj, key)
        if dataclasses.is_dataclass(current):
            if not isinstance(value, dict):
                raise ConfigError(f"{where}: expected a mapping")
            _merge_into(current, value, where)
        elif isinstance(current, tuple):
            if not isinstance(value, (list, tuple)):
                raise ConfigError(f"{where}: expected a list")
            setattr(obj, key, tuple(value))
        else:
            if isinstance(value, (dict, list)):
                raise ConfigError(f"{where}: expected a scalar")
            setattr(obj, key, type(current)(value) if value is not None else value)
    return obj


def config_from_dict(data: dict) -> ExperimentConfig:
    cfg = ExperimentConfig()
    _merge_into(cfg, data or {}, "")
    cfg.validate()
    return cfg


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return dataclasses.asdict(cfg)


def load_config(path: str | Path) -> ExperimentConfig:
    """Load a YAML/JSON config file; a run sidecar (with a "config" key) also works."""
    text = Path(path).read_text()
    data = yaml.safe_load(text) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    return config_from_dict(data)


def dump_resolved(cfg: ExperimentConfig) -> str:
    """Canonical JSON of the fully resolved config."""
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True)
