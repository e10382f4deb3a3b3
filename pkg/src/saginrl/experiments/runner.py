"""Experiment driver: sweeps, metrics CSV, and the resolved-config sidecar.

The CSV is byte-stable for a given (config, seeds): rows appear in sweep
x seed loop order with canonical float formatting, and wall-clock timing
lives only in the JSON sidecar. Re-running from the sidecar reproduces
the CSV exactly.

CSV schema (metrics-v1):
    scenario,algorithm,seed,sweep_value,throughput_bps,drop_rate,
    mean_delay_s,mean_episode_reward,status
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

from .. import __version__
from ..config import ExperimentConfig, config_to_dict
from .cartpole_case import run_cartpole_case
from .sagin_case import run_sagin_point

CSV_HEADER = ("scenario,algorithm,seed,sweep_value,throughput_bps,drop_rate,"
              "mean_delay_s,mean_episode_reward,status")
SCHEMA = "metrics-v1"


@dataclass
class MetricsRow:
    scenario: str
    algorithm: str
    seed: int
    sweep_value: float
    throughput_bps: float
    drop_rate: float
    mean_delay_s: float
    mean_episode_reward: float
    status: str = "ok"

    def as_csv(self) -> str:
        return ",".join([
            self.scenario, self.algorithm, str(self.seed), fmt(self.sweep_value),
            fmt(self.throughput_bps), fmt(self.drop_rate), fmt(self.mean_delay_s),
            fmt(self.mean_episode_reward), self.status,
        ])


def fmt(v: float) -> str:
    """Canonical, reproducible float formatting for CSV cells."""
    if isinstance(v, int) or (isinstance(v, float) and v.is_integer() and abs(v) < 1e15):
        return str(int(v))
    return f"{v:.12g}"


def _sweep_points(cfg: ExperimentConfig) -> list[float]:
    if cfg.scenario == "sagin_sweep":
        return [float(v) for v in cfg.source_sweep]
    if cfg.scenario == "sagin_speed_sweep":
        return [float(v) for v in cfg.uav_speed_sweep]
    return [0.0]


def _run_cell(cfg: ExperimentConfig, sweep_value: float, seed: int,
              out_dir: Path) -> MetricsRow:
    if cfg.scenario == "cartpole_differentiated":
        result = run_cartpole_case(cfg, cfg.algorithm, seed)
        _write_curves(out_dir, cfg.algorithm, seed, result)
        return MetricsRow(cfg.scenario, cfg.algorithm, seed, sweep_value,
                          throughput_bps=0.0, drop_rate=0.0, mean_delay_s=0.0,
                          mean_episode_reward=result.final_mean_reward)
    if cfg.scenario == "sagin_sweep":
        n_source, speed = int(sweep_value), cfg.world.uav.speed_mps
    else:
        n_source, speed = cfg.speed_sweep_sources, float(sweep_value)
    point = run_sagin_point(cfg, cfg.algorithm, n_source, speed, seed)
    m = point.metrics
    return MetricsRow(cfg.scenario, cfg.algorithm, seed, sweep_value,
                      throughput_bps=m.throughput_bps, drop_rate=m.drop_rate,
                      mean_delay_s=m.mean_delay_s,
                      mean_episode_reward=point.mean_episode_reward)


def _write_curves(out_dir: Path, algorithm: str, seed: int, result) -> None:
    """Per-episode learning curves as plot-ready CSV."""
    path = out_dir / f"curves_{algorithm}_seed{seed}.csv"
    lines = ["env,episode,reward,policy_loss"]
    for env_i, (rw, pl) in enumerate(zip(result.rewards, result.policy_losses)):
        for ep, (r, l) in enumerate(zip(rw, pl)):
            loss = "nan" if math.isnan(l) else fmt(l)
            lines.append(f"{env_i},{ep},{fmt(r)},{loss}")
    path.write_text("\n".join(lines) + "\n")


def run(cfg: ExperimentConfig, out_dir: str | Path) -> tuple[Path, Path]:
    """Execute the configured scenario; returns (csv path, sidecar path)."""
    cfg.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows: list[MetricsRow] = []
    wall: list[float] = []
    for sweep_value in _sweep_points(cfg):
        for seed in cfg.seeds:
            t0 = time.perf_counter()
            try:
                row = _run_cell(cfg, sweep_value, seed, out)
            except Exception as e:  # keep the partial CSV, mark the failure
                row = MetricsRow(cfg.scenario, cfg.algorithm, seed, sweep_value,
                                 0.0, 0.0, 0.0, 0.0,
                                 status=f"error:{type(e).__name__}")
            wall.append(time.perf_counter() - t0)
            rows.append(row)
    csv_path = out / f"metrics_{cfg.scenario}_{cfg.algorithm}.csv"
    csv_path.write_text("\n".join([CSV_HEADER] + [r.as_csv() for r in rows]) + "\n")
    sidecar_path = out / f"metrics_{cfg.scenario}_{cfg.algorithm}.config.json"
    sidecar = {
        "schema": SCHEMA,
        "code_version": __version__,
        "config": config_to_dict(cfg),
        "wall_clock_s": [round(w, 3) for w in wall],
    }
    sidecar_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return csv_path, sidecar_path
