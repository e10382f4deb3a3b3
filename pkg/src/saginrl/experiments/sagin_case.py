"""One sweep point of the network study: train a policy, then evaluate it.

Evaluation always runs on a world seeded independently of the algorithm,
so every policy is measured against the same traffic and mobility draws
at a given experiment seed.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from ..baselines import DDQNAgent, DDQNConfig, GreedyPolicy, NoOffloadPolicy
from ..config import ExperimentConfig
from ..dfsac import DFSACAgent, DFSACConfig
from ..envs.sagin import SaginEnv
from ..federation import (FederationConfig, FederationServer, PayloadKind,
                          RoundMessage, aggregate_mean, aggregate_soft)
from ..nn import init_params
from ..params import concat_paramsets, deserialize, serialize, split_paramset
from ..seeding import derive_seed
from ..sim.metrics import SimMetrics, collect_metrics

ALGO_CODES = {"none": 0, "greedy": 1, "dfsac": 2, "fedavg_sac": 3, "ddqn": 4,
              "dfrl_ddqn": 5, "fl_ddqn": 6, "centralized_sac": 7}
LEARNING_ALGOS = ("dfsac", "fedavg_sac", "ddqn", "dfrl_ddqn", "fl_ddqn",
                  "centralized_sac")


@dataclass
class PointResult:
    metrics: SimMetrics
    mean_episode_reward: float
    train_ticks: int


def _make_world_cfg(cfg: ExperimentConfig, n_source: int, uav_speed: float):
    wc = copy.deepcopy(cfg.world)
    wc.n_source = n_source
    wc.uav.speed_mps = uav_speed
    return wc


def _sac_cfg(cfg: ExperimentConfig, env: SaginEnv, target_mode: str) -> DFSACConfig:
    a = cfg.agent
    return DFSACConfig(obs_dim=env.obs_dim, n_actions=env.n_actions,
                       hidden=tuple(a.hidden), gamma=a.gamma, lr=a.lr,
                       alpha_lr=a.alpha_lr, target_entropy=a.target_entropy,
                       init_alpha=a.init_alpha, batch_size=a.batch_size,
                       replay_capacity=a.replay_capacity, warmup=a.warmup,
                       target_mode=target_mode, polyak_tau=a.polyak_tau)


def _ddqn_cfg(cfg: ExperimentConfig, env: SaginEnv) -> DDQNConfig:
    a = cfg.agent
    return DDQNConfig(obs_dim=env.obs_dim, n_actions=env.n_actions,
                      hidden=tuple(a.hidden), gamma=a.gamma, lr=a.lr,
                      batch_size=a.batch_size, replay_capacity=a.replay_capacity,
                      warmup=a.warmup, eps_start=a.ddqn_eps_start,
                      eps_end=a.ddqn_eps_end, eps_decay_steps=a.ddqn_eps_decay_steps,
                      target_sync=a.ddqn_target_sync)


class _SacFleet:
    """Eight SAC agents plus their federation wiring (dfsac or fedavg)."""

    def __init__(self, cfg: ExperimentConfig, env: SaginEnv, algorithm: str, seed: int):
        code = ALGO_CODES[algorithm]
        self.algorithm = algorithm
        self.cfg = cfg
        target_mode = "federated" if algorithm == "dfsac" else "polyak"
        self.bs_ids = env.agent_ids
        self.agents = {bs: DFSACAgent(_sac_cfg(cfg, env, target_mode),
                                      seed=derive_seed(seed, code, 10 + i))
                       for i, bs in enumerate(self.bs_ids)}
        mode = "dfsac_soft" if algorithm == "dfsac" else "fedavg_mean"
        fed = FederationConfig(eps=cfg.federation.eps, k=cfg.federation.k,
                               roster=tuple(self.bs_ids), mode=mode)
        if algorithm == "dfsac":
            rng = np.random.default_rng(derive_seed(seed, code, 777))
            spec = next(iter(self.agents.values())).trend_spec
            g1 = init_params(spec, rng)
            g2 = init_params(spec, rng)
            self.server = FederationServer(fed, {PayloadKind.TREND1: g1,
                                                 PayloadKind.TREND2: g2})
            for a in self.agents.values():
                a.trend1, a.trend2 = g1, g2
                a.set_global_trends(g1, g2)
        else:
            self.server = FederationServer(fed)

    def act(self, obs: dict[int, np.ndarray], mode: str) -> dict[int, int]:
        return {bs: self.agents[bs].select_action(obs[bs], mode) for bs in self.bs_ids}

    def observe(self, obs, actions, rewards, next_obs, done, scale: float) -> None:
        for bs in self.bs_ids:
            self.agents[bs].observe_transition(obs[bs], actions[bs],
                                               rewards[bs] * scale, next_obs[bs], done)

    def train(self) -> bool:
        trained = False
        for bs in self.bs_ids:
            if self.agents[bs].train_step() is not None:
                trained = True
        if trained:
            steps = self.agents[self.bs_ids[0]].train_steps
            if steps % self.cfg.federation.k == 0:
                self._round()
        return trained

    def _round(self) -> None:
        rd = self.server.round_no
        msgs = []
        for bs in self.bs_ids:
            agent = self.agents[bs]
            if self.algorithm == "dfsac":
                t1, t2 = agent.local_trends()
                msgs.append(RoundMessage(rd, bs, PayloadKind.TREND1, serialize(t1)))
                msgs.append(RoundMessage(rd, bs, PayloadKind.TREND2, serialize(t2)))
            else:
                msgs.append(RoundMessage(rd, bs, PayloadKind.FULL_MODEL,
                                         serialize(concat_paramsets(agent.full_model()))))
        result = self.server.run_round(msgs)
        for bs in self.bs_ids:
            agent = self.agents[bs]
            if self.algorithm == "dfsac":
                agent.set_global_trends(deserialize(result[bs][PayloadKind.TREND1]),
                                        deserialize(result[bs][PayloadKind.TREND2]))
            else:
                sizes = [len(p.tensors) for p in agent.full_model()]
                parts = split_paramset(deserialize(result[bs][PayloadKind.FULL_MODEL]),
                                       sizes)
                agent.set_full_model(*parts)


class _CentralizedSac:
    """One agent drives every BS; all transitions share a single replay."""

    def __init__(self, cfg: ExperimentConfig, env: SaginEnv, seed: int):
        self.bs_ids = env.agent_ids
        self.agent = DFSACAgent(_sac_cfg(cfg, env, "polyak"),
                                seed=derive_seed(seed, ALGO_CODES["centralized_sac"], 10))

    def act(self, obs, mode):
        return {bs: self.agent.select_action(obs[bs], mode) for bs in self.bs_ids}

    def observe(self, obs, actions, rewards, next_obs, done, scale):
        for bs in self.bs_ids:
            self.agent.observe_transition(obs[bs], actions[bs], rewards[bs] * scale,
                                          next_obs[bs], done)

    def train(self) -> bool:
        return self.agent.train_step() is not None


class _DdqnFleet:
    """Per-BS double DQN with optional federated target or FedAVG variants."""

    def __init__(self, cfg: ExperimentConfig, env: SaginEnv, algorithm: str, seed: int):
        code = ALGO_CODES[algorithm]
        self.algorithm = algorithm
        self.cfg = cfg
        self.bs_ids = env.agent_ids
        self.agents = {bs: DDQNAgent(_ddqn_cfg(cfg, env), seed=derive_seed(seed, code, 10 + i))
                       for i, bs in enumerate(self.bs_ids)}
        self.global_q = None
        if algorithm == "dfrl_ddqn":
            rng = np.random.default_rng(derive_seed(seed, code, 777))
            spec = next(iter(self.agents.values())).spec
            self.global_q = init_params(spec, rng)
            for a in self.agents.values():
                a.q = self.global_q
                a.q_target = self.global_q
                a.external_target = True

    def act(self, obs, mode):
        explore = mode == "sample"
        return {bs: self.agents[bs].select_action(obs[bs], explore=explore)
                for bs in self.bs_ids}

    def observe(self, obs, actions, rewards, next_obs, done, scale):
        for bs in self.bs_ids:
            self.agents[bs].observe_transition(obs[bs], actions[bs],
                                               rewards[bs] * scale, next_obs[bs], done)

    def train(self) -> bool:
        trained = False
        for bs in self.bs_ids:
            if self.agents[bs].train_step() is not None:
                trained = True
        if trained and self.algorithm in ("dfrl_ddqn", "fl_ddqn"):
            steps = self.agents[self.bs_ids[0]].train_steps
            if steps % self.cfg.federation.k == 0:
                self._round()
        return trained

    def _round(self) -> None:
        if self.algorithm == "dfrl_ddqn":
            # value nets are the shared trend here; the aggregate becomes
            # every agent's bootstrap target
            agg = self.global_q
            for bs in sorted(self.bs_ids):
                agg = aggregate_soft(agg, self.agents[bs].q, self.cfg.federation.eps)
            self.global_q = agg
            for a in self.agents.values():
                a.q_target = agg
        else:
            mean_q = aggregate_mean([self.agents[bs].q for bs in sorted(self.bs_ids)])
            for a in self.agents.values():
                a.q = mean_q


def _make_fleet(cfg: ExperimentConfig, env: SaginEnv, algorithm: str, seed: int):
    if algorithm in ("dfsac", "fedavg_sac"):
        return _SacFleet(cfg, env, algorithm, seed)
    if algorithm == "centralized_sac":
        return _CentralizedSac(cfg, env, seed)
    if algorithm in ("ddqn", "dfrl_ddqn", "fl_ddqn"):
        return _DdqnFleet(cfg, env, algorithm, seed)
    raise ValueError(f"unknown learning algorithm {algorithm!r}")


def run_sagin_point(cfg: ExperimentConfig, algorithm: str, n_source: int,
                    uav_speed: float, seed: int) -> PointResult:
    """Train (when applicable) and evaluate one (sweep value, seed) cell."""
    wc = _make_world_cfg(cfg, n_source, uav_speed)
    code = ALGO_CODES[algorithm]
    train_ticks = 0
    fleet = None

    # one region layout per experiment seed; every algorithm trains and is
    # evaluated on it, with algorithm-specific training traffic and a
    # held-out shared evaluation traffic stream
    layout_seed = derive_seed(seed, 7)

    if algorithm in LEARNING_ALGOS:
        env = SaginEnv(wc, cfg.channels, cfg.observation, cfg.budget.episode_ticks,
                       seed=0, full_action_space=cfg.agent.full_action_space)
        env.reset(seed=layout_seed, stream_seed=derive_seed(seed, code, 0))
        fleet = _make_fleet(cfg, env, algorithm, seed)
        scale = cfg.agent.reward_scale
        interval = max(1, cfg.agent.train_interval)
        for ep in range(cfg.budget.train_episodes):
            obs = env.reset(seed=layout_seed,
                            stream_seed=derive_seed(seed, code, 1000 + ep))
            done = False
            t = 0
            while not done:
                actions = fleet.act(obs, "sample")
                next_obs, rewards, done, _ = env.step(actions)
                fleet.observe(obs, actions, rewards, next_obs, done, scale)
                obs = next_obs
                t += 1
                train_ticks += 1
                if t % interval == 0:
                    fleet.train()

    eval_env = SaginEnv(wc, cfg.channels, cfg.observation, cfg.budget.eval_ticks,
                        seed=0, full_action_space=cfg.agent.full_action_space)
    obs = eval_env.reset(seed=layout_seed, stream_seed=derive_seed(seed, 9999))
    if algorithm == "none":
        policy = NoOffloadPolicy()
    elif algorithm == "greedy":
        policy = GreedyPolicy(cfg.agent.full_action_space)
    else:
        policy = None
    events_log = []
    joint_reward = 0.0
    done = False
    while not done:
        if policy is not None:
            actions = policy.actions(eval_env)
        else:
            actions = fleet.act(obs, "greedy")
        obs, rewards, done, events = eval_env.step(actions)
        joint_reward += sum(rewards.values())
        events_log.append(events)
    dt = wc.tick_dt_s
    metrics = collect_metrics(events_log, cfg.budget.eval_ticks * dt, dt)
    return PointResult(metrics=metrics, mean_episode_reward=joint_reward,
                       train_ticks=train_ticks)
