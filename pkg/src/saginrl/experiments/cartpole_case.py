"""Differentiated cart-pole study: one agent per pole length.

Three training regimes share the same agent core:

* dfsac: private policies, trend networks blended through the center.
* fedavg_sac: full models (policy and both critics) averaged each round.
* centralized_sac: a single agent collecting from every environment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..config import ExperimentConfig
from ..dfsac import DFSACAgent, DFSACConfig
from ..envs.cartpole import CartPole
from ..federation import (FederationConfig, FederationServer, PayloadKind,
                          RoundMessage)
from ..nn import NetSpec, init_params
from ..params import concat_paramsets, deserialize, serialize, split_paramset
from ..seeding import derive_seed

ALGO_CODES = {"dfsac": 2, "fedavg_sac": 3, "centralized_sac": 7}


@dataclass
class CartpoleCaseResult:
    rewards: list[list[float]]         # [env][episode] total reward
    policy_losses: list[list[float]]   # [env][episode] mean loss, nan pre-warmup
    final_mean_reward: float           # mean over envs of the last-window mean
    audit: list | None = None          # federation audit log when applicable


def _agent_cfg(cfg: ExperimentConfig, target_mode: str) -> DFSACConfig:
    a = cfg.agent
    return DFSACConfig(
        obs_dim=CartPole.obs_dim, n_actions=CartPole.n_actions,
        hidden=tuple(a.hidden), gamma=a.gamma, lr=a.lr, alpha_lr=a.alpha_lr,
        target_entropy=cfg.cartpole.target_entropy, init_alpha=a.init_alpha,
        batch_size=a.batch_size, replay_capacity=a.replay_capacity,
        warmup=cfg.cartpole.warmup, target_mode=target_mode,
        polyak_tau=a.polyak_tau)


def _final_mean(rewards: list[list[float]], window: int) -> float:
    per_env = [float(np.mean(r[-window:])) for r in rewards]
    return float(np.mean(per_env))


def run_cartpole_case(cfg: ExperimentConfig, algorithm: str, seed: int) -> CartpoleCaseResult:
    if algorithm not in ALGO_CODES:
        raise ValueError(f"algorithm {algorithm!r} not part of the cart-pole case")
    if algorithm == "centralized_sac":
        return _run_centralized(cfg, seed)
    return _run_federated(cfg, algorithm, seed)


def _run_federated(cfg: ExperimentConfig, algorithm: str, seed: int) -> CartpoleCaseResult:
    code = ALGO_CODES[algorithm]
    lengths = cfg.cartpole.pole_lengths
    n = len(lengths)
    target_mode = "federated" if algorithm == "dfsac" else "polyak"
    agents = [DFSACAgent(_agent_cfg(cfg, target_mode),
                         seed=derive_seed(seed, code, 10 + i))
              for i in range(n)]
    envs = [CartPole(lengths[i], max_episode_steps=cfg.cartpole.max_episode_steps,
                     seed=derive_seed(seed, code, 50 + i))
            for i in range(n)]

    mode = "dfsac_soft" if algorithm == "dfsac" else "fedavg_mean"
    fed_cfg = FederationConfig(eps=cfg.federation.eps, k=cfg.federation.k,
                               roster=tuple(range(n)), mode=mode)
    if algorithm == "dfsac":
        # center initializes the global trend networks; locals start equalized
        center_rng = np.random.default_rng(derive_seed(seed, code, 777))
        spec = agents[0].trend_spec
        g1 = init_params(spec, center_rng)
        g2 = init_params(spec, center_rng)
        server = FederationServer(fed_cfg, {PayloadKind.TREND1: g1,
                                            PayloadKind.TREND2: g2})
        for a in agents:
            a.trend1, a.trend2 = g1, g2
            a.set_global_trends(g1, g2)
    else:
        server = FederationServer(fed_cfg)

    rewards: list[list[float]] = [[] for _ in range(n)]
    losses: list[list[float]] = [[] for _ in range(n)]
    ep_reward = [0.0] * n
    ep_losses: list[list[float]] = [[] for _ in range(n)]
    episodes_done = [0] * n
    obs = [env.reset() for env in envs]
    target = cfg.cartpole.episodes
    step = 0

    while min(episodes_done) < target:
        step += 1
        for i in range(n):
            a = agents[i].select_action(obs[i], "sample")
            nxt, r, done, info = envs[i].step(a)
            # bootstrap through time-limit truncation
            agents[i].observe_transition(obs[i], a, r, nxt, info["terminated"])
            ep_reward[i] += r
            obs[i] = nxt
            if done:
                if episodes_done[i] < target:
                    rewards[i].append(ep_reward[i])
                    losses[i].append(float(np.mean(ep_losses[i])) if ep_losses[i]
                                     else math.nan)
                episodes_done[i] += 1
                ep_reward[i] = 0.0
                ep_losses[i] = []
                obs[i] = envs[i].reset()
        if step % cfg.cartpole.train_interval == 0:
            trained = False
            for i in range(n):
                diag = agents[i].train_step()
                if diag is not None:
                    trained = True
                    ep_losses[i].append(diag["policy_loss"])
            if trained and agents[0].train_steps % cfg.federation.k == 0:
                _run_federation_round(server, agents, algorithm)
    return CartpoleCaseResult(rewards=rewards, policy_losses=losses,
                              final_mean_reward=_final_mean(rewards, cfg.cartpole.final_window),
                              audit=list(server.audit))


def _run_federation_round(server: FederationServer, agents: list[DFSACAgent],
                          algorithm: str) -> None:
    rd = server.round_no
    msgs = []
    for i, agent in enumerate(agents):
        if algorithm == "dfsac":
            t1, t2 = agent.local_trends()
            msgs.append(RoundMessage(rd, i, PayloadKind.TREND1, serialize(t1)))
            msgs.append(RoundMessage(rd, i, PayloadKind.TREND2, serialize(t2)))
        else:
            full = concat_paramsets(agent.full_model())
            msgs.append(RoundMessage(rd, i, PayloadKind.FULL_MODEL, serialize(full)))
    result = server.run_round(msgs)
    for i, agent in enumerate(agents):
        if algorithm == "dfsac":
            agent.set_global_trends(deserialize(result[i][PayloadKind.TREND1]),
                                    deserialize(result[i][PayloadKind.TREND2]))
        else:
            sizes = [len(p.tensors) for p in agent.full_model()]
            parts = split_paramset(deserialize(result[i][PayloadKind.FULL_MODEL]), sizes)
            agent.set_full_model(*parts)


def _run_centralized(cfg: ExperimentConfig, seed: int) -> CartpoleCaseResult:
    code = ALGO_CODES["centralized_sac"]
    lengths = cfg.cartpole.pole_lengths
    n = len(lengths)
    agent = DFSACAgent(_agent_cfg(cfg, "polyak"),
                       seed=derive_seed(seed, code, 10))
    envs = [CartPole(lengths[i], max_episode_steps=cfg.cartpole.max_episode_steps,
                     seed=derive_seed(seed, code, 50 + i))
            for i in range(n)]
    rewards: list[list[float]] = [[] for _ in range(n)]
    losses: list[list[float]] = [[] for _ in range(n)]
    ep_reward = [0.0] * n
    recent_losses: list[float] = []
    episodes_done = [0] * n
    obs = [env.reset() for env in envs]
    target = cfg.cartpole.episodes
    step = 0
    while min(episodes_done) < target:
        step += 1
        for i in range(n):
            a = agent.select_action(obs[i], "sample")
            nxt, r, done, info = envs[i].step(a)
            agent.observe_transition(obs[i], a, r, nxt, info["terminated"])
            ep_reward[i] += r
            obs[i] = nxt
            if done:
                if episodes_done[i] < target:
                    rewards[i].append(ep_reward[i])
                    losses[i].append(float(np.mean(recent_losses)) if recent_losses
                                     else math.nan)
                episodes_done[i] += 1
                ep_reward[i] = 0.0
                obs[i] = envs[i].reset()
        if step % cfg.cartpole.train_interval == 0:
            diag = agent.train_step()
            if diag is not None:
                recent_losses.append(diag["policy_loss"])
                if len(recent_losses) > 200:
                    recent_losses.pop(0)
    return CartpoleCaseResult(rewards=rewards, policy_losses=losses,
                              final_mean_reward=_final_mean(rewards, cfg.cartpole.final_window),
                              audit=None)
