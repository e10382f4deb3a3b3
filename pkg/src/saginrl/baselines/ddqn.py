"""Per-agent double DQN on the same observation/action/reward surface."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..nn import AdamState, NetSpec, adam_step, backward, forward, forward_cached, init_params
from ..params import ParamSet
from ..replay import ReplayMemory


@dataclass
class DDQNConfig:
    obs_dim: int
    n_actions: int
    hidden: tuple[int, ...] = (64, 64)
    gamma: float = 0.99
    lr: float = 5e-4
    batch_size: int = 64
    replay_capacity: int = 100_000
    warmup: int = 1000
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_steps: int = 10_000
    target_sync: int = 500


class DDQNAgent:
    def __init__(self, cfg: DDQNConfig, seed: int):
        self.cfg = cfg
        self.rng = np.random.default_rng(seed)
        self.spec = NetSpec(cfg.obs_dim, cfg.hidden, cfg.n_actions, head="values")
        self.q = init_params(self.spec, self.rng)
        self.q_target = self.q
        self.opt = AdamState.zeros(self.q)
        self.replay = ReplayMemory(cfg.replay_capacity, cfg.obs_dim,
                                   seed=int(self.rng.integers(2 ** 31)))
        self.train_steps = 0
        self.action_steps = 0
        self.external_target = False  # True when federation owns q_target

    @property
    def epsilon(self) -> float:
        cfg = self.cfg
        frac = min(1.0, self.action_steps / max(cfg.eps_decay_steps, 1))
        return cfg.eps_start + (cfg.eps_end - cfg.eps_start) * frac

    def select_action(self, obs: np.ndarray, explore: bool = True) -> int:
        if explore:
            eps = self.epsilon
            self.action_steps += 1
            if self.rng.random() < eps:
                return int(self.rng.integers(self.cfg.n_actions))
        return int(np.argmax(forward(self.spec, self.q, obs)))

    def observe_transition(self, obs, action, reward, next_obs, done) -> None:
        self.replay.push(obs, action, reward, next_obs, done)

    def td_loss(self, batch: dict[str, np.ndarray]) -> float:
        """Squared TD error with the double-estimator target (pure evaluation)."""
        idx = np.arange(len(batch["rewards"]))
        q_next_online = forward(self.spec, self.q, batch["next_obs"])
        a_star = np.argmax(q_next_online, axis=1)
        q_next_target = forward(self.spec, self.q_target, batch["next_obs"])[idx, a_star]
        y = batch["rewards"] + self.cfg.gamma * (1.0 - batch["dones"]) * q_next_target
        q = forward(self.spec, self.q, batch["obs"])[idx, batch["actions"]]
        return float(np.mean((q - y) ** 2))

    def train_step(self) -> dict[str, float] | None:
        cfg = self.cfg
        if len(self.replay) < max(cfg.batch_size, cfg.warmup):
            return None
        batch = self.replay.sample(cfg.batch_size)
        n = len(batch["rewards"])
        idx = np.arange(n)
        q_next_online = forward(self.spec, self.q, batch["next_obs"])
        a_star = np.argmax(q_next_online, axis=1)
        q_next_target = forward(self.spec, self.q_target, batch["next_obs"])[idx, a_star]
        y = batch["rewards"] + cfg.gamma * (1.0 - batch["dones"]) * q_next_target
        out, acts = forward_cached(self.spec, self.q, batch["obs"])
        q_sa = out[idx, batch["actions"]]
        loss = float(np.mean((q_sa - y) ** 2))
        upstream = np.zeros_like(out)
        upstream[idx, batch["actions"]] = 2.0 * (q_sa - y) / n
        grads, _ = backward(self.spec, self.q, acts, upstream)
        self.q, self.opt = adam_step(self.q, grads, cfg.lr, self.opt)
        self.train_steps += 1
        if not self.external_target and self.train_steps % cfg.target_sync == 0:
            self.q_target = self.q
        return {"td_loss": loss, "epsilon": self.epsilon}
