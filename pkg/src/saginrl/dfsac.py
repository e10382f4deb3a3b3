"""Discrete soft actor-critic agent with a federated trend/policy split.

Each agent owns a private policy network and two "trend" (action-value)
networks. Two extra trend copies act as the bootstrap target:

* target_mode="federated": the copies are the global trend networks and
  change only when the federation center distributes a new aggregate.
* target_mode="polyak": the copies track the local trend networks with an
  exponential moving average (used by the non-federated baselines).

The critic target is r + gamma * V(s'), where the soft state value uses
the elementwise minimum of the two target copies:

    V(s) = pi(s)^T [ min(q̄1(s), q̄2(s)) - alpha * log pi(s) ]

The policy minimizes pi(s)^T [alpha * log pi(s) - min(q1, q2)(s)] over the
local trend networks, and log(alpha) descends
pi(s)^T [-alpha (log pi(s) + target_entropy)].
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass

import numpy as np

from .nn import (AdamState, NetSpec, adam_step, backward, forward,
                 forward_cached, init_params, log_softmax, softmax)
from .params import ParamSet, deserialize, serialize
from .replay import ReplayMemory


@dataclass
class DFSACConfig:
    obs_dim: int
    n_actions: int
    hidden: tuple[int, ...] = (64, 64)
    gamma: float = 0.99
    lr: float = 5e-4
    alpha_lr: float = 1e-3
    target_entropy: float = -4.0
    init_alpha: float = 0.2
    batch_size: int = 64
    replay_capacity: int = 100_000
    warmup: int = 1000
    target_mode: str = "federated"   # "federated" | "polyak"
    polyak_tau: float = 5e-3


class DFSACAgent:
    def __init__(self, cfg: DFSACConfig, seed: int):
        if cfg.target_mode not in ("federated", "polyak"):
            raise ValueError(f"unknown target_mode {cfg.target_mode!r}")
        self.cfg = cfg
        self.rng = np.random.default_rng(seed)
        self.policy_spec = NetSpec(cfg.obs_dim, cfg.hidden, cfg.n_actions, head="logits")
        self.trend_spec = NetSpec(cfg.obs_dim, cfg.hidden, cfg.n_actions, head="values")
        self.policy = init_params(self.policy_spec, self.rng)
        self.trend1 = init_params(self.trend_spec, self.rng)
        self.trend2 = init_params(self.trend_spec, self.rng)
        self.global_trend1 = self.trend1
        self.global_trend2 = self.trend2
        self.log_alpha = math.log(cfg.init_alpha)
        self.opt_policy = AdamState.zeros(self.policy)
        self.opt_trend1 = AdamState.zeros(self.trend1)
        self.opt_trend2 = AdamState.zeros(self.trend2)
        self.opt_alpha = AdamState.zeros(ParamSet((np.zeros(1, dtype=np.float32),)))
        self.replay = ReplayMemory(cfg.replay_capacity, cfg.obs_dim,
                                   seed=int(self.rng.integers(2 ** 31)))
        self.train_steps = 0

    # ---- policy ------------------------------------------------------------

    @property
    def alpha(self) -> float:
        return math.exp(self.log_alpha)

    def policy_dist(self, obs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(probabilities, clamped log-probabilities) for a batch or vector."""
        logits = forward(self.policy_spec, self.policy, obs)
        return softmax(logits), log_softmax(logits)

    def select_action(self, obs: np.ndarray, mode: str = "sample") -> int:
        logits = forward(self.policy_spec, self.policy, obs)
        if mode == "greedy":
            return int(np.argmax(logits))  # first max wins ties
        if mode != "sample":
            raise ValueError(f"unknown mode {mode!r}")
        probs = softmax(logits)
        return int(self.rng.choice(len(probs), p=probs))

    # ---- losses ------------------------------------------------------------

    def soft_value(self, obs: np.ndarray) -> np.ndarray | float:
        """V(s) from the target trend copies; scalar for a single observation."""
        single = np.asarray(obs).ndim == 1
        batch = np.atleast_2d(obs)
        probs, logp = self.policy_dist(batch)
        q1 = forward(self.trend_spec, self.global_trend1, batch)
        q2 = forward(self.trend_spec, self.global_trend2, batch)
        qmin = np.minimum(q1, q2)
        v = (probs * (qmin - self.alpha * logp)).sum(axis=1)
        return float(v[0]) if single else v

    def trend_losses(self, batch: dict[str, np.ndarray]) -> tuple[float, float, np.ndarray]:
        """Pure evaluation of both trend losses plus the shared TD target."""
        target_v = self.soft_value(batch["next_obs"])
        y = batch["rewards"] + self.cfg.gamma * (1.0 - batch["dones"]) * target_v
        idx = np.arange(len(y))
        q1 = forward(self.trend_spec, self.trend1, batch["obs"])[idx, batch["actions"]]
        q2 = forward(self.trend_spec, self.trend2, batch["obs"])[idx, batch["actions"]]
        return (float(0.5 * np.mean((q1 - y) ** 2)),
                float(0.5 * np.mean((q2 - y) ** 2)), y)

    def policy_loss(self, batch: dict[str, np.ndarray]) -> float:
        probs, logp = self.policy_dist(batch["obs"])
        q1 = forward(self.trend_spec, self.trend1, batch["obs"])
        q2 = forward(self.trend_spec, self.trend2, batch["obs"])
        qmin = np.minimum(q1, q2)
        return float(np.mean((probs * (self.alpha * logp - qmin)).sum(axis=1)))

    def alpha_loss(self, batch: dict[str, np.ndarray]) -> float:
        probs, logp = self.policy_dist(batch["obs"])
        inner = (probs * (-(logp + self.cfg.target_entropy))).sum(axis=1)
        return float(self.alpha * np.mean(inner))

    # ---- updates -----------------------------------------------------------

    def trend_update(self, batch: dict[str, np.ndarray]) -> float:
        """One descent step on both trend networks toward the shared target."""
        n = len(batch["rewards"])
        if n < 1:
            raise ValueError("empty batch")
        target_v = self.soft_value(batch["next_obs"])
        y = batch["rewards"] + self.cfg.gamma * (1.0 - batch["dones"]) * target_v
        idx = np.arange(n)
        losses = []
        for which in (1, 2):
            params = self.trend1 if which == 1 else self.trend2
            out, acts = forward_cached(self.trend_spec, params, batch["obs"])
            delta = out[idx, batch["actions"]] - y
            losses.append(float(0.5 * np.mean(delta ** 2)))
            upstream = np.zeros((n, self.cfg.n_actions))
            upstream[idx, batch["actions"]] = delta / n
            grads, _ = backward(self.trend_spec, params, acts, upstream)
            if which == 1:
                self.trend1, self.opt_trend1 = adam_step(params, grads, self.cfg.lr,
                                                         self.opt_trend1)
            else:
                self.trend2, self.opt_trend2 = adam_step(params, grads, self.cfg.lr,
                                                         self.opt_trend2)
        if self.cfg.target_mode == "polyak":
            tau = np.float32(self.cfg.polyak_tau)
            keep = np.float32(1.0) - tau
            mix = lambda new, old: tau * new + keep * old
            self.global_trend1 = self.trend1.zip_map(self.global_trend1, mix)
            self.global_trend2 = self.trend2.zip_map(self.global_trend2, mix)
        return 0.5 * (losses[0] + losses[1])

    def policy_update(self, batch: dict[str, np.ndarray]) -> float:
        """One descent step on the policy; trend parameters are left untouched."""
        obs = batch["obs"]
        n = obs.shape[0]
        logits, acts = forward_cached(self.policy_spec, self.policy, obs)
        probs = softmax(logits)
        logp = log_softmax(logits)
        q1 = forward(self.trend_spec, self.trend1, obs)
        q2 = forward(self.trend_spec, self.trend2, obs)
        qmin = np.minimum(q1, q2)
        g = self.alpha * logp - qmin
        loss = float(np.mean((probs * g).sum(axis=1)))
        # d/d logits of pi^T g (alpha log pi included): pi * (g - pi^T g)
        inner = (probs * g).sum(axis=1, keepdims=True)
        upstream = probs * (g - inner) / n
        grads, _ = backward(self.policy_spec, self.policy, acts, upstream)
        self.policy, self.opt_policy = adam_step(self.policy, grads, self.cfg.lr,
                                                 self.opt_policy)
        return loss

    def alpha_update(self, batch: dict[str, np.ndarray]) -> float:
        """One descent step on log(alpha) toward the entropy threshold."""
        probs, logp = self.policy_dist(batch["obs"])
        entropy = -(probs * logp).sum(axis=1)
        loss = float(self.alpha * np.mean(entropy - self.cfg.target_entropy))
        # J is linear in alpha, so dJ/d(log alpha) = alpha * dJ/d(alpha) = J
        new, self.opt_alpha = adam_step([np.array([self.log_alpha], dtype=np.float32)],
                                        [np.array([loss], dtype=np.float32)],
                                        self.cfg.alpha_lr, self.opt_alpha)
        self.log_alpha = float(new[0][0])
        return loss

    def observe_transition(self, obs, action, reward, next_obs, done) -> None:
        self.replay.push(obs, action, reward, next_obs, done)

    def train_step(self) -> dict[str, float] | None:
        """Sample one batch and run trend, policy, and alpha updates in order.

        Returns None (no-op) while the replay is below the warmup size.
        """
        cfg = self.cfg
        if len(self.replay) < max(cfg.batch_size, cfg.warmup):
            return None
        batch = self.replay.sample(cfg.batch_size)
        trend_loss = self.trend_update(batch)
        policy_loss = self.policy_update(batch)
        alpha_loss = self.alpha_update(batch)
        self.train_steps += 1
        return {"trend_loss": trend_loss, "policy_loss": policy_loss,
                "alpha_loss": alpha_loss, "alpha": self.alpha}

    # ---- federation hooks ----------------------------------------------------

    def local_trends(self) -> tuple[ParamSet, ParamSet]:
        return self.trend1, self.trend2

    def set_global_trends(self, g1: ParamSet, g2: ParamSet) -> None:
        self.global_trend1 = g1
        self.global_trend2 = g2

    def full_model(self) -> list[ParamSet]:
        return [self.policy, self.trend1, self.trend2]

    def set_full_model(self, policy: ParamSet, t1: ParamSet, t2: ParamSet) -> None:
        self.policy = policy
        self.trend1 = t1
        self.trend2 = t2

    # ---- checkpointing -------------------------------------------------------

    def save(self, path) -> None:
        blobs = [serialize(p) for p in (self.policy, self.trend1, self.trend2,
                                        self.global_trend1, self.global_trend2)]
        head = json.dumps({"log_alpha": self.log_alpha, "train_steps": self.train_steps,
                           "gamma": self.cfg.gamma,
                           "sizes": [len(b) for b in blobs]}).encode()
        with open(path, "wb") as f:
            f.write(b"DFC1")
            f.write(struct.pack(">I", len(head)))
            f.write(head)
            for b in blobs:
                f.write(b)

    def load(self, path) -> None:
        with open(path, "rb") as f:
            data = f.read()
        if data[:4] != b"DFC1":
            raise ValueError("not a checkpoint file")
        (hlen,) = struct.unpack(">I", data[4:8])
        head = json.loads(data[8:8 + hlen])
        at = 8 + hlen
        blobs = []
        for size in head["sizes"]:
            blobs.append(deserialize(data[at:at + size]))
            at += size
        (self.policy, self.trend1, self.trend2,
         self.global_trend1, self.global_trend2) = blobs
        self.log_alpha = head["log_alpha"]
        self.train_steps = head["train_steps"]
