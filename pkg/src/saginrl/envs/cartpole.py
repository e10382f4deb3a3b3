"""Cart-pole balancing environment with a configurable pole length.

Classic two-action dynamics: push the cart left or right, earn 1 per
step, lose when the pole tips past 12 degrees or the cart leaves the
track. Differentiated instances are made by varying ``pole_length``,
which changes the transition dynamics while keeping the interface.
"""

from __future__ import annotations

import math

import numpy as np

GRAVITY = 9.8
CART_MASS = 1.0
POLE_MASS = 0.1
FORCE_MAG = 10.0
TAU = 0.02                      # integration step, s
THETA_LIMIT = 12 * 2 * math.pi / 360
X_LIMIT = 2.4


class CartPole:
    """Two-action cart-pole; ``pole_length`` is the full pole length in meters."""

    n_actions = 2
    obs_dim = 4

    def __init__(self, pole_length: float = 1.0, seed: int | None = None,
                 max_episode_steps: int = 500):
        if pole_length <= 0:
            raise ValueError("pole_length must be positive")
        self.pole_length = pole_length
        self.half_length = pole_length / 2.0
        self.total_mass = CART_MASS + POLE_MASS
        self.polemass_length = POLE_MASS * self.half_length
        self.max_episode_steps = max_episode_steps
        self.rng = np.random.default_rng(seed)
        self.state = np.zeros(4)
        self.steps = 0
        self.done = True

    def reset(self, seed: int | None = None) -> np.ndarray:
        if seed is not None:
            self.rng = np.random.default_rng(seed)
        self.state = self.rng.uniform(-0.05, 0.05, size=4)
        self.steps = 0
        self.done = False
        return self.state.astype(np.float32)

    def step(self, action: int):
        """Returns (obs, reward, done, info); info flags termination vs truncation."""
        if self.done:
            raise RuntimeError("step() called on a finished episode; reset() first")
        if action not in (0, 1):
            raise ValueError("action must be 0 or 1")
        x, x_dot, theta, theta_dot = self.state
        force = FORCE_MAG if action == 1 else -FORCE_MAG
        cos_t = math.cos(theta)
        sin_t = math.sin(theta)
        temp = (force + self.polemass_length * theta_dot ** 2 * sin_t) / self.total_mass
        theta_acc = (GRAVITY * sin_t - cos_t * temp) / (
            self.half_length * (4.0 / 3.0 - POLE_MASS * cos_t ** 2 / self.total_mass))
        x_acc = temp - self.polemass_length * theta_acc * cos_t / self.total_mass
        x = x + TAU * x_dot
        x_dot = x_dot + TAU * x_acc
        theta = theta + TAU * theta_dot
        theta_dot = theta_dot + TAU * theta_acc
        self.state = np.array([x, x_dot, theta, theta_dot])
        self.steps += 1

        terminated = bool(abs(x) > X_LIMIT or abs(theta) > THETA_LIMIT)
        truncated = bool(self.steps >= self.max_episode_steps and not terminated)
        self.done = terminated or truncated
        info = {"terminated": terminated, "truncated": truncated}
        return self.state.astype(np.float32), 1.0, self.done, info


def cartpole_make(pole_length: float, seed: int | None = None,
                  max_episode_steps: int = 500) -> CartPole:
    return CartPole(pole_length=pole_length, seed=seed,
                    max_episode_steps=max_episode_steps)
