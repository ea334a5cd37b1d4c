"""Dependency-free point mass on a plane, rewarded for circling, charged for leaving a corridor.

Damped double integrator with time step ``dt``::

    x  <- x + vx * dt
    vx <- 0.9 * vx + clip(a_x, -1, 1) * dt        (same for y)

Reward and cost are evaluated on the state the action is taken from::

    reward = (-y * vx + x * vy) / (1 + | ||(x, y)|| - r_c |)
    cost   = 1 if |x| > x_lim else 0
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError

DAMPING = 0.9
OBS_DIM = 6
ACT_DIM = 2


@dataclass
class Transition:
    state: np.ndarray
    action: np.ndarray
    reward: float
    cost: float
    next_state: np.ndarray
    done: bool


def reward_cost(x, y, vx, vy, radius, x_lim):
    reward = (-y * vx + x * vy) / (1.0 + np.abs(np.hypot(x, y) - radius))
    cost = (np.abs(x) > x_lim).astype(np.float64)
    return reward, cost


def advance(x, y, vx, vy, ax, ay, dt):
    ax = np.clip(ax, -1.0, 1.0)
    ay = np.clip(ay, -1.0, 1.0)
    return x + vx * dt, y + vy * dt, DAMPING * vx + ax * dt, DAMPING * vy + ay * dt


def observation(x, y, vx, vy, radius, x_lim):
    return np.stack([x, y, vx, vy, np.hypot(x, y) - radius, x / x_lim], axis=-1)


class PointCircleEnv:
    """Single-instance state machine. State is ``(x, y, vx, vy)``."""

    def __init__(self, radius=1.0, x_lim=None, dt=0.1, horizon=50, init_spread=0.1):
        self.radius = radius
        self.x_lim = 0.8 * radius if x_lim is None else x_lim
        self.dt = dt
        self.horizon = horizon
        self.init_spread = init_spread
        self.state = np.zeros(4)
        self.t = 0
        self.done = True

    def reset(self, rng: np.random.Generator | None = None, state=None) -> np.ndarray:
        if state is not None:
            self.state = np.asarray(state, dtype=np.float64).copy()
        else:
            pos = rng.uniform(-self.init_spread, self.init_spread, 2) if rng is not None else np.zeros(2)
            self.state = np.array([pos[0], pos[1], 0.0, 0.0])
        self.t = 0
        self.done = False
        return self.observe()

    def observe(self) -> np.ndarray:
        return observation(*self.state, self.radius, self.x_lim)

    def step(self, action) -> Transition:
        if self.done:
            raise ContractError("step() called on a finished episode; call reset()")
        a = np.asarray(action, dtype=np.float64)
        obs = self.observe()
        x, y, vx, vy = self.state
        reward, cost = reward_cost(x, y, vx, vy, self.radius, self.x_lim)
        self.state = np.array(advance(x, y, vx, vy, a[0], a[1], self.dt))
        self.t += 1
        self.done = self.t >= self.horizon
        return Transition(obs, np.clip(a, -1.0, 1.0), float(reward), float(cost),
                          self.observe(), self.done)


class PointCircleVec:
    """``n`` lock-stepped copies; same dynamics as :class:`PointCircleEnv`."""

    def __init__(self, n: int, rng: np.random.Generator, radius=1.0, x_lim=None,
                 dt=0.1, init_spread=0.1):
        self.n = n
        self.rng = rng
        self.radius = radius
        self.x_lim = 0.8 * radius if x_lim is None else x_lim
        self.dt = dt
        self.init_spread = init_spread
        self.state = np.zeros((4, n))

    obs_dim = OBS_DIM

    def observe(self) -> np.ndarray:
        return observation(*self.state, self.radius, self.x_lim)

    def reset(self) -> np.ndarray:
        return self.reset_where(np.ones(self.n, dtype=bool))

    def reset_where(self, mask) -> np.ndarray:
        mask = np.asarray(mask, dtype=bool)
        k = int(mask.sum())
        self.state[:2, mask] = self.rng.uniform(-self.init_spread, self.init_spread, (2, k))
        self.state[2:, mask] = 0.0
        return self.observe()

    def step(self, actions):
        a = np.asarray(actions, dtype=np.float64)
        x, y, vx, vy = self.state
        reward, cost = reward_cost(x, y, vx, vy, self.radius, self.x_lim)
        self.state = np.array(advance(x, y, vx, vy, a[:, 0], a[:, 1], self.dt))
        return self.observe(), reward, cost, np.zeros(self.n, dtype=bool)
