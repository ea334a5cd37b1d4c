"""Tabular CMDPs with exact policy evaluation."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError


@dataclass
class TabularCmdp:
    """``P[s, a, s']``, ``r[s, a]``, ``c[s, a]``, discount, start distribution, threshold.

    ``terminal`` marks absorbing states where sampled episodes end; they must
    self-loop with zero reward and cost.
    """

    P: np.ndarray
    r: np.ndarray
    c: np.ndarray
    gamma: float
    mu: np.ndarray
    d: float
    terminal: np.ndarray | None = None
    horizon: int = 50

    def __post_init__(self):
        self.P = np.asarray(self.P, dtype=np.float64)
        self.r = np.asarray(self.r, dtype=np.float64)
        self.c = np.asarray(self.c, dtype=np.float64)
        self.mu = np.asarray(self.mu, dtype=np.float64)
        n_s, n_a = self.r.shape
        if self.P.shape != (n_s, n_a, n_s) or self.c.shape != (n_s, n_a):
            raise ConfigError("P, r, c shapes disagree")
        if (self.P < 0).any() or np.abs(self.P.sum(axis=2) - 1.0).max() > 1e-12:
            raise ConfigError("each P[s, a, :] must be a probability vector")
        if self.mu.shape != (n_s,) or (self.mu < 0).any() or abs(self.mu.sum() - 1.0) > 1e-12:
            raise ConfigError("mu must be a probability vector over states")
        if not 0.0 < self.gamma < 1.0:
            raise ConfigError("gamma must lie in (0, 1)")
        if self.terminal is None:
            self.terminal = np.zeros(n_s, dtype=bool)
        self.terminal = np.asarray(self.terminal, dtype=bool)

    @property
    def n_states(self) -> int:
        return self.r.shape[0]

    @property
    def n_actions(self) -> int:
        return self.r.shape[1]


def _check_policy(cmdp: TabularCmdp, pi) -> np.ndarray:
    pi = np.asarray(pi, dtype=np.float64)
    if pi.shape != (cmdp.n_states, cmdp.n_actions):
        raise ConfigError(f"policy table shape {pi.shape} != {(cmdp.n_states, cmdp.n_actions)}")
    if (pi < 0).any() or np.abs(pi.sum(axis=1) - 1.0).max() > 1e-9:
        raise ConfigError("policy rows must be probability vectors")
    return pi


def state_values(cmdp: TabularCmdp, pi) -> tuple[np.ndarray, np.ndarray]:
    """Solve ``(I - gamma P_pi) V = r_pi`` for reward and cost streams."""
    pi = _check_policy(cmdp, pi)
    P_pi = np.einsum("sa,sat->st", pi, cmdp.P)
    rhs = np.stack([(pi * cmdp.r).sum(axis=1), (pi * cmdp.c).sum(axis=1)], axis=1)
    V = np.linalg.solve(np.eye(cmdp.n_states) - cmdp.gamma * P_pi, rhs)
    return V[:, 0], V[:, 1]


def tabular_exact_eval(cmdp: TabularCmdp, pi) -> tuple[float, float]:
    """Exact discounted ``(J_r, J_c)`` under the start distribution."""
    v_r, v_c = state_values(cmdp, pi)
    return float(cmdp.mu @ v_r), float(cmdp.mu @ v_c)


def episode_eval(cmdp: TabularCmdp, pi, horizon: int | None = None) -> tuple[float, float]:
    """Exact expected undiscounted return and cost of a ``horizon``-step episode.

    Matches what sampled rollouts report: the episode stops at a terminal state
    or after ``horizon`` steps.
    """
    pi = _check_policy(cmdp, pi)
    horizon = cmdp.horizon if horizon is None else horizon
    live = ~cmdp.terminal
    P_pi = np.einsum("sa,sat->st", pi, cmdp.P)
    r_pi = (pi * cmdp.r).sum(axis=1) * live
    c_pi = (pi * cmdp.c).sum(axis=1) * live
    dist = cmdp.mu * live
    ret = cost = 0.0
    for _ in range(horizon):
        ret += dist @ r_pi
        cost += dist @ c_pi
        dist = (dist @ P_pi) * live
    return float(ret), float(cost)


def value_iteration(cmdp: TabularCmdp, stream: str = "reward", tol=1e-12, max_iter=100_000):
    """Greedy deterministic policy for the reward (or negated cost) stream."""
    R = cmdp.r if stream == "reward" else -cmdp.c
    V = np.zeros(cmdp.n_states)
    for _ in range(max_iter):
        Q = R + cmdp.gamma * cmdp.P @ V
        V_new = Q.max(axis=1)
        if np.abs(V_new - V).max() < tol:
            V = V_new
            break
        V = V_new
    Q = R + cmdp.gamma * cmdp.P @ V
    return np.eye(cmdp.n_actions)[Q.argmax(axis=1)], V


def enumerate_deterministic(cmdp: TabularCmdp, horizon: int | None = None):
    """Yield ``(actions, J_r, J_c, ep_return, ep_cost)`` for every deterministic policy.

    Terminal states are pinned to action 0. Only usable on tiny instances.
    """
    free = np.flatnonzero(~cmdp.terminal)
    eye = np.eye(cmdp.n_actions)
    for choice in itertools.product(range(cmdp.n_actions), repeat=len(free)):
        acts = np.zeros(cmdp.n_states, dtype=int)
        acts[free] = choice
        pi = eye[acts]
        j_r, j_c = tabular_exact_eval(cmdp, pi)
        ep_r, ep_c = episode_eval(cmdp, pi, horizon)
        yield acts, j_r, j_c, ep_r, ep_c


def one_hot(states, n_states) -> np.ndarray:
    return np.eye(n_states)[np.asarray(states, dtype=int)]


class TabularVecEnv:
    """``n`` independent copies of a tabular CMDP with one-hot observations."""

    def __init__(self, cmdp: TabularCmdp, n: int, rng: np.random.Generator):
        self.cmdp = cmdp
        self.n = n
        self.rng = rng
        self._cum = np.cumsum(cmdp.P, axis=2)
        self.state = np.zeros(n, dtype=int)

    @property
    def obs_dim(self) -> int:
        return self.cmdp.n_states

    def observe(self) -> np.ndarray:
        return one_hot(self.state, self.cmdp.n_states)

    def reset(self) -> np.ndarray:
        return self.reset_where(np.ones(self.n, dtype=bool))

    def reset_where(self, mask) -> np.ndarray:
        """Redraw start states for the copies selected by ``mask``."""
        mask = np.asarray(mask, dtype=bool)
        u = self.rng.random(int(mask.sum()))
        self.state[mask] = np.minimum(np.searchsorted(np.cumsum(self.cmdp.mu), u, side="right"),
                                      self.cmdp.n_states - 1)
        return self.observe()

    def step(self, actions):
        a = np.asarray(actions, dtype=int)
        s = self.state
        reward = self.cmdp.r[s, a]
        cost = self.cmdp.c[s, a]
        u = self.rng.random(self.n)[:, None]
        nxt = (self._cum[s, a] < u).sum(axis=1)
        self.state = np.minimum(nxt, self.cmdp.n_states - 1)
        terminated = self.cmdp.terminal[self.state]
        return self.observe(), reward, cost, terminated
