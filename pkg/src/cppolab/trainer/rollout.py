"""Environment construction and batched rollout collection."""
from __future__ import annotations

import numpy as np

from ..advantage import RolloutBatch
from ..diffnet import value_predict
from ..envs import PointCircleVec, TabularVecEnv, make_bridge_gridworld, make_chain
from ..errors import ConfigError

POINT_CIRCLE_HORIZON = 50


class VecTask:
    """A vectorized env plus the facts the trainer needs about it."""

    def __init__(self, env, horizon: int, discrete: bool, n_out: int, cmdp=None):
        self.env = env
        self.horizon = horizon
        self.discrete = discrete
        self.n_out = n_out          # actions (discrete) or action dims
        self.cmdp = cmdp

    @property
    def n(self) -> int:
        return self.env.n

    @property
    def obs_dim(self) -> int:
        return self.env.obs_dim


def make_task(name: str, n: int, rng: np.random.Generator) -> VecTask:
    if name in ("bridge", "chain"):
        cmdp = make_bridge_gridworld() if name == "bridge" else make_chain()
        return VecTask(TabularVecEnv(cmdp, n, rng), cmdp.horizon, True, cmdp.n_actions, cmdp)
    if name == "point-circle":
        return VecTask(PointCircleVec(n, rng), POINT_CIRCLE_HORIZON, False, 2)
    raise ConfigError(f"env: unknown environment {name!r}")


def collect(task: VecTask, policy, value_r, value_c, steps: int, gamma: float,
            rng: np.random.Generator) -> RolloutBatch:
    """Run every copy for ``steps`` steps from a fresh reset.

    Finished episodes reset in place. Episodes cut by the horizon or by the
    end of the rollout bootstrap from the value heads; only episodes that
    ended inside the rollout count toward the episodic statistics.
    """
    env = task.env
    n = task.n
    obs = env.reset()
    ep_len = np.zeros(n, dtype=int)
    ep_ret = np.zeros(n)
    ep_cost = np.zeros(n)
    ep_dcost = np.zeros(n)
    obs_buf = np.empty((n, steps, task.obs_dim))
    act_buf = np.empty((n, steps), dtype=int) if task.discrete else np.empty((n, steps, task.n_out))
    lp_buf = np.empty((n, steps))
    r_buf = np.empty((n, steps))
    c_buf = np.empty((n, steps))
    term_buf = np.zeros((n, steps), dtype=bool)
    cut_buf = np.zeros((n, steps), dtype=bool)
    boot_obs = {}
    returns, costs, dcosts = [], [], []
    for t in range(steps):
        actions, logp = policy.sample(obs, rng)
        next_obs, reward, cost, terminated = env.step(actions)
        obs_buf[:, t] = obs
        act_buf[:, t] = actions
        lp_buf[:, t] = logp
        r_buf[:, t] = reward
        c_buf[:, t] = cost
        ep_dcost += gamma ** ep_len * cost
        ep_ret += reward
        ep_cost += cost
        ep_len += 1
        truncated = (ep_len >= task.horizon) & ~terminated
        done = terminated | truncated
        term_buf[:, t] = terminated
        cut_buf[:, t] = truncated
        for i in np.flatnonzero(truncated):
            boot_obs[(i, t)] = next_obs[i].copy()
        if done.any():
            for i in np.flatnonzero(done):
                returns.append(ep_ret[i])
                costs.append(ep_cost[i])
                dcosts.append(ep_dcost[i])
            ep_len[done] = 0
            ep_ret[done] = ep_cost[done] = ep_dcost[done] = 0.0
            next_obs = env.reset_where(done)
        obs = next_obs

    segments, seg_boot = [], []
    for i in range(n):
        lo = 0
        for t in range(steps):
            if term_buf[i, t] or cut_buf[i, t] or t == steps - 1:
                hi = t + 1
                segments.append((i * steps + lo, i * steps + hi, bool(term_buf[i, t])))
                if term_buf[i, t]:
                    seg_boot.append(np.zeros(task.obs_dim))
                elif cut_buf[i, t]:
                    seg_boot.append(boot_obs[(i, t)])
                else:
                    seg_boot.append(obs[i])
                lo = hi
    flat_obs = obs_buf.reshape(n * steps, task.obs_dim)
    boot = np.array(seg_boot)
    actions = act_buf.reshape(n * steps) if task.discrete else act_buf.reshape(n * steps, task.n_out)
    return RolloutBatch(
        obs=flat_obs, actions=actions, logp=lp_buf.ravel(), rewards=r_buf.ravel(),
        costs=c_buf.ravel(), values=value_predict(value_r, flat_obs),
        cost_values=value_predict(value_c, flat_obs), dones=term_buf.ravel().astype(np.float64),
        segments=segments, last_values=value_predict(value_r, boot),
        last_cost_values=value_predict(value_c, boot), ep_returns=np.array(returns),
        ep_costs=np.array(costs), ep_disc_costs=np.array(dcosts))
