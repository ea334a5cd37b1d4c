"""GAE for reward and cost streams, batch centering, and the cost budget."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError
from .kernels import gae_kernel


def gae(rewards, values, dones, gamma: float, lam: float) -> np.ndarray:
    """Generalized advantage estimates.

    ``values`` has one more entry than ``rewards``: the bootstrap value of the
    state after the last step. A true ``dones[t]`` cuts both the bootstrap
    and the recursion at ``t``.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=np.float64)
    n = rewards.shape[0]
    if rewards.ndim != 1 or values.shape != (n + 1,) or dones.shape != (n,):
        raise ContractError(
            f"gae wants rewards (N,), values (N+1,), dones (N,); got "
            f"{rewards.shape}, {values.shape}, {dones.shape}")
    return gae_kernel(rewards, values, dones, float(gamma), float(lam))


def center(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return x - x.mean() if x.size else x.copy()


@dataclass
class RolloutBatch:
    """Flat sampled transitions plus per-episode bookkeeping.

    ``segments`` lists ``(start, stop, terminated)`` for each contiguous
    trajectory piece; ``last_values`` / ``last_cost_values`` are the bootstrap
    predictions after each piece (ignored when ``terminated``).
    """

    obs: np.ndarray
    actions: np.ndarray
    logp: np.ndarray
    rewards: np.ndarray
    costs: np.ndarray
    values: np.ndarray
    cost_values: np.ndarray
    dones: np.ndarray
    segments: list
    last_values: np.ndarray
    last_cost_values: np.ndarray
    ep_returns: np.ndarray
    ep_costs: np.ndarray
    ep_disc_costs: np.ndarray
    adv: np.ndarray | None = None
    cost_adv: np.ndarray | None = None
    returns: np.ndarray | None = None
    cost_returns: np.ndarray | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.rewards)
        for name in ("obs", "actions", "logp", "costs", "values", "cost_values", "dones"):
            if len(getattr(self, name)) != n:
                raise ContractError(f"RolloutBatch.{name} is not length-aligned ({n})")
        if not np.isfinite(self.logp).all():
            raise ContractError("old log-densities must be finite")

    def __len__(self):
        return len(self.rewards)


def compute_advantages(batch: RolloutBatch, gamma, lam, cost_gamma, cost_lam) -> RolloutBatch:
    """Fill raw (uncentered) GAE advantages and value targets, segment by segment."""
    n = len(batch)
    adv = np.empty(n)
    cadv = np.empty(n)
    for k, (lo, hi, terminated) in enumerate(batch.segments):
        boot = 0.0 if terminated else batch.last_values[k]
        cboot = 0.0 if terminated else batch.last_cost_values[k]
        dones = batch.dones[lo:hi]
        adv[lo:hi] = gae(batch.rewards[lo:hi], np.append(batch.values[lo:hi], boot),
                         dones, gamma, lam)
        cadv[lo:hi] = gae(batch.costs[lo:hi], np.append(batch.cost_values[lo:hi], cboot),
                          dones, cost_gamma, cost_lam)
    batch.adv = adv
    batch.cost_adv = cadv
    batch.returns = adv + batch.values
    batch.cost_returns = cadv + batch.cost_values
    return batch


def scaled_cost_margin(gamma: float, d: float, j_c: float) -> float:
    return (1.0 - gamma) * (d - j_c)


@dataclass
class AdvantageBatch:
    A: np.ndarray
    A_c: np.ndarray
    d_prime: float
    J_c: float
    J_c_discounted: float
    bootstrapped: bool = False

    @property
    def budget(self) -> float:
        """Total cost budget ``N * d'`` for the ratio problem."""
        return len(self.A) * self.d_prime


def center_and_budget(batch: RolloutBatch, gamma: float, d: float) -> AdvantageBatch:
    if batch.adv is None or batch.cost_adv is None:
        raise ContractError("compute advantages before centering")
    bootstrapped = len(batch.ep_costs) == 0
    if bootstrapped:
        starts = [lo for lo, _, _ in batch.segments]
        j_disc = float(np.mean(batch.cost_values[starts]))
        j_c = j_disc
    else:
        j_c = float(np.mean(batch.ep_costs))
        j_disc = float(np.mean(batch.ep_disc_costs))
    return AdvantageBatch(center(batch.adv), center(batch.cost_adv),
                          scaled_cost_margin(gamma, d, j_c), j_c, j_disc, bootstrapped)
