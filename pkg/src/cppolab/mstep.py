"""First-order policy update that tracks the E-step's target ratios.

The loss is a clipped l2 tracking objective

    L = -mean(min(g * r, g * max(r, c_low))),   g = v - r held constant,

so the gradient pulls each ratio ``r`` toward its target ``v`` but stops
pushing a ratio down once it is already below ``c_low``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ContractError
from .diffnet import make_optimizer
from .estep.problem import Mode


@dataclass
class MStepConfig:
    c_low: float = 0.6
    kl_cap: float = 0.02
    epochs: int = 10
    minibatch: int | None = 256      # None means full batch
    lr: float = 1e-4
    beta: float = 0.3
    ladder: tuple = (0.25, 0.5, 0.75, 1.0)
    optimizer: str = "adam"

    def __post_init__(self):
        if not 0.0 < self.c_low < 1.0:
            raise ConfigError("c_low must lie in (0, 1)")
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError("beta must lie in [0, 1]")
        lad = tuple(float(f) for f in self.ladder)
        if not lad or any(f <= 0 or f > 1 for f in lad) or any(b <= a for a, b in zip(lad, lad[1:])):
            raise ConfigError("ladder fractions must be strictly increasing in (0, 1]")
        self.ladder = lad
        if self.epochs < 0 or (self.minibatch is not None and self.minibatch < 1):
            raise ConfigError("epochs must be >= 0 and minibatch >= 1")
        if self.lr < 0 or self.kl_cap <= 0:
            raise ConfigError("lr must be >= 0 and kl_cap > 0")


@dataclass
class TrackingTarget:
    v: np.ndarray                      # target ratios, mean one
    radius: float
    mode: Mode = Mode.NORMAL
    ladder: list = field(default_factory=list)   # [(radius, ratios)], ascending

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=np.float64)
        self.mode = Mode(self.mode)
        if self.v.size and (self.v.min() <= 0 or abs(self.v.mean() - 1.0) > 1e-8):
            raise ContractError("target ratios must be positive with mean one")


def _active(g, r, c_low):
    # min picks the unclipped branch unless r sits below the floor and g < 0
    return (r >= c_low) | (g >= 0)


def normal_loss(v, r, c_low: float = 0.6, g=None) -> float:
    """Clipped tracking loss; ``g`` overrides the tracking error ``v - r``."""
    v = np.asarray(v, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    g = v - r if g is None else np.asarray(g, dtype=np.float64)
    if r.size == 0:
        return 0.0
    return float(-np.mean(np.minimum(g * r, g * np.maximum(r, c_low))))


def loss_weights(g, r, c_low: float) -> np.ndarray:
    """Per-sample weights ``w`` with dL/dtheta = sum(w * dlog_pi/dtheta)."""
    g = np.asarray(g, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    return -np.where(_active(g, r, c_low), g * r, 0.0) / max(r.size, 1)


def recovery_direction(v, r, A_c, beta: float = 0.3) -> np.ndarray:
    """Blend of the tracking error and its projection on the cost advantages."""
    e = np.asarray(v, dtype=np.float64) - np.asarray(r, dtype=np.float64)
    A_c = np.asarray(A_c, dtype=np.float64)
    if A_c.shape != e.shape:
        raise ContractError("A_c must align with the ratios")
    norm = float(np.linalg.norm(A_c))
    if norm == 0.0:
        return e
    u = A_c / norm
    return beta * e + (1.0 - beta) * float(e @ u) * u


def select_ladder_target(target: TrackingTarget, current_norm: float) -> np.ndarray:
    """Ratios of the smallest rung whose radius exceeds ``current_norm``."""
    for radius, ratios in target.ladder:
        if radius > current_norm:
            return ratios
    return target.v


def _ratios(policy, obs, actions, old_logp):
    lp = policy.log_prob(obs, actions)
    with np.errstate(over="ignore", invalid="ignore"):
        return np.exp(lp - old_logp)


def mstep_update(policy, obs, actions, old_logp, target: TrackingTarget,
                 config: MStepConfig, rng: np.random.Generator, A_c=None, optimizer=None):
    """Run the tracking update; returns ``(policy, diagnostics)``.

    ``A_c`` (centered cost advantages) is required in recovery mode.
    ``optimizer`` may carry state across calls; a fresh one is built otherwise.
    """
    n = len(old_logp)
    if target.v.shape != (n,):
        raise ContractError(f"target has {target.v.size} ratios for {n} samples")
    recovery = target.mode is Mode.RECOVERY
    if recovery and A_c is None:
        raise ContractError("recovery update needs cost advantages")
    opt = optimizer if optimizer is not None else make_optimizer(config.optimizer, config.lr)
    start = policy
    if not np.any(target.v - 1.0):
        # the old policy is the target; skip so adaptive steps can't amplify round-off
        return policy, {"fwd_kl": 0.0, "exact_kl": 0.0, "loss_trace": [], "residual": 0.0,
                        "epochs": 0, "dropped": 0, "failed": False}
    theta = policy.ravel()
    mb = n if config.minibatch is None else min(config.minibatch, n)
    losses = []
    epochs_run = 0
    dropped = 0
    kl = 0.0
    failed = False
    for _ in range(config.epochs):
        r_all = _ratios(policy, obs, actions, old_logp)
        goal = select_ladder_target(target, float(np.linalg.norm(r_all - 1.0))) if recovery else target.v
        order = rng.permutation(n)
        for lo in range(0, n, mb):
            idx = order[lo:lo + mb]
            lp = policy.log_prob(obs[idx], actions[idx])
            with np.errstate(over="ignore", invalid="ignore"):
                r = np.exp(lp - old_logp[idx])
            ok = np.isfinite(r)
            dropped += int((~ok).sum())
            if not ok.any():
                continue
            idx, r = idx[ok], r[ok]
            if recovery:
                cost = A_c[idx] - A_c[idx].mean()
                g = recovery_direction(goal[idx], r, cost, config.beta)
            else:
                g = goal[idx] - r
            losses.append(normal_loss(goal[idx], r, config.c_low, g))
            _, grad = policy.log_prob_grad(obs[idx], actions[idx], loss_weights(g, r, config.c_low))
            theta = opt.step(theta, grad)
            policy = policy.unravel(theta)
        epochs_run += 1
        if not (policy.is_finite() and np.isfinite(losses[-1] if losses else 0.0)):
            failed = True
            break
        with np.errstate(divide="ignore", invalid="ignore"):
            kl = float(-np.mean(np.log(_ratios(policy, obs, actions, old_logp))))
        if not math.isfinite(kl):
            failed = True
            break
        if kl > config.kl_cap:
            break
    if failed:
        policy = start
        kl = 0.0
    r_end = _ratios(policy, obs, actions, old_logp)
    diag = {
        "fwd_kl": kl,
        "exact_kl": float(policy.kl_from(start, obs)),
        "loss_trace": losses,
        "residual": float(np.linalg.norm(target.v - r_end)),
        "epochs": epochs_run,
        "dropped": dropped,
        "failed": failed,
    }
    return policy, diag
