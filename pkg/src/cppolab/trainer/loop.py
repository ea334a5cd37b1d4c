"""CPPO outer loop, the PPO / PPO-Lagrangian baselines, and run bookkeeping."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..advantage import center_and_budget, compute_advantages
from ..config import TrainConfig, config_hash
from ..diffnet import (
    init_categorical_policy,
    init_gaussian_policy,
    init_value,
    make_optimizer,
    value_loss_grad,
)
from ..errors import SolverFailure
from ..estep import Mode, SolverProblem, ratio_radius, solve_ladder, solve_with_bounds
from ..kernels import BACKEND
from ..mstep import TrackingTarget, mstep_update
from ..rng import stream
from .modes import LagrangianState, update_mode
from .rollout import collect, make_task

log = logging.getLogger(__name__)

CSV_COLUMNS = ("iter", "env_steps", "ep_return_mean", "ep_return_std", "ep_cost_mean",
               "mode", "fwd_kl", "solver_iters", "lambda")


@dataclass
class TrainState:
    cfg: TrainConfig
    policy: object
    value_r: object
    value_c: object
    opt_pi: object
    opt_vr: object
    opt_vc: object
    mode: Mode = Mode.NORMAL
    lagrange: LagrangianState | None = None
    iteration: int = 0
    env_steps: int = 0
    rows: list = field(default_factory=list)
    events: list = field(default_factory=list)


def init_state(cfg: TrainConfig, task) -> TrainState:
    rng = stream(cfg.seed, "init")
    if task.discrete:
        policy = init_categorical_policy(task.obs_dim, task.n_out, rng, cfg.hidden)
    else:
        policy = init_gaussian_policy(task.obs_dim, task.n_out, rng, cfg.hidden)
    lr = cfg.mstep.lr if cfg.algo == "cppo" else cfg.ppo.lr
    opt_name = cfg.mstep.optimizer if cfg.algo == "cppo" else "adam"
    lagrange = LagrangianState(cfg.lagrange.init, cfg.lagrange.lr) if cfg.algo == "ppo-lag" else None
    return TrainState(cfg, policy, init_value(task.obs_dim, rng, cfg.hidden),
                      init_value(task.obs_dim, rng, cfg.hidden), make_optimizer(opt_name, lr),
                      make_optimizer("adam", cfg.value_lr), make_optimizer("adam", cfg.value_lr),
                      lagrange=lagrange)


def fit_value(params, opt, obs, targets, epochs: int, minibatch, rng):
    n = len(targets)
    mb = n if minibatch is None else min(minibatch, n)
    theta = params.ravel()
    for _ in range(epochs):
        order = rng.permutation(n)
        for lo in range(0, n, mb):
            idx = order[lo:lo + mb]
            _, grad = value_loss_grad(params, obs[idx], targets[idx])
            theta = opt.step(theta, grad)
            params = params.unravel(theta)
    return params


def _fit_values(state: TrainState, batch, rng):
    cfg = state.cfg
    mb = cfg.mstep.minibatch if cfg.algo == "cppo" else cfg.ppo.minibatch
    state.value_r = fit_value(state.value_r, state.opt_vr, batch.obs, batch.returns,
                              cfg.value_epochs, mb, rng)
    state.value_c = fit_value(state.value_c, state.opt_vc, batch.obs, batch.cost_returns,
                              cfg.value_epochs, mb, rng)


def _episode_stats(batch):
    if len(batch.ep_returns) == 0:
        return math.nan, math.nan, math.nan
    std = float(np.std(batch.ep_returns, ddof=1)) if len(batch.ep_returns) > 1 else 0.0
    return float(np.mean(batch.ep_returns)), std, float(np.mean(batch.ep_costs))


def _row(state, batch, mode, fwd_kl, solver_iters):
    ret_mean, ret_std, cost_mean = _episode_stats(batch)
    lam = state.lagrange.value if state.lagrange is not None else math.nan
    return {"iter": state.iteration, "env_steps": state.env_steps,
            "ep_return_mean": ret_mean, "ep_return_std": ret_std, "ep_cost_mean": cost_mean,
            "mode": mode, "fwd_kl": fwd_kl, "solver_iters": solver_iters, "lambda": lam}


def estep_targets(adv, mode: Mode, cfg: TrainConfig) -> tuple[TrackingTarget, int]:
    """Solve for the target ratios; recovery also builds the ladder rungs."""
    n = len(adv.A)
    R = ratio_radius(n, cfg.estep.kl, cfg.estep.radius_scheme)
    prob = SolverProblem(adv.A, adv.A_c, adv.budget, R, -1.0 + cfg.estep.lower_eps)
    sol = solve_with_bounds(prob, mode)
    ladder = []
    iters = sol.iterations
    if mode is Mode.RECOVERY:
        for frac, rung in zip(cfg.mstep.ladder, solve_ladder(prob, mode, cfg.mstep.ladder)):
            ladder.append((frac * R, rung.v + 1.0))
            iters += rung.iterations
    return TrackingTarget(sol.v + 1.0, R, mode, ladder), iters


def cppo_iteration(state: TrainState, batch, rngs) -> TrainState:
    cfg = state.cfg
    compute_advantages(batch, cfg.gamma, cfg.lam, cfg.cost_gamma, cfg.cost_lam)
    adv = center_and_budget(batch, cfg.gamma, cfg.cost_limit)
    if cfg.recovery:
        state.mode = update_mode(adv.J_c, cfg.cost_limit, cfg.rho, state.mode)
    fwd_kl = exact_kl = 0.0
    solver_iters = masked = 0
    if adv.bootstrapped:
        state.events.append({"iter": state.iteration, "event": "no_completed_episodes"})
    try:
        target, solver_iters = estep_targets(adv, state.mode, cfg)
        masked = int(np.sum(target.v <= cfg.estep.lower_eps + 1e-12))
    except SolverFailure as exc:
        state.events.append({"iter": state.iteration, "event": "solver_failure", "detail": str(exc)})
        log.warning("iteration %d: E-step failed (%s); policy update skipped", state.iteration, exc)
    else:
        state.policy, diag = mstep_update(state.policy, batch.obs, batch.actions, batch.logp,
                                          target, cfg.mstep, rngs["minibatch"], A_c=adv.A_c,
                                          optimizer=state.opt_pi)
        fwd_kl = diag["fwd_kl"]
        exact_kl = diag["exact_kl"]
        if diag["failed"]:
            state.events.append({"iter": state.iteration, "event": "mstep_diverged"})
            log.warning("iteration %d: M-step diverged; parameters restored", state.iteration)
    _fit_values(state, batch, rngs["value"])
    row = _row(state, batch, state.mode.value, fwd_kl, solver_iters)
    row.update(J_c=adv.J_c, J_c_discounted=adv.J_c_discounted, bootstrapped=adv.bootstrapped,
               d_prime=adv.d_prime, exact_kl=exact_kl, masked=masked)
    state.rows.append(row)
    return state


def _normalize(x):
    std = float(np.std(x))
    return (x - x.mean()) / (std + 1e-8)


def ppo_iteration(state: TrainState, batch, rngs) -> TrainState:
    """Clipped-surrogate update; with a multiplier it is the Lagrangian variant.

    Epochs stop early once the sample KL estimate passes 1.5x the target.
    """
    cfg = state.cfg
    compute_advantages(batch, cfg.gamma, cfg.lam, cfg.cost_gamma, cfg.cost_lam)
    adv = batch.adv
    if state.lagrange is not None:
        lam = state.lagrange.value
        adv = (adv - lam * batch.cost_adv) / (1.0 + lam)
    adv = _normalize(adv)
    n = len(adv)
    mb = n if cfg.ppo.minibatch is None else min(cfg.ppo.minibatch, n)
    eps = cfg.ppo.clip
    policy = state.policy
    theta = policy.ravel()
    kl = 0.0
    for _ in range(cfg.ppo.epochs):
        order = rngs["minibatch"].permutation(n)
        for lo in range(0, n, mb):
            idx = order[lo:lo + mb]
            lp = policy.log_prob(batch.obs[idx], batch.actions[idx])
            r = np.exp(lp - batch.logp[idx])
            a = adv[idx]
            clipped = ((a > 0) & (r > 1 + eps)) | ((a < 0) & (r < 1 - eps))
            weights = -np.where(clipped, 0.0, a * r) / len(idx)
            _, grad = policy.log_prob_grad(batch.obs[idx], batch.actions[idx], weights)
            theta = state.opt_pi.step(theta, grad)
            policy = policy.unravel(theta)
        kl = float(np.mean(batch.logp - policy.log_prob(batch.obs, batch.actions)))
        if kl > 1.5 * cfg.ppo.target_kl:
            break
    state.policy = policy
    _fit_values(state, batch, rngs["value"])
    row = _row(state, batch, "none", kl, 0)
    if state.lagrange is not None and len(batch.ep_costs):
        state.lagrange.update(float(np.mean(batch.ep_costs)), cfg.cost_limit)
    state.rows.append(row)
    return state


def train(cfg: TrainConfig, callback=None) -> TrainState:
    """Run all iterations in memory; ``callback(state)`` fires after each."""
    cfg.validate()
    n_envs = cfg.batch_size // cfg.rollout
    task = make_task(cfg.env, n_envs, stream(cfg.seed, "env"))
    state = init_state(cfg, task)
    rngs = {"sample": stream(cfg.seed, "policy/sample"),
            "minibatch": stream(cfg.seed, "minibatch"),
            "value": stream(cfg.seed, "value/minibatch")}
    step = cppo_iteration if cfg.algo == "cppo" else ppo_iteration
    for it in range(cfg.total_steps // cfg.batch_size):
        batch = collect(task, state.policy, state.value_r, state.value_c, cfg.rollout,
                        cfg.gamma, rngs["sample"])
        state.iteration = it
        state.env_steps += len(batch)
        step(state, batch, rngs)
        if callback is not None:
            callback(state)
    return state


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def metrics_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def default_out_dir(cfg: TrainConfig) -> str:
    return os.path.join("runs", f"{cfg.env}-{cfg.algo}-seed{cfg.seed}-{config_hash(cfg)[:8]}")


def run_experiment(cfg: TrainConfig, out_dir: str | None = None) -> dict:
    """Train and write ``metrics.csv``, ``diagnostics.jsonl`` and ``manifest.json``.

    The CSV keeps the fixed column schema; the JSON lines carry every
    per-iteration field (discounted cost estimate, exact KL, masked count).
    Returns the manifest.
    """
    out_dir = out_dir or default_out_dir(cfg)
    started = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    state = train(cfg)
    metrics_path = os.path.join(out_dir, "metrics.csv")
    diag_path = os.path.join(out_dir, "diagnostics.jsonl")
    manifest_path = os.path.join(out_dir, "manifest.json")
    manifest = {
        "config": cfg.to_dict(),
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "start_time": started,
        "version": __version__,
        "kernel_backend": BACKEND,
        "outputs": {"metrics": metrics_path, "diagnostics": diag_path, "manifest": manifest_path},
        "events": state.events,
    }
    try:
        os.makedirs(out_dir, exist_ok=True)
        with open(metrics_path, "w", newline="") as fh:
            fh.write(metrics_csv(state.rows))
        with open(diag_path, "w") as fh:
            for row in state.rows:
                fh.write(json.dumps(row, sort_keys=True) + "\n")
        with open(manifest_path, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write run output: {exc.strerror}", exc.filename) from None
    return manifest
