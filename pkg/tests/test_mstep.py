import math

import numpy as np
import pytest

from cppolab.diffnet import finite_difference, grad_error, init_gaussian_policy
from cppolab.errors import ConfigError, ContractError
from cppolab.estep import Mode
from cppolab.mstep import (
    MStepConfig,
    TrackingTarget,
    loss_weights,
    mstep_update,
    normal_loss,
    recovery_direction,
    select_ladder_target,
)


def test_loss_examples():
    assert normal_loss([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert normal_loss([1.2], [1.0]) == pytest.approx(-0.2)
    assert normal_loss([0.4], [0.5]) == pytest.approx(0.06)


def test_blend_examples():
    a_c = np.array([1.0, -1.0, 0.0, 0.0]) / math.sqrt(2)
    a = np.array([0.0, 0.0, 1.0, -1.0]) / math.sqrt(2)
    r = np.ones(4)
    assert np.allclose(recovery_direction(r + a, r, a_c, 0.3), 0.3 * a)
    assert np.allclose(recovery_direction(r + 2 * a_c, r, a_c, 0.3), 2 * a_c)
    assert np.allclose(recovery_direction(r + a + a_c, r, a_c, 0.3), 0.3 * a + a_c)
    assert np.allclose(recovery_direction(r + a, r, np.zeros(4), 0.3), a)
    # scale of A_c does not matter
    assert np.allclose(recovery_direction(r + a + a_c, r, 7 * a_c), 0.3 * a + a_c)


def test_ladder_lookup():
    rungs = [(f, np.full(2, f)) for f in (0.25, 0.5, 0.75, 1.0)]
    target = TrackingTarget(np.ones(2), 1.0, Mode.RECOVERY, rungs)
    assert select_ladder_target(target, 0.0)[0] == 0.25
    assert select_ladder_target(target, 0.6)[0] == 0.75
    assert select_ladder_target(target, 1.0) is target.v
    assert select_ladder_target(target, 5.0) is target.v


@pytest.mark.parametrize("kwargs", [dict(c_low=1.0), dict(beta=1.5), dict(ladder=(0.5, 0.25)),
                                    dict(ladder=(0.5, 1.5)), dict(kl_cap=0.0)])
def test_config_validation(kwargs):
    with pytest.raises(ConfigError):
        MStepConfig(**kwargs)


def test_target_validation():
    with pytest.raises(ContractError):
        TrackingTarget(np.array([0.0, 2.0]), 1.0)
    with pytest.raises(ContractError):
        TrackingTarget(np.array([1.5, 1.0]), 1.0)


def _gaussian_case(n=64, seed=0, shift=0.3):
    rng = np.random.default_rng(seed)
    pol = init_gaussian_policy(1, 1, rng, hidden=(4,), log_std=0.0)
    obs = rng.standard_normal((n, 1))
    acts, old_logp = pol.sample(obs, rng)
    # target: the density ratio of the same policy with its mean moved by ``shift``
    shifted = pol.log_prob(obs, acts - shift)
    v = np.exp(shifted - old_logp)
    v /= v.mean()
    return pol, obs, acts, old_logp, v, rng


def test_zero_learning_rate_is_a_no_op():
    pol, obs, acts, old_logp, v, rng = _gaussian_case()
    cfg = MStepConfig(lr=0.0, epochs=3, minibatch=None)
    new, diag = mstep_update(pol, obs, acts, old_logp, TrackingTarget(v, 1.0), cfg, rng)
    assert np.array_equal(new.ravel(), pol.ravel())
    assert diag["fwd_kl"] == 0.0 and diag["exact_kl"] == 0.0


def test_target_equal_to_current_has_zero_gradient():
    pol, obs, acts, old_logp, _, _ = _gaussian_case()
    r = np.ones(len(obs))
    w = loss_weights(r - r, r, 0.6)
    _, grad = pol.log_prob_grad(obs, acts, w)
    assert not np.any(grad)


def test_residual_decreases_on_1d_gaussian():
    pol, obs, acts, old_logp, v, rng = _gaussian_case()
    target = TrackingTarget(v, 1.0)
    cfg = MStepConfig(lr=0.01, epochs=1, minibatch=None, kl_cap=10.0, optimizer="sgd")
    residuals = [float(np.linalg.norm(v - 1.0))]
    for _ in range(5):
        pol, diag = mstep_update(pol, obs, acts, old_logp, target, cfg, rng)
        residuals.append(diag["residual"])
    assert np.all(np.diff(residuals) < 0)


def test_kl_cap_stops_early():
    pol, obs, acts, old_logp, v, rng = _gaussian_case(shift=1.0)
    cfg = MStepConfig(lr=0.05, epochs=50, minibatch=None, kl_cap=0.01)
    _, diag = mstep_update(pol, obs, acts, old_logp, TrackingTarget(v, 1.0), cfg, rng)
    assert diag["epochs"] < 50 and diag["fwd_kl"] > 0.01


def test_recovery_needs_cost_advantages():
    pol, obs, acts, old_logp, v, rng = _gaussian_case()
    with pytest.raises(ContractError):
        mstep_update(pol, obs, acts, old_logp, TrackingTarget(v, 1.0, Mode.RECOVERY),
                     MStepConfig(), rng)


def test_divergence_restores_parameters():
    pol, obs, acts, old_logp, v, rng = _gaussian_case()
    cfg = MStepConfig(lr=1e6, epochs=5, minibatch=None, optimizer="sgd", kl_cap=1e9)
    new, diag = mstep_update(pol, obs, acts, old_logp, TrackingTarget(v, 1.0), cfg, rng)
    assert diag["failed"]
    assert np.array_equal(new.ravel(), pol.ravel())


def test_loss_gradient_matches_finite_differences():
    pol, obs, acts, old_logp, v, _ = _gaussian_case(n=16, seed=3)
    theta0 = pol.ravel() + np.random.default_rng(1).normal(0, 0.2, pol.size)
    pol = pol.unravel(theta0)
    r = np.exp(pol.log_prob(obs, acts) - old_logp)
    g = v - r  # held fixed

    def f(theta):
        r_t = np.exp(pol.unravel(theta).log_prob(obs, acts) - old_logp)
        return normal_loss(v, r_t, 0.6, g)

    _, grad = pol.log_prob_grad(obs, acts, loss_weights(g, r, 0.6))
    assert grad_error(grad, finite_difference(f, theta0)) < 1e-4


def test_raising_the_floor_never_grows_clipped_contributions():
    rng = np.random.default_rng(4)
    r = rng.uniform(0.05, 0.5, 100)
    g = -rng.uniform(0.01, 1.0, 100)
    for lo, hi in [(0.55, 0.6), (0.6, 0.9), (0.51, 0.99)]:
        assert np.all(np.abs(loss_weights(g, r, hi)) <= np.abs(loss_weights(g, r, lo)))
