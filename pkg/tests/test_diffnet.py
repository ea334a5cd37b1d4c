import math

import numpy as np
import pytest

from cppolab.diffnet import (
    Adam,
    CategoricalPolicyParams,
    GaussianPolicyParams,
    MlpParams,
    SGD,
    backward,
    finite_difference,
    grad_error,
    init_gaussian_policy,
    init_mlp,
    init_value,
    mlp_forward,
    trace_forward,
    value_and_grad,
    value_loss_grad,
)
from cppolab.errors import ConfigError, ContractError

LOG_2PI = math.log(2 * math.pi)


def test_zero_net_gives_zero_output():
    rng = np.random.default_rng(0)
    p = init_mlp((3, 5, 2), rng)
    z = MlpParams([np.zeros_like(w) for w in p.weights], [np.zeros_like(b) for b in p.biases])
    assert np.array_equal(mlp_forward(z, rng.standard_normal((4, 3))), np.zeros((4, 2)))


def test_identity_like_net_by_hand():
    p = MlpParams([np.ones((1, 1)), np.ones((1, 1))], [np.zeros(1), np.zeros(1)])
    assert mlp_forward(p, np.array([0.5]))[0] == pytest.approx(math.tanh(0.5), abs=1e-15)


def test_wrong_input_dim_is_config_error():
    p = init_mlp((3, 4, 1), np.random.default_rng(0))
    with pytest.raises(ConfigError):
        mlp_forward(p, np.zeros((2, 4)))


def test_non_scalar_loss_is_contract_error():
    p = init_mlp((2, 3, 1), np.random.default_rng(0))
    with pytest.raises(ContractError):
        value_and_grad(p, np.zeros((4, 2)), lambda out: (out[:, 0], np.ones_like(out)))


def test_constant_loss_gives_zero_gradient():
    p = init_mlp((2, 3, 1), np.random.default_rng(1))
    _, g = value_and_grad(p, np.ones((5, 2)), lambda out: (3.0, np.zeros_like(out)))
    assert not np.any(g.ravel())


def test_three_parameter_net_matches_finite_differences():
    rng = np.random.default_rng(2)
    p = init_mlp((2, 1), rng)  # two weights and a bias
    assert p.size == 3
    x = rng.standard_normal((6, 2))
    y = rng.standard_normal(6)
    _, g = value_loss_grad(p, x, y)
    flat = p.ravel()

    def f(theta):
        return value_loss_grad(p.unravel(theta), x, y)[0]

    num = finite_difference(f, flat, eps=1e-5)
    assert grad_error(g, num) < 1e-4


def test_backward_shape_mismatch():
    p = init_mlp((2, 3, 1), np.random.default_rng(0))
    tr = trace_forward(p, np.zeros((4, 2)))
    with pytest.raises(ConfigError):
        backward(p, tr, np.zeros((4, 2)))


def test_gaussian_log_prob_at_mode():
    rng = np.random.default_rng(0)
    for k in (1, 2, 5):
        pol = init_gaussian_policy(3, k, rng, log_std=0.0)
        pol.mean.weights[-1][:] = 0.0
        pol.mean.biases[-1][:] = 0.0
        assert pol.log_prob(np.ones(3), np.zeros(k)) == pytest.approx(-0.5 * k * LOG_2PI, abs=1e-12)


def test_smaller_std_raises_density_at_mode():
    rng = np.random.default_rng(0)
    pol = init_gaussian_policy(3, 2, rng, log_std=0.0)
    s = np.ones(3)
    mode = mlp_forward(pol.mean, s)
    tighter = GaussianPolicyParams(pol.mean, pol.log_std - 0.3)
    assert tighter.log_prob(s, mode) > pol.log_prob(s, mode)


def test_gaussian_log_prob_matches_scalar_formula():
    rng = np.random.default_rng(3)
    pol = init_gaussian_policy(4, 3, rng, log_std=-0.2)
    pol.log_std[:] = rng.normal(0, 0.3, 3)
    s = rng.standard_normal(4)
    a = rng.standard_normal(3)
    mu = mlp_forward(pol.mean, s)
    expect = 0.0
    for i in range(3):
        sd = math.exp(pol.log_std[i])
        expect += -0.5 * ((a[i] - mu[i]) / sd) ** 2 - math.log(sd) - 0.5 * LOG_2PI
    assert pol.log_prob(s, a) == pytest.approx(expect, abs=1e-12)


def test_log_std_gradient_at_mode_is_minus_one():
    rng = np.random.default_rng(4)
    pol = init_gaussian_policy(2, 3, rng)
    s = rng.standard_normal((1, 2))
    mode = mlp_forward(pol.mean, s)
    _, g = pol.log_prob_grad(s, mode, np.ones(1))
    assert np.allclose(g[-3:], -1.0, atol=1e-12)


def test_gaussian_density_integrates_to_one():
    rng = np.random.default_rng(5)
    pol = init_gaussian_policy(2, 1, rng, log_std=-0.7)
    s = rng.standard_normal(2)
    mu = float(mlp_forward(pol.mean, s)[0])
    sd = math.exp(pol.log_std[0])
    xs = np.linspace(mu - 8 * sd, mu + 8 * sd, 4001)
    dens = np.exp(pol.log_prob(np.repeat(s[None], len(xs), 0), xs[:, None]))
    assert np.trapezoid(dens, xs) == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("discrete", [False, True])
def test_log_prob_grad_matches_finite_differences(discrete):
    rng = np.random.default_rng(6)
    if discrete:
        pol = CategoricalPolicyParams(init_mlp((3, 8, 4), rng, out_gain=1.0))
        acts = rng.integers(0, 4, 7)
    else:
        pol = init_gaussian_policy(3, 2, rng, hidden=(8,))
        acts = rng.standard_normal((7, 2))
    s = rng.standard_normal((7, 3))
    w = rng.standard_normal(7)
    _, g = pol.log_prob_grad(s, acts, w)
    num = finite_difference(lambda th: float(w @ pol.unravel(th).log_prob(s, acts)), pol.ravel())
    assert grad_error(g, num) < 1e-4


def test_categorical_sampling_and_kl():
    rng = np.random.default_rng(7)
    pol = CategoricalPolicyParams(init_mlp((2, 4, 3), rng, out_gain=1.0))
    s = np.tile(rng.standard_normal(2), (20000, 1))
    a, lp = pol.sample(s, rng)
    freq = np.bincount(a, minlength=3) / len(a)
    assert np.allclose(freq, pol.probs(s[:1])[0], atol=0.02)
    assert np.allclose(lp, pol.log_prob(s, a))
    assert pol.kl_from(pol, s[:5]) == pytest.approx(0.0, abs=1e-12)


def test_ravel_roundtrip_and_value_head():
    rng = np.random.default_rng(8)
    v = init_value(3, rng)
    assert np.array_equal(v.unravel(v.ravel()).ravel(), v.ravel())
    assert v.is_finite()


def test_optimizers_descend_quadratic():
    for opt in (SGD(0.1), Adam(0.1)):
        theta = np.array([3.0, -2.0])
        for _ in range(200):
            theta = opt.step(theta, 2 * theta)
        assert np.linalg.norm(theta) < 1e-2
    theta = np.array([1.0])
    assert np.array_equal(Adam(0.0).step(theta, np.array([5.0])), theta)
