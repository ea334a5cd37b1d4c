"""Small MLPs with hand-written reverse-mode gradients.

Everything is float64 numpy. Networks are ``tanh`` MLPs with a linear output
layer; the policy heads on top are a diagonal Gaussian with a
state-independent log-std and a categorical (softmax) head for tabular tasks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ContractError

HIDDEN = (64, 64)
LOG_2PI = math.log(2.0 * math.pi)

_ACTIVATIONS = {
    "tanh": (np.tanh, lambda a: 1.0 - a * a),
    "identity": (lambda x: x, lambda a: np.ones_like(a)),
}


@dataclass
class MlpParams:
    weights: list
    biases: list
    activation: str = "tanh"

    def __post_init__(self):
        if self.activation not in _ACTIVATIONS:
            raise ConfigError(f"unknown activation {self.activation!r}")
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ConfigError("weights and biases must be non-empty and paired")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ConfigError(f"layer {k}: weight {w.shape} / bias {b.shape}")
            if k and self.weights[k - 1].shape[1] != w.shape[0]:
                raise ConfigError(f"layer {k} input {w.shape[0]} does not chain")

    @property
    def sizes(self) -> tuple:
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    @property
    def size(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def ravel(self) -> np.ndarray:
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts += [w.ravel(), b]
        return np.concatenate(parts)

    def unravel(self, flat) -> MlpParams:
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (self.size,):
            raise ConfigError(f"flat vector has shape {flat.shape}, want ({self.size},)")
        ws, bs, i = [], [], 0
        for w, b in zip(self.weights, self.biases):
            ws.append(flat[i:i + w.size].reshape(w.shape).copy())
            i += w.size
            bs.append(flat[i:i + b.size].copy())
            i += b.size
        return MlpParams(ws, bs, self.activation)

    def is_finite(self) -> bool:
        return all(np.isfinite(w).all() and np.isfinite(b).all()
                   for w, b in zip(self.weights, self.biases))


def orthogonal(rng: np.random.Generator, n_in: int, n_out: int, gain: float) -> np.ndarray:
    a = rng.standard_normal((max(n_in, n_out), min(n_in, n_out)))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    if n_in < n_out:
        q = q.T
    return gain * q[:n_in, :n_out]


def init_mlp(sizes, rng: np.random.Generator, out_gain: float = 1.0,
             hidden_gain: float = math.sqrt(2.0), activation: str = "tanh") -> MlpParams:
    sizes = tuple(int(s) for s in sizes)
    if len(sizes) < 2 or min(sizes) < 1:
        raise ConfigError(f"bad layer sizes {sizes}")
    ws, bs = [], []
    for k, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        gain = out_gain if k == len(sizes) - 2 else hidden_gain
        ws.append(orthogonal(rng, n_in, n_out, gain))
        bs.append(np.zeros(n_out))
    return MlpParams(ws, bs, activation)


@dataclass
class Trace:
    """Activations recorded by a forward pass, consumed by :func:`backward`."""

    inputs: np.ndarray
    hidden: list = field(default_factory=list)
    output: np.ndarray | None = None
    squeeze: bool = False


def _as_batch(params: MlpParams, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != params.sizes[0]:
        raise ConfigError(f"input shape {x.shape} does not match input dim {params.sizes[0]}")
    return x, squeeze


def trace_forward(params: MlpParams, x) -> Trace:
    x, squeeze = _as_batch(params, x)
    act = _ACTIVATIONS[params.activation][0]
    tr = Trace(inputs=x, squeeze=squeeze)
    h = x
    last = len(params.weights) - 1
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w + b
        if k < last:
            h = act(z)
            tr.hidden.append(h)
        else:
            h = z
    tr.output = h
    return tr


def mlp_forward(params: MlpParams, x) -> np.ndarray:
    tr = trace_forward(params, x)
    return tr.output[0] if tr.squeeze else tr.output


def backward(params: MlpParams, tr: Trace, grad_output) -> tuple[MlpParams, np.ndarray]:
    """Pull ``grad_output`` (dL/d output, same shape as the traced output) back.

    Returns the parameter gradient and dL/d input.
    """
    g = np.asarray(grad_output, dtype=np.float64)
    if tr.squeeze and g.ndim == 1:
        g = g[None, :]
    if g.shape != tr.output.shape:
        raise ConfigError(f"grad_output shape {g.shape} != output shape {tr.output.shape}")
    dact = _ACTIVATIONS[params.activation][1]
    n = len(params.weights)
    gw, gb = [None] * n, [None] * n
    for k in range(n - 1, -1, -1):
        h_in = tr.hidden[k - 1] if k else tr.inputs
        gw[k] = h_in.T @ g
        gb[k] = g.sum(axis=0)
        g = g @ params.weights[k].T
        if k:
            g = g * dact(tr.hidden[k - 1])
    grad_in = g[0] if tr.squeeze else g
    return MlpParams(gw, gb, params.activation), grad_in


def value_and_grad(params: MlpParams, x, loss_grad_fn):
    """Gradient of a scalar loss of the network output.

    ``loss_grad_fn(output) -> (loss, dloss_doutput)``; ``loss`` must be a scalar.
    """
    tr = trace_forward(params, x)
    out = tr.output[0] if tr.squeeze else tr.output
    loss, g = loss_grad_fn(out)
    if np.ndim(loss) != 0:
        raise ContractError(f"loss must be scalar, got shape {np.shape(loss)}")
    grads, _ = backward(params, tr, g)
    return float(loss), grads


# --- policy heads -----------------------------------------------------------

@dataclass
class GaussianPolicyParams:
    mean: MlpParams
    log_std: np.ndarray

    discrete = False

    def __post_init__(self):
        self.log_std = np.asarray(self.log_std, dtype=np.float64)
        if self.log_std.shape != (self.mean.sizes[-1],):
            raise ConfigError("log_std needs one entry per action dimension")

    @property
    def obs_dim(self) -> int:
        return self.mean.sizes[0]

    @property
    def act_dim(self) -> int:
        return self.mean.sizes[-1]

    @property
    def size(self) -> int:
        return self.mean.size + self.log_std.size

    def ravel(self) -> np.ndarray:
        return np.concatenate([self.mean.ravel(), self.log_std])

    def unravel(self, flat) -> GaussianPolicyParams:
        flat = np.asarray(flat, dtype=np.float64)
        m = self.mean.size
        return GaussianPolicyParams(self.mean.unravel(flat[:m]), flat[m:].copy())

    def is_finite(self) -> bool:
        return self.mean.is_finite() and bool(np.isfinite(self.log_std).all())

    def _check_actions(self, actions, n):
        a = np.asarray(actions, dtype=np.float64)
        if a.ndim == 1 and n == 1 and a.shape[0] == self.act_dim:
            a = a[None, :]
        if a.shape != (n, self.act_dim):
            raise ConfigError(f"action shape {a.shape} does not match ({n}, {self.act_dim})")
        return a

    def log_prob(self, states, actions):
        tr = trace_forward(self.mean, states)
        a = self._check_actions(actions, tr.output.shape[0])
        z = (a - tr.output) * np.exp(-self.log_std)
        lp = -0.5 * np.sum(z * z, axis=1) - self.log_std.sum() - 0.5 * self.act_dim * LOG_2PI
        return lp[0] if tr.squeeze else lp

    def log_prob_grad(self, states, actions, weights):
        """Log-probs and the flat gradient of ``sum(weights * log_prob)``."""
        tr = trace_forward(self.mean, states)
        a = self._check_actions(actions, tr.output.shape[0])
        inv_var = np.exp(-2.0 * self.log_std)
        diff = a - tr.output
        z2 = diff * diff * inv_var
        lp = -0.5 * z2.sum(axis=1) - self.log_std.sum() - 0.5 * self.act_dim * LOG_2PI
        w = np.asarray(weights, dtype=np.float64).reshape(-1, 1)
        g_mean, _ = backward(self.mean, tr, w * diff * inv_var)
        g_std = (w * (z2 - 1.0)).sum(axis=0)
        return lp, np.concatenate([g_mean.ravel(), g_std])

    def sample(self, states, rng: np.random.Generator):
        mu = mlp_forward(self.mean, states)
        a = mu + np.exp(self.log_std) * rng.standard_normal(mu.shape)
        return a, self.log_prob(states, a)

    def kl_from(self, old: GaussianPolicyParams, states) -> float:
        """Mean closed-form KL(old || self) over ``states``."""
        mu_o = mlp_forward(old.mean, states)
        mu_n = mlp_forward(self.mean, states)
        var_o = np.exp(2 * old.log_std)
        var_n = np.exp(2 * self.log_std)
        kl = (self.log_std - old.log_std
              + (var_o + (mu_o - mu_n) ** 2) / (2 * var_n) - 0.5)
        return float(np.mean(np.sum(np.atleast_2d(kl), axis=1)))


@dataclass
class CategoricalPolicyParams:
    logits: MlpParams

    discrete = True

    @property
    def obs_dim(self) -> int:
        return self.logits.sizes[0]

    @property
    def n_actions(self) -> int:
        return self.logits.sizes[-1]

    @property
    def size(self) -> int:
        return self.logits.size

    def ravel(self) -> np.ndarray:
        return self.logits.ravel()

    def unravel(self, flat) -> CategoricalPolicyParams:
        return CategoricalPolicyParams(self.logits.unravel(flat))

    def is_finite(self) -> bool:
        return self.logits.is_finite()

    def probs(self, states) -> np.ndarray:
        z = np.atleast_2d(mlp_forward(self.logits, states))
        z = z - z.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)

    def _log_softmax(self, tr):
        z = tr.output - tr.output.max(axis=1, keepdims=True)
        return z - np.log(np.exp(z).sum(axis=1, keepdims=True))

    def _index(self, actions, n):
        a = np.asarray(actions).astype(np.int64).reshape(-1)
        if a.shape != (n,) or a.min(initial=0) < 0 or a.max(initial=0) >= self.n_actions:
            raise ConfigError("actions must be n integer indices in range")
        return a

    def log_prob(self, states, actions):
        tr = trace_forward(self.logits, states)
        ls = self._log_softmax(tr)
        a = self._index(actions, ls.shape[0])
        lp = ls[np.arange(len(a)), a]
        return lp[0] if tr.squeeze else lp

    def log_prob_grad(self, states, actions, weights):
        tr = trace_forward(self.logits, states)
        ls = self._log_softmax(tr)
        a = self._index(actions, ls.shape[0])
        rows = np.arange(len(a))
        w = np.asarray(weights, dtype=np.float64).reshape(-1, 1)
        g = -np.exp(ls)
        g[rows, a] += 1.0
        grads, _ = backward(self.logits, tr, w * g)
        return ls[rows, a], grads.ravel()

    def sample(self, states, rng: np.random.Generator):
        p = self.probs(states)
        u = rng.random((p.shape[0], 1))
        a = np.minimum((np.cumsum(p, axis=1) < u).sum(axis=1), self.n_actions - 1)
        lp = np.log(p[np.arange(len(a)), a])
        return a, lp

    def kl_from(self, old: CategoricalPolicyParams, states) -> float:
        p_o = old.probs(states)
        p_n = self.probs(states)
        kl = np.sum(p_o * (np.log(p_o + 1e-300) - np.log(p_n + 1e-300)), axis=1)
        return float(np.mean(kl))


def init_gaussian_policy(obs_dim, act_dim, rng, hidden=HIDDEN, log_std=-0.5):
    mean = init_mlp((obs_dim, *hidden, act_dim), rng, out_gain=0.01)
    return GaussianPolicyParams(mean, np.full(act_dim, float(log_std)))


def init_categorical_policy(obs_dim, n_actions, rng, hidden=HIDDEN):
    return CategoricalPolicyParams(init_mlp((obs_dim, *hidden, n_actions), rng, out_gain=0.01))


def init_value(obs_dim, rng, hidden=HIDDEN) -> MlpParams:
    return init_mlp((obs_dim, *hidden, 1), rng, out_gain=1.0)


def value_predict(params: MlpParams, states) -> np.ndarray:
    return np.atleast_2d(mlp_forward(params, np.atleast_2d(states)))[:, 0]


def value_loss_grad(params: MlpParams, states, targets):
    """Mean squared error of the value head and its flat gradient."""
    targets = np.asarray(targets, dtype=np.float64)

    def mse(out):
        err = out[:, 0] - targets
        return np.mean(err * err), (2.0 / len(err)) * err[:, None]

    loss, g = value_and_grad(params, np.atleast_2d(states), mse)
    return loss, g.ravel()


# --- optimizers --------------------------------------------------------------

class Adam:
    def __init__(self, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = self.v = None
        self.t = 0

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        """Descent step; returns the new parameter vector."""
        if self.m is None:
            self.m = np.zeros_like(theta)
            self.v = np.zeros_like(theta)
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad * grad
        m_hat = self.m / (1 - self.beta1 ** self.t)
        v_hat = self.v / (1 - self.beta2 ** self.t)
        return theta - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


class SGD:
    def __init__(self, lr: float):
        self.lr = lr

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        return theta - self.lr * grad


def make_optimizer(name: str, lr: float):
    if name == "adam":
        return Adam(lr)
    if name == "sgd":
        return SGD(lr)
    raise ConfigError(f"unknown optimizer {name!r}")


# --- gradient checking -------------------------------------------------------

def finite_difference(f, theta, eps=1e-5) -> np.ndarray:
    """Central differences of scalar ``f`` at ``theta``."""
    theta = np.asarray(theta, dtype=np.float64)
    g = np.empty_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = eps
        g[i] = (f(theta + e) - f(theta - e)) / (2 * eps)
    return g


def grad_error(analytic, numeric, atol=1e-6) -> float:
    """Worst entrywise ``|a - n| / max(|a|, |n|, atol)``.

    ``atol`` floors the scale so entries that are zero in both count as
    absolute rather than relative errors.
    """
    analytic = np.asarray(analytic)
    numeric = np.asarray(numeric)
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), atol)
    return float((np.abs(analytic - numeric) / scale).max(initial=0.0))
