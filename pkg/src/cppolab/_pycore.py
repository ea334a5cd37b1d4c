"""Pure-Python (numpy) versions of the hot kernels.

Mirrors ``_core.pyx`` argument for argument. Used when the compiled
extension is unavailable or ``CPPOLAB_PURE_PYTHON=1`` is set.
"""
import math

import numpy as np

GROWTH = 20.0
NEWTON_TOL = 1e-12
MAX_STAGE_STEPS = 200
REL_FLOOR = 1e-14


def gae(rewards, values, dones, gamma, lam):
    """Backward GAE recursion; ``values`` carries the bootstrap value last."""
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=np.float64)
    n = rewards.shape[0]
    out = np.empty(n, dtype=np.float64)
    acc = 0.0
    for t in range(n - 1, -1, -1):
        live = 1.0 - dones[t]
        delta = rewards[t] + gamma * values[t + 1] * live - values[t]
        acc = delta + gamma * lam * live * acc
        out[t] = acc
    return out


def _barrier(v, c, t, h, beta, has_h, r_sq, lower, has_lower):
    s_r = r_sq - v @ v
    if s_r <= 0.0:
        return math.inf
    val = -t * (c @ v) - math.log(s_r)
    if has_h:
        s_h = beta - h @ v
        if s_h <= 0.0:
            return math.inf
        val -= math.log(s_h)
    if has_lower:
        gap = v - lower
        if gap.min() <= 0.0:
            return math.inf
        val -= np.log(gap).sum()
    return val


def barrier(c, h, beta, radius, lower, v0, gap_tol, max_newton):
    """Maximize ``c @ v`` over {sum v = 0, ||v|| <= R, v >= lower, h @ v <= beta}.

    Log-barrier path following from the strictly feasible, mean-zero ``v0``.
    The Hessian is diagonal plus rank two, so each Newton step is O(N) via
    Woodbury. ``beta = inf`` drops the halfspace, ``lower = -inf`` the floor.
    Returns ``(v, newton_steps, duality_gap_bound)``.
    """
    c = np.asarray(c, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    v = np.array(v0, dtype=np.float64)
    n = v.shape[0]
    c_norm = math.sqrt(c @ c)
    has_h = math.isfinite(beta) and bool(np.any(h))
    has_lower = math.isfinite(lower)
    m = 1 + has_h + (n if has_lower else 0)
    if c_norm == 0.0:
        return v, 0, 0.0
    cu = c / c_norm
    r_sq = radius * radius
    t = m / radius
    steps = 0
    while True:
        for _ in range(MAX_STAGE_STEPS):
            if steps >= max_newton:
                return v, steps, m / t
            s_r = r_sq - v @ v
            grad = -t * cu + (2.0 / s_r) * v
            diag = np.full(n, 2.0 / s_r)
            u_r = (2.0 / s_r) * v
            if has_h:
                s_h = beta - h @ v
                u_h = h / s_h
                grad += u_h
            else:
                u_h = np.zeros(n)
            if has_lower:
                inv_gap = 1.0 / (v - lower)
                grad -= inv_gap
                diag += inv_gap * inv_gap
            # H = diag + u_h u_h^T + u_r u_r^T, inverted with Woodbury
            dh = u_h / diag
            dr = u_r / diag
            m11 = 1.0 + u_h @ dh
            m12 = u_h @ dr
            m22 = 1.0 + u_r @ dr
            det = m11 * m22 - m12 * m12

            def solve(x):
                dx = x / diag
                a1 = u_h @ dx
                a2 = u_r @ dx
                k1 = (m22 * a1 - m12 * a2) / det
                k2 = (m11 * a2 - m12 * a1) / det
                return dx - k1 * dh - k2 * dr

            y_g = solve(grad)
            y_1 = solve(np.ones(n))
            nu = -y_g.sum() / y_1.sum()
            step = -(y_g + nu * y_1)
            dec = -(grad @ step)
            f0 = _barrier(v, cu, t, h, beta, has_h, r_sq, lower, has_lower)
            # below REL_FLOOR * |f0| the sufficient-decrease test is pure round-off
            if dec * 0.5 <= NEWTON_TOL + REL_FLOOR * abs(f0):
                break
            alpha = 1.0
            for _ in range(80):
                f1 = _barrier(v + alpha * step, cu, t, h, beta, has_h, r_sq, lower, has_lower)
                if f1 <= f0 - 0.25 * alpha * dec:
                    break
                alpha *= 0.5
            else:
                break
            v = v + alpha * step
            v -= v.mean()
            steps += 1
        if m / t <= gap_tol * radius:
            return v, steps, m / t
        t *= GROWTH
