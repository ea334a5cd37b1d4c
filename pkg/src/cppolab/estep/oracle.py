"""Independent reference solver for the ratio problem.

A log-barrier interior-point method over
{mean zero} ∩ {||v|| <= R} ∩ {v >= b} ∩ {halfspace}, started from a seeded
random interior point. Shares no code with the circle geometry of the
heuristic, so agreement between the two is a meaningful check.
"""
from __future__ import annotations

import math

import numpy as np

from ..errors import ConfigError, InfeasibleProblem
from ..kernels import barrier_kernel
from ..rng import stream
from .problem import Mode, RatioSolution, SolverProblem, make_solution

MAX_N = 64
GAP_TOL = 1e-12
MAX_NEWTON = 5000


def _interior_start(prob: SolverProblem, rng) -> np.ndarray:
    z = rng.standard_normal(prob.n)
    z -= z.mean()
    norm = float(np.linalg.norm(z))
    if norm == 0.0:
        return np.zeros(prob.n)
    scale = 0.25 * prob.R
    if math.isfinite(prob.b):
        scale = min(scale, 0.5 * abs(prob.b))
    return z * (scale / norm)


def _run(c, h, beta, prob, v0, max_newton):
    v, steps, gap = barrier_kernel(np.asarray(c, dtype=np.float64),
                                   np.asarray(h, dtype=np.float64), float(beta),
                                   prob.R, prob.b, v0, GAP_TOL, max_newton)
    return np.asarray(v), int(steps), float(gap)


def _maximize(c, h, beta, prob, rng, max_newton):
    """Maximize ``c @ v`` on the set cut by ``h @ v <= beta``.

    Returns ``(v, steps, gap, lowest)``; ``v`` is None when the cut leaves no
    interior, and then ``lowest`` is the minimum of ``h @ v`` over the rest.
    """
    v0 = _interior_start(prob, rng)
    steps = 0
    lowest = math.nan
    if v0 @ h >= beta:
        # phase one: push h @ v down until the cut holds strictly
        v1, steps, _ = _run(-h, np.zeros(prob.n), math.inf, prob, v0, max_newton)
        lowest = float(v1 @ h)
        if lowest >= beta:
            return v1, steps, math.nan, lowest
        target = 0.5 * (beta + lowest)
        s = (v0 @ h - target) / (v0 @ h - lowest)
        v0 = v0 + s * (v1 - v0)
    v, more, gap = _run(c, h, beta, prob, v0, max_newton - steps)
    return v, steps + more, gap, lowest


def min_cost(prob: SolverProblem, seed=0, max_newton=MAX_NEWTON):
    """Smallest ``v @ A_c`` over the set without the cost budget."""
    rng = stream(seed, "oracle/min-cost")
    v, _, _ = _run(-prob.A_c, np.zeros(prob.n), math.inf, prob,
                   _interior_start(prob, rng), max_newton)
    return float(v @ prob.A_c), v


def oracle_solve(prob: SolverProblem, mode: Mode = Mode.NORMAL, seed: int = 0,
                 max_newton: int = MAX_NEWTON, maximize: bool = True) -> RatioSolution:
    """Reference solution of the normal or recovery ratio problem.

    ``maximize=False`` returns the *minimum* of ``v @ A`` over the normal
    feasible set instead (used to scale objective gaps).
    Raises :class:`InfeasibleProblem` when no point meets the cost budget.
    """
    if prob.n > MAX_N:
        raise ConfigError(f"oracle is for desk-scale instances (N <= {MAX_N})")
    mode = Mode(mode)
    rng = stream(seed, "oracle")
    sign = 1.0 if maximize else -1.0
    v, steps, gap, lowest = _maximize(sign * prob.A, prob.A_c, prob.B, prob, rng, max_newton)
    if math.isnan(gap):
        raise InfeasibleProblem(
            f"minimum attainable cost {lowest:.6g} exceeds budget {prob.B:.6g}",
            lowest, prob.B, v)
    branch = "reward"
    if mode is Mode.RECOVERY and float(v @ prob.A) > 0.0:
        # some budget-feasible point keeps reward: minimize cost while v @ A >= 0
        w, more, gap_c, _ = _maximize(-prob.A_c, -prob.A, 0.0, prob, rng, max_newton - steps)
        if not math.isnan(gap_c):
            v, gap, branch = w, gap_c, "cost"
        steps += more
    return make_solution(prob, v, steps, 0, mode, branch=branch, gap=gap,
                         converged=steps < max_newton)
