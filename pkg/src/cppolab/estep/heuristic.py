"""Iterative clip-and-mask solver for the floored ratio problem.

Solve on the circle, pin every entry that fell below the floor ``b``, then
re-solve for the remaining entries. Writing the free entries as
``mu + w`` with ``w`` mean-zero, the pinned entries fix

    mu  = -(sum of pinned) / n_free
    R'' = sqrt(R^2 - sum(pinned^2) - n_free * mu^2)
    B'' = B - pinned @ A_c[pinned] - mu * sum(A_c[free])

and ``w`` solves the same circle problem on the recentered free
advantages. Pinned entries never un-pin, so at most N rounds run. When
pinning leaves a budget the smaller circle cannot reach, the result keeps
the clamped angle and reports ``info["budget_met"] = False``.
"""
from __future__ import annotations

import math

import numpy as np

from ..errors import SolverFailure
from .plane import solve_unbounded
from .problem import Mode, RatioSolution, SolverProblem, make_solution


def solve_with_bounds(prob: SolverProblem, mode: Mode = Mode.NORMAL,
                      max_iter: int | None = None, radius: float | None = None) -> RatioSolution:
    """Run the heuristic; ``radius`` overrides ``prob.R`` (used for ladder rungs)."""
    mode = Mode(mode)
    R = prob.R if radius is None else float(radius)
    b = prob.b
    n = prob.n
    max_iter = n if max_iter is None else max_iter
    A, A_c = prob.A, prob.A_c
    pinned = np.zeros(n, dtype=bool)
    v = np.zeros(n)
    theta = math.nan
    iterations = 0
    while True:
        free = ~pinned
        n_free = int(free.sum())
        n_pin = n - n_free
        a_free = A[free]
        c_free = A_c[free]
        if n_pin:
            mu = -b * n_pin / n_free
            r_sq = R * R - n_pin * b * b - n_free * mu * mu
            budget = prob.B - b * float(A_c[pinned].sum()) - mu * float(c_free.sum())
        else:
            mu, r_sq, budget = 0.0, R * R, prob.B
        iterations += 1
        if n_free <= 1 or r_sq <= 0.0:
            w = np.zeros(n_free)
        else:
            w, theta = solve_unbounded(a_free - a_free.mean(), c_free - c_free.mean(),
                                       budget, math.sqrt(r_sq), mode)
        v[free] = mu + w
        low = free & (v < b)
        if not low.any():
            break
        if iterations >= max_iter:
            raise SolverFailure(f"floor still violated after {iterations} rounds",
                                best=np.maximum(v, b))
        pinned |= low
        v[low] = b
    sol = make_solution(prob, v, iterations, int(pinned.sum()), mode, theta=theta, radius=R)
    sol.info["budget_met"] = sol.cost <= prob.B + 1e-6 * abs(prob.B) + 1e-9
    return sol


def solve_ladder(prob: SolverProblem, mode: Mode, fractions) -> list[RatioSolution]:
    """Targets at radii ``f * R`` for each ladder fraction ``f``."""
    return [solve_with_bounds(prob, mode, radius=f * prob.R) for f in fractions]
