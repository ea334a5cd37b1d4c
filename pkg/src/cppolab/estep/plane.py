"""Closed-form solves on the circle spanned by the reward and cost advantages.

Without the element-wise floor the optimum lies in span{A, A_c}, so it is
``R (cos t * u_c + sin t * u_r)`` for an orthonormal pair ``(u_c, u_r)`` and
a single angle ``t`` measured from the cost direction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, DegeneratePlaneError
from .problem import Mode

COLLINEAR_TOL = 1e-12


@dataclass
class PlaneBasis:
    cost_dir: np.ndarray      # unit vector along A_c
    reward_dir: np.ndarray    # unit component of A orthogonal to A_c
    cost_norm: float          # ||A_c||
    reward_par: float         # A @ cost_dir
    reward_perp: float        # A @ reward_dir, >= 0
    theta_a: float            # direction of A in the plane, in [0, pi]
    theta_f: float            # smallest angle whose circle point meets the budget


def feasibility_angle(budget: float, radius: float, cost_norm: float) -> float:
    return math.acos(min(1.0, max(-1.0, budget / (radius * cost_norm))))


def build_plane_basis(A, A_c, B: float, R: float) -> PlaneBasis:
    A = np.asarray(A, dtype=np.float64)
    A_c = np.asarray(A_c, dtype=np.float64)
    norm_c = float(np.linalg.norm(A_c))
    if norm_c == 0.0:
        raise ContractError("cost advantages are identically zero")
    norm_a = float(np.linalg.norm(A))
    q, r = np.linalg.qr(np.stack([A_c, A], axis=1))
    s0 = math.copysign(1.0, r[0, 0])
    cost_dir = q[:, 0] * s0
    par = float(r[0, 1]) * s0
    perp = abs(float(r[1, 1]))
    if norm_a == 0.0 or perp < COLLINEAR_TOL * norm_a:
        raise DegeneratePlaneError("A is collinear with A_c")
    reward_dir = q[:, 1] * math.copysign(1.0, r[1, 1])
    return PlaneBasis(cost_dir, reward_dir, norm_c, par, perp,
                      math.atan2(perp, par), feasibility_angle(B, R, norm_c))


def plane_angle(basis: PlaneBasis, mode: Mode) -> float:
    """Normal: the reward-optimal angle clipped to ``[theta_f, pi]``.

    Recovery: ``min(pi, max(theta_f, theta_a + pi/2))``, i.e. the
    zero-reward boundary, the least-damaging feasible angle, or pure cost
    descent, whichever applies.
    """
    if Mode(mode) is Mode.NORMAL:
        return min(math.pi, max(basis.theta_a, basis.theta_f))
    return min(math.pi, max(basis.theta_f, basis.theta_a + 0.5 * math.pi))


def solve_in_plane(basis: PlaneBasis, R: float, mode: Mode) -> tuple[np.ndarray, float]:
    theta = plane_angle(basis, mode)
    v = R * (math.cos(theta) * basis.cost_dir + math.sin(theta) * basis.reward_dir)
    return v, theta


def solve_on_line(A, A_c, B: float, R: float, mode: Mode) -> tuple[np.ndarray, float]:
    """Fallback when A is (numerically) a multiple of A_c: move along +-A_c only."""
    A = np.asarray(A, dtype=np.float64)
    A_c = np.asarray(A_c, dtype=np.float64)
    norm_c = float(np.linalg.norm(A_c))
    cost_dir = A_c / norm_c
    par = float(A @ cost_dir)
    theta_f = feasibility_angle(B, R, norm_c)
    if par > 0.0:
        theta_a = 0.0
    elif par < 0.0:
        theta_a = math.pi
    else:
        theta_a = 0.5 * math.pi
    if Mode(mode) is Mode.NORMAL:
        if par == 0.0:
            # flat objective: least-norm point meeting the budget
            s = min(0.0, max(-R, B / norm_c))
            return s * cost_dir, math.acos(s / R) if R else 0.0
        theta = min(math.pi, max(theta_a, theta_f))
    else:
        theta = min(math.pi, max(theta_f, theta_a + 0.5 * math.pi))
    return R * math.cos(theta) * cost_dir, theta


def solve_unbounded(A, A_c, B: float, R: float, mode: Mode) -> tuple[np.ndarray, float]:
    """In-plane solve with the degenerate cases handled.

    Returns ``(v, theta)``; ``theta`` is ``nan`` when A_c vanishes.
    """
    A = np.asarray(A, dtype=np.float64)
    A_c = np.asarray(A_c, dtype=np.float64)
    if not np.any(A_c):
        norm_a = float(np.linalg.norm(A))
        if Mode(mode) is Mode.RECOVERY or norm_a == 0.0:
            return np.zeros_like(A), math.nan
        return A * (R / norm_a), math.nan
    try:
        basis = build_plane_basis(A, A_c, B, R)
    except DegeneratePlaneError:
        return solve_on_line(A, A_c, B, R, mode)
    return solve_in_plane(basis, R, mode)
