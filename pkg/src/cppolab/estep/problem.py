"""Ratio-deviation problem instances and solutions.

The E-step picks a deviation vector ``v`` (ratio minus one, one entry per
sample) maximizing ``v @ A`` subject to::

    v @ A_c <= B        cost budget (N * d')
    ||v||_2 <= R        trust radius
    mean(v) == 0        ratios average to one
    v >= b              ratios stay positive
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import ConfigError

KL_TO_VARIANCE = 2.0 * math.log(2.0) - 1.0
DEFAULT_KL = 0.02
DEFAULT_LOWER_EPS = 0.01


class Mode(str, Enum):
    NORMAL = "normal"
    RECOVERY = "recovery"


def ratio_radius(n: int, kl_target: float = DEFAULT_KL, scheme: str = "variance") -> float:
    """Radius on ``||v||_2`` for ``n`` samples.

    ``"variance"``: ``sqrt(n * kl / (2 ln 2 - 1))`` so that ``Var(v)`` equals the
    per-sample budget. ``"linear"``: ``2 * n * kl / (2 ln 2 - 1)``, the literal
    ``2 N delta'`` scaling.
    """
    delta = kl_target / KL_TO_VARIANCE
    if scheme == "variance":
        return math.sqrt(n * delta)
    if scheme == "linear":
        return 2.0 * n * delta
    raise ConfigError(f"unknown radius scheme {scheme!r}")


def _mean_zero_ok(x: np.ndarray) -> bool:
    return abs(float(x.mean())) <= 1e-9 * max(1.0, float(np.abs(x).max(initial=0.0)))


@dataclass
class SolverProblem:
    A: np.ndarray
    A_c: np.ndarray
    B: float
    R: float
    b: float = -1.0 + DEFAULT_LOWER_EPS

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=np.float64)
        self.A_c = np.asarray(self.A_c, dtype=np.float64)
        self.B = float(self.B)
        self.R = float(self.R)
        self.b = float(self.b)
        if self.A.ndim != 1 or self.A.shape != self.A_c.shape or self.A.size < 1:
            raise ConfigError("A and A_c must be 1-D vectors of equal length")
        if not (np.isfinite(self.A).all() and np.isfinite(self.A_c).all()):
            raise ConfigError("advantages must be finite")
        if not (_mean_zero_ok(self.A) and _mean_zero_ok(self.A_c)):
            raise ConfigError("A and A_c must be centered (mean zero)")
        if not self.R > 0:
            raise ConfigError("radius must be positive")
        if not (-1.0 < self.b < 0.0 or self.b == -math.inf):
            raise ConfigError("lower bound must lie in (-1, 0), or be -inf for unbounded solves")

    @property
    def n(self) -> int:
        return self.A.size

    def to_json(self, mode: Mode | str = Mode.NORMAL) -> str:
        return json.dumps({
            "A": self.A.tolist(), "A_c": self.A_c.tolist(), "B": self.B, "R": self.R,
            "b": None if self.b == -math.inf else self.b, "mode": Mode(mode).value,
        })

    @classmethod
    def from_json(cls, text) -> tuple[SolverProblem, Mode]:
        rec = json.loads(text) if isinstance(text, (str, bytes)) else dict(text)
        missing = {"A", "A_c", "B", "R"} - set(rec)
        if missing:
            raise ConfigError(f"solver record missing {sorted(missing)}")
        b = rec.get("b", -1.0 + DEFAULT_LOWER_EPS)
        prob = cls(np.array(rec["A"]), np.array(rec["A_c"]), rec["B"], rec["R"],
                   -math.inf if b is None else b)
        return prob, Mode(rec.get("mode", "normal"))


@dataclass
class RatioSolution:
    v: np.ndarray
    objective: float
    cost: float
    iterations: int
    n_masked: int
    mode: Mode = Mode.NORMAL
    info: dict = field(default_factory=dict)

    @property
    def ratios(self) -> np.ndarray:
        return self.v + 1.0

    def violations(self, prob: SolverProblem) -> dict:
        """Signed constraint residuals; positive means violated."""
        return {
            "mean": abs(float(self.v.mean())),
            "radius": float(np.linalg.norm(self.v)) - prob.R,
            "lower": float(prob.b - self.v.min()) if prob.b > -math.inf else -math.inf,
            "cost": self.cost - prob.B,
        }

    def is_feasible(self, prob: SolverProblem, cost_tol: float = 1e-6) -> bool:
        viol = self.violations(prob)
        return (viol["mean"] <= 1e-8
                and np.linalg.norm(self.v) <= prob.R * (1 + 1e-8)
                and viol["lower"] <= 1e-10
                and viol["cost"] <= cost_tol)


def make_solution(prob: SolverProblem, v, iterations, n_masked, mode, **info) -> RatioSolution:
    v = np.asarray(v, dtype=np.float64)
    return RatioSolution(v, float(v @ prob.A), float(v @ prob.A_c), iterations,
                         n_masked, Mode(mode), info)
