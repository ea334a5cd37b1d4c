"""Inequalities tying ratio vectors to KL divergences."""
import math

import numpy as np

from ..errors import ContractError
from .problem import KL_TO_VARIANCE


def ratio_kl_vs_variance(v):
    """``(mean(v log v), Var(v - 1))`` for positive ratios averaging to one.

    The first is the sample reverse-KL estimate, the second its quadratic
    upper bound; raises if the bound fails.
    """
    v = np.asarray(v, dtype=np.float64)
    if (v <= 0).any():
        raise ContractError("ratios must be positive")
    if abs(v.mean() - 1.0) >= 1e-9:
        raise ContractError("ratios must average to one")
    kl = float(np.mean(v * np.log(v)))
    var = float(np.var(v - 1.0))
    if kl > var + 1e-15:
        raise AssertionError(f"mean(v log v) = {kl} exceeds Var(v - 1) = {var}")
    return kl, var


def xlogx_lower_bound(x):
    """Quadratic minorant of ``x log x`` valid on (0, 2)."""
    x = np.asarray(x, dtype=np.float64)
    return KL_TO_VARIANCE * (x - 1.0) ** 2 + (x - 1.0)


def forward_kl_estimate(ratios) -> float:
    """``-mean(log r)``: sample estimate of KL(old || new) from new/old ratios."""
    return float(-np.mean(np.log(np.asarray(ratios, dtype=np.float64))))


def forward_kl_bound(ratios) -> float:
    """Upper bound ``-log(1 - Var(r) / (2 min r))`` on the forward-KL estimate.

    Infinite when ``Var(r) / (2 min r) >= 1``.
    """
    r = np.asarray(ratios, dtype=np.float64)
    q = float(np.var(r)) / (2.0 * float(r.min()))
    return -math.log1p(-q) if q < 1.0 else math.inf
