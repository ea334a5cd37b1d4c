"""Small grid and chain CMDPs built from plain specs.

A gridworld spec is a JSON object::

    {"width": 4, "height": 2, "start": [0, 0],
     "goal_cells": [[3, 0]], "cost_cells": [[1, 0], [2, 0]],
     "slip": 0.0, "goal_reward": 1.0, "step_reward": -0.1,
     "gamma": 0.99, "cost_limit": 1.0, "horizon": 20}

Only ``width``, ``height``, ``goal_cells`` and ``cost_cells`` are required.
Cells are ``[x, y]``; state index is ``y * width + x``. Actions are
up (+y), down (-y), left (-x), right (+x). With probability ``slip`` the
move is replaced by a uniformly random one; moves into a wall stay put.
"""
from __future__ import annotations

import json

import numpy as np

from ..errors import ConfigError
from .tabular import TabularCmdp

MOVES = ((0, 1), (0, -1), (-1, 0), (1, 0))
ACTION_NAMES = ("up", "down", "left", "right")

BRIDGE = {
    "width": 4,
    "height": 2,
    "start": [0, 0],
    "goal_cells": [[3, 0]],
    "cost_cells": [[1, 0], [2, 0]],
    "slip": 0.0,
    "goal_reward": 1.0,
    "step_reward": -0.1,
    "gamma": 0.99,
    "cost_limit": 1.0,
    "horizon": 20,
}

_REQUIRED = ("width", "height", "goal_cells", "cost_cells")
_OPTIONAL = {"start": [0, 0], "slip": 0.0, "goal_reward": 1.0, "step_reward": 0.0,
             "gamma": 0.99, "cost_limit": 1.0, "horizon": 50}


def _cells(spec, key, w, h):
    cells = spec[key]
    if not isinstance(cells, list):
        raise ConfigError(f"{key} must be a list of [x, y] cells")
    out = []
    for cell in cells:
        if (not isinstance(cell, (list, tuple)) or len(cell) != 2
                or not all(isinstance(v, int) for v in cell)):
            raise ConfigError(f"{key}: malformed cell {cell!r}")
        x, y = cell
        if not (0 <= x < w and 0 <= y < h):
            raise ConfigError(f"{key}: cell {cell} outside {w}x{h} grid")
        out.append(y * w + x)
    return out


def make_bridge_gridworld(spec=None) -> TabularCmdp:
    """Build a gridworld CMDP; ``spec`` is a dict or JSON text (default: the bridge)."""
    if spec is None:
        spec = BRIDGE
    if isinstance(spec, (str, bytes)):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"gridworld spec is not valid JSON: {exc}") from None
    if not isinstance(spec, dict):
        raise ConfigError("gridworld spec must be an object")
    missing = [k for k in _REQUIRED if k not in spec]
    if missing:
        raise ConfigError(f"gridworld spec missing {missing}")
    unknown = set(spec) - set(_REQUIRED) - set(_OPTIONAL)
    if unknown:
        raise ConfigError(f"gridworld spec has unknown keys {sorted(unknown)}")
    spec = {**_OPTIONAL, **spec}

    w, h = spec["width"], spec["height"]
    if not (isinstance(w, int) and isinstance(h, int) and w >= 1 and h >= 1):
        raise ConfigError("width and height must be positive integers")
    slip = float(spec["slip"])
    if not 0.0 <= slip <= 1.0:
        raise ConfigError("slip must lie in [0, 1]")
    goals = _cells(spec, "goal_cells", w, h)
    costly = _cells(spec, "cost_cells", w, h)
    (start,) = _cells({"start": [spec["start"]]}, "start", w, h)
    if not goals:
        raise ConfigError("at least one goal cell is required")
    if start in goals:
        raise ConfigError("start cell cannot be a goal")

    n_s, n_a = w * h, len(MOVES)
    terminal = np.zeros(n_s, dtype=bool)
    terminal[goals] = True
    move_to = np.empty((n_s, n_a), dtype=int)
    for s in range(n_s):
        x, y = s % w, s // w
        for a, (dx, dy) in enumerate(MOVES):
            nx, ny = x + dx, y + dy
            move_to[s, a] = ny * w + nx if (0 <= nx < w and 0 <= ny < h) else s

    P = np.zeros((n_s, n_a, n_s))
    r = np.zeros((n_s, n_a))
    c = np.zeros((n_s, n_a))
    for s in range(n_s):
        if terminal[s]:
            P[s, :, s] = 1.0
            continue
        for a in range(n_a):
            P[s, a, move_to[s, a]] += 1.0 - slip
            for b in range(n_a):
                P[s, a, move_to[s, b]] += slip / n_a
            r[s, a] = spec["step_reward"] + spec["goal_reward"] * P[s, a, terminal].sum()
        if s in costly:
            c[s, :] = 1.0

    mu = np.zeros(n_s)
    mu[start] = 1.0
    return TabularCmdp(P, r, c, float(spec["gamma"]), mu, float(spec["cost_limit"]),
                       terminal=terminal, horizon=int(spec["horizon"]))


def make_chain(n: int = 5, advance_safe: float = 0.5, goal_reward: float = 1.0,
               step_reward: float = -0.05, gamma: float = 0.99, cost_limit: float = 1.5,
               horizon: int = 30) -> TabularCmdp:
    """Chain of ``n`` states ending in an absorbing goal.

    Action 0 advances with probability ``advance_safe`` at no cost; action 1
    always advances but costs 1.
    """
    if n < 2:
        raise ConfigError("chain needs at least two states")
    P = np.zeros((n, 2, n))
    r = np.zeros((n, 2))
    c = np.zeros((n, 2))
    for s in range(n - 1):
        P[s, 0, s + 1] = advance_safe
        P[s, 0, s] = 1.0 - advance_safe
        P[s, 1, s + 1] = 1.0
        c[s, 1] = 1.0
        goal = s + 1 == n - 1
        r[s, 0] = step_reward + goal_reward * advance_safe * goal
        r[s, 1] = step_reward + goal_reward * goal
    P[n - 1, :, n - 1] = 1.0
    terminal = np.zeros(n, dtype=bool)
    terminal[-1] = True
    mu = np.zeros(n)
    mu[0] = 1.0
    return TabularCmdp(P, r, c, gamma, mu, cost_limit, terminal=terminal, horizon=horizon)
