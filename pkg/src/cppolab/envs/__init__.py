from .gridworld import BRIDGE, make_bridge_gridworld, make_chain
from .point_circle import PointCircleEnv, PointCircleVec, Transition
from .tabular import (
    TabularCmdp,
    TabularVecEnv,
    enumerate_deterministic,
    episode_eval,
    state_values,
    tabular_exact_eval,
    value_iteration,
)

__all__ = [
    "BRIDGE",
    "PointCircleEnv",
    "PointCircleVec",
    "TabularCmdp",
    "TabularVecEnv",
    "Transition",
    "enumerate_deterministic",
    "episode_eval",
    "make_bridge_gridworld",
    "make_chain",
    "state_values",
    "tabular_exact_eval",
    "value_iteration",
]
