from .loop import (
    CSV_COLUMNS,
    TrainState,
    cppo_iteration,
    estep_targets,
    fit_value,
    init_state,
    metrics_csv,
    ppo_iteration,
    run_experiment,
    train,
)
from .modes import LagrangianState, update_mode
from .rollout import VecTask, collect, make_task

__all__ = [
    "CSV_COLUMNS",
    "LagrangianState",
    "TrainState",
    "VecTask",
    "collect",
    "cppo_iteration",
    "estep_targets",
    "fit_value",
    "init_state",
    "make_task",
    "metrics_csv",
    "ppo_iteration",
    "run_experiment",
    "train",
    "update_mode",
]
