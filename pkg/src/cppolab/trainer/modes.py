"""Bang-bang mode switching and the Lagrange multiplier of the baseline."""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConfigError
from ..estep.problem import Mode


def update_mode(j_c: float, d: float, rho: float, current: Mode) -> Mode:
    """Hysteresis switch: enter recovery above ``d``, leave at or below ``rho * d``."""
    if d <= 0:
        raise ConfigError("cost limit must be positive")
    current = Mode(current)
    if current is Mode.NORMAL and j_c > d:
        return Mode.RECOVERY
    if current is Mode.RECOVERY and j_c <= rho * d:
        return Mode.NORMAL
    return current


@dataclass
class LagrangianState:
    value: float = 0.0
    lr: float = 0.05

    def __post_init__(self):
        if self.value < 0:
            raise ConfigError("multiplier must start non-negative")

    def update(self, j_c: float, d: float) -> float:
        self.value = max(0.0, self.value + self.lr * (j_c - d))
        return self.value
