"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Bad configuration or dimension mismatch supplied by the caller."""


class ContractError(RuntimeError):
    """An operation was called outside its precondition."""


class DegeneratePlaneError(ValueError):
    """Reward and cost advantages are collinear; no 2-D plane exists."""


class SolverFailure(RuntimeError):
    """The bounded heuristic hit its iteration cap.

    ``best`` holds the best-so-far ratio deviation vector.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class InfeasibleProblem(ValueError):
    """No point satisfies the cost budget together with the other constraints.

    ``min_cost`` is the smallest attainable cost and ``witness`` the vector
    attaining it; ``min_cost > budget`` certifies emptiness.
    """

    def __init__(self, message, min_cost, budget, witness):
        super().__init__(message)
        self.min_cost = min_cost
        self.budget = budget
        self.witness = witness
