from .bounds import forward_kl_bound, forward_kl_estimate, ratio_kl_vs_variance, xlogx_lower_bound
from .fuzz import compare, fuzz, random_problem
from .heuristic import solve_ladder, solve_with_bounds
from .oracle import min_cost, oracle_solve
from .plane import (
    PlaneBasis,
    build_plane_basis,
    plane_angle,
    solve_in_plane,
    solve_on_line,
    solve_unbounded,
)
from .problem import (
    KL_TO_VARIANCE,
    Mode,
    RatioSolution,
    SolverProblem,
    make_solution,
    ratio_radius,
)

__all__ = [
    "KL_TO_VARIANCE",
    "Mode",
    "PlaneBasis",
    "RatioSolution",
    "SolverProblem",
    "build_plane_basis",
    "compare",
    "forward_kl_bound",
    "forward_kl_estimate",
    "fuzz",
    "make_solution",
    "min_cost",
    "oracle_solve",
    "plane_angle",
    "random_problem",
    "ratio_kl_vs_variance",
    "ratio_radius",
    "solve_in_plane",
    "solve_ladder",
    "solve_on_line",
    "solve_unbounded",
    "solve_with_bounds",
    "xlogx_lower_bound",
]
