"""Seeded random ratio problems and the heuristic-versus-oracle comparison."""
from __future__ import annotations

import math
import time

import numpy as np

from ..errors import InfeasibleProblem
from ..rng import stream
from .heuristic import solve_with_bounds
from .oracle import oracle_solve
from .problem import Mode, SolverProblem

N_RANGE = (8, 64)
RADIUS_RANGE = (0.3, 2.0)      # multiples of sqrt(N)
BUDGET_RANGE = (-0.2, 1.0)     # multiples of R * ||A_c||


def random_problem(rng: np.random.Generator, b: float = -0.99) -> SolverProblem:
    """Heavy-tailed (Student-t, 3 dof) advantages with partly correlated costs."""
    n = int(rng.integers(N_RANGE[0], N_RANGE[1] + 1))
    A = rng.standard_t(3, n)
    A -= A.mean()
    A_c = rng.standard_t(3, n) + 0.5 * A * rng.uniform(-1.0, 1.0)
    A_c -= A_c.mean()
    R = rng.uniform(*RADIUS_RANGE) * math.sqrt(n)
    B = R * float(np.linalg.norm(A_c)) * rng.uniform(*BUDGET_RANGE)
    return SolverProblem(A, A_c, B, R, b)


def compare(prob: SolverProblem, seed: int = 0) -> dict:
    """Run both solvers on one normal-mode instance."""
    t0 = time.perf_counter()
    heur = solve_with_bounds(prob, Mode.NORMAL)
    t1 = time.perf_counter()
    rec = {"n": prob.n, "R": prob.R, "B": prob.B, "heuristic_seconds": t1 - t0,
           "heuristic_rounds": heur.iterations, "masked": heur.n_masked,
           "residuals": heur.violations(prob), "feasible": heur.is_feasible(prob),
           "budget_met": heur.info["budget_met"]}
    try:
        best = oracle_solve(prob, Mode.NORMAL, seed=seed)
    except InfeasibleProblem as exc:
        rec.update(infeasible=True, min_cost=exc.min_cost, oracle_seconds=time.perf_counter() - t1)
        return rec
    worst = oracle_solve(prob, Mode.NORMAL, seed=seed, maximize=False)
    t2 = time.perf_counter()
    span = best.objective - worst.objective
    gap = best.objective - heur.objective
    rec.update(infeasible=False, oracle_seconds=t2 - t1, oracle_steps=best.iterations,
               oracle_objective=best.objective, oracle_minimum=worst.objective,
               heuristic_objective=heur.objective,
               gap_relative=gap / abs(best.objective) if best.objective else (0.0 if gap == 0 else math.inf),
               gap_range=gap / span if span > 0 else 0.0)
    return rec


def fuzz(count: int, seed: int = 0, timings: bool = False) -> dict:
    """``count`` seeded comparisons plus a summary block.

    Wall-clock fields are dropped unless ``timings`` is set, so the report
    is a pure function of ``(count, seed)``.
    """
    rng = stream(seed, "solver-fuzz")
    records = [compare(random_problem(rng), seed=k) for k in range(count)]
    solved = [r for r in records if not r["infeasible"]]
    summary = {
        "count": count,
        "infeasible_instances": count - len(solved),
        "all_feasible": all(r["feasible"] for r in solved),
        "budget_missed": sum(not r["budget_met"] for r in records),
        "max_gap_relative": max((r["gap_relative"] for r in solved), default=0.0),
        "max_gap_range": max((r["gap_range"] for r in solved), default=0.0),
        "heuristic_seconds": sum(r["heuristic_seconds"] for r in records),
        "oracle_seconds": sum(r["oracle_seconds"] for r in records),
    }
    if not timings:
        for rec in [summary, *records]:
            for key in [k for k in rec if k.endswith("seconds")]:
                del rec[key]
    return {"seed": seed, "summary": summary, "instances": records}
