import math

import numpy as np
import pytest

from cppolab.errors import ConfigError, ContractError, InfeasibleProblem
from cppolab.estep import (
    KL_TO_VARIANCE,
    Mode,
    SolverProblem,
    build_plane_basis,
    forward_kl_bound,
    forward_kl_estimate,
    fuzz,
    min_cost,
    oracle_solve,
    random_problem,
    ratio_kl_vs_variance,
    ratio_radius,
    solve_in_plane,
    solve_unbounded,
    solve_with_bounds,
    xlogx_lower_bound,
)

S6 = math.sqrt(6.0)


def _centered(rng, n):
    x = rng.standard_normal(n)
    return x - x.mean()


def test_basis_when_already_orthogonal():
    basis = build_plane_basis([2.0, -1.0, -1.0], [0.0, 1.0, -1.0], 0.0, 1.0)
    assert np.allclose(basis.cost_dir, np.array([0.0, 1.0, -1.0]) / math.sqrt(2))
    assert np.allclose(basis.reward_dir, np.array([2.0, -1.0, -1.0]) / S6)
    assert basis.theta_a == pytest.approx(math.pi / 2)
    assert basis.theta_f == pytest.approx(math.pi / 2)


def test_basis_orthonormal_and_angles_in_range():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(3, 40))
        basis = build_plane_basis(_centered(rng, n), _centered(rng, n), rng.normal(), 1.0 + rng.random())
        assert abs(basis.cost_dir @ basis.reward_dir) < 1e-10
        assert np.linalg.norm(basis.cost_dir) == pytest.approx(1.0, abs=1e-10)
        assert np.linalg.norm(basis.reward_dir) == pytest.approx(1.0, abs=1e-10)
        assert 0.0 <= basis.theta_a <= math.pi and 0.0 <= basis.theta_f <= math.pi


def test_large_budget_gives_zero_feasibility_angle():
    A_c = np.array([1.0, 0.0, -1.0])
    assert build_plane_basis([2.0, -1.0, -1.0], A_c, 10.0, 1.0).theta_f == 0.0


def test_collinear_inputs_fall_back_to_line():
    v, _ = solve_unbounded([2.0, -2.0], [1.0, -1.0], 100.0, 1.0, Mode.NORMAL)
    assert np.allclose(v, np.array([1.0, -1.0]) / math.sqrt(2))


def test_unconstrained_plane_solution_is_reward_direction():
    A = np.array([2.0, -1.0, -1.0])
    basis = build_plane_basis(A, [0.0, 1.0, -1.0], 1e9, 1.0)
    v, _ = solve_in_plane(basis, 1.0, Mode.NORMAL)
    assert np.allclose(v, A / S6)
    assert v @ A == pytest.approx(np.linalg.norm(A))


def test_budget_clips_angle_to_boundary():
    A = np.array([2.0, -1.0, -1.0])
    A_c = np.array([1.0, 0.0, -1.0])
    basis = build_plane_basis(A, A_c, 0.0, 1.0)
    assert basis.theta_a < math.pi / 2
    v, theta = solve_in_plane(basis, 1.0, Mode.NORMAL)
    assert theta == pytest.approx(math.pi / 2)
    assert np.allclose(v, np.array([0.5, -1.0, 0.5]) / math.sqrt(1.5))
    assert v @ A == pytest.approx(math.sqrt(1.5))
    assert v @ A_c == pytest.approx(0.0, abs=1e-12)
    # the oracle agrees
    sol = oracle_solve(SolverProblem(A, A_c, 0.0, 1.0, -0.99))
    assert sol.objective == pytest.approx(math.sqrt(1.5), rel=1e-8)


def test_recovery_with_orthogonal_reward_is_pure_cost_descent():
    A_c = np.array([0.0, 1.0, -1.0])
    basis = build_plane_basis([2.0, -1.0, -1.0], A_c, 0.0, 2.0)
    v, theta = solve_in_plane(basis, 2.0, Mode.RECOVERY)
    assert theta == pytest.approx(math.pi)
    assert np.allclose(v, -2.0 * A_c / np.linalg.norm(A_c))


def test_recovery_decreases_cost_when_possible():
    rng = np.random.default_rng(1)
    checked = 0
    for _ in range(300):
        n = int(rng.integers(3, 30))
        A, A_c = _centered(rng, n), _centered(rng, n)
        R = 1.0 + rng.random()
        B = rng.uniform(0.0, 1.0) * R * np.linalg.norm(A_c)
        basis = build_plane_basis(A, A_c, B, R)
        if basis.theta_a < math.pi / 2 and basis.theta_f <= math.pi / 2:
            v, _ = solve_in_plane(basis, R, Mode.RECOVERY)
            assert v @ A_c <= 1e-12
            assert v @ A >= -1e-12
            checked += 1
    assert checked > 50


def test_no_clipping_needed_matches_plane_solution():
    rng = np.random.default_rng(2)
    A, A_c = _centered(rng, 20), _centered(rng, 20)
    prob = SolverProblem(A, A_c, 0.5, 0.5, -0.99)
    sol = solve_with_bounds(prob)
    v, _ = solve_unbounded(A, A_c, 0.5, 0.5, Mode.NORMAL)
    assert sol.iterations == 1 and sol.n_masked == 0
    assert np.allclose(sol.v, v, rtol=0, atol=1e-14)


def test_two_element_mask():
    R = 0.9 * math.sqrt(2)
    v, _ = solve_unbounded([-1.0, 1.0], [1.0, -1.0], 100.0, R, Mode.NORMAL)
    assert np.allclose(v, [-0.9, 0.9])
    sol = solve_with_bounds(SolverProblem([-1.0, 1.0], [1.0, -1.0], 100.0, R, -0.5))
    assert np.allclose(sol.v, [-0.5, 0.5]) and sol.n_masked == 1


def test_heuristic_solutions_satisfy_constraints():
    rng = np.random.default_rng(3)
    for _ in range(100):
        prob = random_problem(rng)
        sol = solve_with_bounds(prob)
        viol = sol.violations(prob)
        assert viol["mean"] <= 1e-8
        assert np.linalg.norm(sol.v) <= prob.R * (1 + 1e-8)
        assert sol.v.min() >= prob.b - 1e-10
        if sol.info["budget_met"]:
            assert sol.is_feasible(prob)


def test_oracle_matches_circle_in_unconstrained_regime():
    rng = np.random.default_rng(4)
    A, A_c = _centered(rng, 16), _centered(rng, 16)
    R = 0.3
    prob = SolverProblem(A, A_c, 1e3, R, -0.99)
    v, _ = solve_unbounded(A, A_c, prob.B, R, Mode.NORMAL)
    assert np.linalg.norm(oracle_solve(prob).v - v) < 1e-4 * R


def test_oracle_meets_binding_budget():
    rng = np.random.default_rng(5)
    A = _centered(rng, 12)
    A_c = A + 0.3 * _centered(rng, 12)
    A_c -= A_c.mean()
    prob = SolverProblem(A, A_c, 0.1, 1.0, -0.99)
    sol = oracle_solve(prob)
    assert sol.cost == pytest.approx(prob.B, abs=1e-6 * abs(prob.B) + 1e-9)


def test_oracle_certifies_empty_set():
    rng = np.random.default_rng(6)
    A, A_c = _centered(rng, 10), _centered(rng, 10)
    R = 1.0
    prob = SolverProblem(A, A_c, -1.01 * R * np.linalg.norm(A_c), R, -0.99)
    with pytest.raises(InfeasibleProblem) as info:
        oracle_solve(prob)
    assert info.value.min_cost >= prob.B
    assert min_cost(prob)[0] == pytest.approx(info.value.min_cost, rel=1e-6)


def test_oracle_is_seed_deterministic_and_size_limited():
    prob = random_problem(np.random.default_rng(7))
    assert np.array_equal(oracle_solve(prob, seed=3).v, oracle_solve(prob, seed=3).v)
    big = SolverProblem(np.zeros(65), np.zeros(65), 0.0, 1.0)
    with pytest.raises(ConfigError):
        oracle_solve(big)


def test_unbounded_oracle_stays_in_plane():
    rng = np.random.default_rng(8)
    for _ in range(20):
        prob = random_problem(rng, b=-math.inf)
        try:
            v = oracle_solve(prob).v
        except InfeasibleProblem:
            continue
        q, _ = np.linalg.qr(np.stack([prob.A, prob.A_c], 1))
        assert np.linalg.norm(v - q @ (q.T @ v)) < 1e-6 * prob.R


def test_recovery_oracle_lowers_cost_keeping_reward():
    rng = np.random.default_rng(9)
    A, A_c = _centered(rng, 12), _centered(rng, 12)
    prob = SolverProblem(A, A_c, 0.5, 0.5, -0.99)
    sol = oracle_solve(prob, Mode.RECOVERY)
    assert sol.info["branch"] == "cost"
    assert sol.objective >= -1e-8
    assert sol.cost <= solve_with_bounds(prob, Mode.RECOVERY).cost + 1e-6


def test_json_roundtrip():
    prob = random_problem(np.random.default_rng(10))
    back, mode = SolverProblem.from_json(prob.to_json(Mode.RECOVERY))
    assert mode is Mode.RECOVERY
    assert np.array_equal(back.A, prob.A) and np.array_equal(back.A_c, prob.A_c)
    assert (back.B, back.R, back.b) == (prob.B, prob.R, prob.b)
    unb, _ = SolverProblem.from_json(SolverProblem(prob.A, prob.A_c, 1.0, 1.0, -math.inf).to_json())
    assert unb.b == -math.inf
    with pytest.raises(ConfigError):
        SolverProblem.from_json('{"A": [0.0]}')


@pytest.mark.parametrize("kwargs", [
    dict(A=[1.0, 0.0], A_c=[0.0, 0.0]),
    dict(A=[0.0, 0.0], A_c=[0.0, 0.0], R=0.0),
    dict(A=[0.0, 0.0], A_c=[0.0, 0.0], b=-1.0),
    dict(A=[0.0, 0.0], A_c=[0.0, 0.0, 0.0]),
])
def test_invalid_problems(kwargs):
    args = dict(B=0.0, R=1.0, b=-0.5) | kwargs
    with pytest.raises(ConfigError):
        SolverProblem(**args)


def test_radius_schemes():
    assert ratio_radius(100, 0.02) == pytest.approx(math.sqrt(100 * 0.02 / KL_TO_VARIANCE))
    assert ratio_radius(100, 0.02, "linear") == pytest.approx(200 * 0.02 / KL_TO_VARIANCE)
    with pytest.raises(ConfigError):
        ratio_radius(10, 0.02, "cubic")


def test_kl_vs_variance_examples():
    assert ratio_kl_vs_variance(np.ones(5)) == (0.0, 0.0)
    kl, var = ratio_kl_vs_variance([0.5, 1.5])
    assert kl == pytest.approx(0.1308, abs=1e-4)
    assert var == pytest.approx(0.25)
    with pytest.raises(ContractError):
        ratio_kl_vs_variance([0.0, 2.0])


def test_kl_bounds_on_random_vectors():
    rng = np.random.default_rng(11)
    for _ in range(200):
        v = rng.gamma(2.0, size=int(rng.integers(2, 50)))
        v /= v.mean()
        kl, var = ratio_kl_vs_variance(v)
        assert kl < var
        if forward_kl_bound(v) < math.inf:
            assert forward_kl_estimate(v) <= forward_kl_bound(v)
    x = rng.uniform(1e-9, 2.0, 10_000)
    assert np.all(xlogx_lower_bound(x) <= x * np.log(x) + 1e-12)


def test_fuzz_report_small():
    rep = fuzz(5, seed=1)
    assert rep["summary"]["count"] == 5 and len(rep["instances"]) == 5
    assert rep == fuzz(5, seed=1)
    assert fuzz(0)["summary"]["max_gap_relative"] == 0.0


def test_oracle_agrees_with_cvxpy():
    cp = pytest.importorskip("cvxpy")
    rng = np.random.default_rng(12)
    for _ in range(5):
        prob = random_problem(rng)
        x = cp.Variable(prob.n)
        cons = [cp.sum(x) == 0, cp.norm(x, 2) <= prob.R, x >= prob.b, prob.A_c @ x <= prob.B]
        best = cp.Problem(cp.Maximize(prob.A @ x), cons).solve()
        assert oracle_solve(prob).objective == pytest.approx(best, rel=1e-6, abs=1e-6)
