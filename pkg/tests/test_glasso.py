import numpy as np
import pytest

from cellglasso.covariance import sample_cov
from cellglasso.errors import NotPositiveDefiniteError
from cellglasso.glasso import (
    GlassoConfig,
    glasso_path,
    glasso_solve,
    kkt_check,
    penalized_objective,
    sparsity_pattern,
)
from cellglasso.linalg import cholesky_lower, inverse_pd
from cellglasso.selection import rho_grid

from helpers import random_psd


def solve(S, rho, **kwargs):
    return glasso_solve(S, GlassoConfig(rho=rho, **kwargs))


class TestAnalyticCases:
    def test_diagonal_input(self):
        rng = np.random.default_rng(0)
        d = rng.random(6) + 0.5
        S = np.diag(d)
        for rho in rho_grid(S).values[[0, 4, 9]]:
            est = solve(S, float(rho))
            expected = np.diag(1.0 / (d + rho))
            assert np.max(np.abs(est.theta - expected)) <= 1e-8
            assert est.kkt_residual <= 1e-10
            assert est.converged

    def test_thresholded_two_by_two(self):
        S = np.array([[1.0, 0.5], [0.5, 1.0]])
        est = solve(S, 0.5)
        assert np.allclose(est.theta, np.diag([1 / 1.5, 1 / 1.5]), atol=1e-10)
        assert est.theta[0, 1] == 0.0
        assert kkt_check(est.theta, S, 0.5) <= 1e-10

    def test_unpenalized_limit_matches_inverse(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((200, 10))
        S = sample_cov(X).matrix
        est = solve(S, 1e-8)
        ref = inverse_pd(S)
        rel = np.linalg.norm(est.theta - ref) / np.linalg.norm(ref)
        assert rel <= 1e-5


class TestSolverProperties:
    def test_pd_output_on_psd_inputs(self):
        # includes rank-deficient inputs; any rho > 0 must give PD output
        for seed in range(20):
            p = int(np.random.default_rng(seed).integers(3, 30))
            rank = max(2, p // 2) if seed % 2 else None
            S = random_psd(p, seed, rank=rank)
            rho = float(rho_grid(S).values[seed % 10])
            est = solve(S, rho)
            assert cholesky_lower(est.theta) is not None
            assert est.converged

    def test_objective_monotone_over_sweeps(self):
        for seed in range(10):
            S = random_psd(12, 100 + seed)
            rho = float(rho_grid(S).values[5])
            est = glasso_solve(S, GlassoConfig(rho=rho), track_objective=True)
            q = est.objective_trace
            assert q is not None and len(q) >= 1
            drops = np.diff(q)
            assert np.all(drops >= -1e-8 * np.maximum(1.0, np.abs(q[:-1])))

    def test_smallest_eigenvalue_inheritance_bound(self):
        for seed in range(15):
            p = 8 + seed
            S = random_psd(p, 200 + seed)
            rho = float(rho_grid(S).values[seed % 10])
            est = solve(S, rho)
            lam_min = np.linalg.eigvalsh(est.theta)[0]
            lam_max_s = np.linalg.eigvalsh(S)[-1]
            assert 1.0 / lam_min <= lam_max_s + rho * p + 1e-6

    def test_unique_solution_via_permutation(self):
        # solving a symmetrically permuted problem must give the permuted
        # solution: the maximizer is unique
        rng = np.random.default_rng(2)
        for seed in range(5):
            p = 10
            S = random_psd(p, 300 + seed)
            rho = float(rho_grid(S).values[4])
            perm = rng.permutation(p)
            P = np.eye(p)[perm]
            est = solve(S, rho, outer_tol=1e-6)
            est_perm = solve(P @ S @ P.T, rho, outer_tol=1e-6)
            back = P.T @ est_perm.theta @ P
            assert np.linalg.norm(back - est.theta) <= 1e-5 * max(1.0, np.linalg.norm(est.theta))

    def test_penalty_monotonicity_of_support(self):
        for seed in range(20):
            S = random_psd(10, 400 + seed)
            grid = rho_grid(S).values  # descending
            path = glasso_path(S, grid)
            nnz = [int(np.sum(np.abs(e.theta) > 1e-8)) for e in path]
            # support can only grow as rho decreases (ties allowed)
            assert all(a <= b for a, b in zip(nnz[:-1], nnz[1:]))

    def test_warm_path_matches_cold_solves(self):
        S = random_psd(12, 500)
        grid = rho_grid(S).values
        warm = glasso_path(S, grid, warm=True)
        cold = glasso_path(S, grid, warm=False)
        for w, c in zip(warm, cold):
            assert np.linalg.norm(w.theta - c.theta) <= 1e-4 * max(1.0, np.linalg.norm(c.theta))

    def test_exact_zeros_produced(self):
        S = random_psd(8, 600)
        est = solve(S, float(rho_grid(S).values[0]))
        off = est.theta[~np.eye(8, dtype=bool)]
        assert np.all(off == 0.0)  # largest grid value kills every partial link

    def test_rejects_indefinite_input(self):
        S = np.array([[1.0, 2.0], [2.0, 1.0]])
        with pytest.raises(ValueError, match="positive semidefinite"):
            solve(S, 0.5)

    def test_rho_zero_needs_pd(self):
        S = random_psd(6, 700, rank=3)
        with pytest.raises(ValueError, match="rho = 0"):
            solve(S, 0.0)
        S_pd = random_psd(6, 701) + 0.5 * np.eye(6)
        est = solve(S_pd, 0.0)
        ref = inverse_pd(S_pd)
        assert np.linalg.norm(est.theta - ref) <= 1e-5 * np.linalg.norm(ref)

    def test_penalize_diagonal_off(self):
        rng = np.random.default_rng(3)
        d = rng.random(5) + 0.5
        S = np.diag(d)
        est = solve(S, 0.3, penalize_diagonal=False)
        assert np.allclose(est.theta, np.diag(1.0 / d), atol=1e-8)
        assert kkt_check(est.theta, S, 0.3, penalize_diagonal=False) <= 1e-10


class TestPrecisionEstimate:
    def test_working_covariance_tracks_inverse(self):
        S = random_psd(9, 1000)
        est = solve(S, float(rho_grid(S).values[5]))
        inv = inverse_pd(est.theta)
        assert np.max(np.abs(est.W - inv)) <= 1e-4 * max(1.0, np.abs(inv).max())

    def test_config_validation(self):
        with pytest.raises(ValueError, match="nonnegative"):
            GlassoConfig(rho=-0.1)
        with pytest.raises(ValueError, match="tolerances"):
            GlassoConfig(rho=0.1, outer_tol=0.0)
        with pytest.raises(ValueError, match="iteration limits"):
            GlassoConfig(rho=0.1, max_outer=0)

    def test_iterations_reported(self):
        S = random_psd(6, 1100)
        est = solve(S, 0.3)
        assert 1 <= est.iterations <= 100


class TestKktCheck:
    def test_analytic_solution_residual(self):
        d = np.array([1.0, 2.0, 3.0])
        S = np.diag(d)
        theta = np.diag(1.0 / (d + 0.4))
        assert kkt_check(theta, S, 0.4) <= 1e-10

    def test_plain_inverse_at_zero_penalty(self):
        S = random_psd(7, 800)
        assert kkt_check(inverse_pd(S), S, 0.0) <= 1e-8

    def test_perturbation_detected(self):
        d = np.array([1.0, 2.0])
        S = np.diag(d)
        theta = np.diag(1.0 / (d + 0.4))
        theta[0, 0] += 0.1
        assert kkt_check(theta, S, 0.4) > 1e-3

    def test_not_pd_theta_rejected(self):
        with pytest.raises(NotPositiveDefiniteError):
            kkt_check(np.array([[1.0, 2.0], [2.0, 1.0]]), np.eye(2), 0.1)


class TestSparsityPattern:
    def test_diagonal_theta(self):
        pattern = sparsity_pattern(np.diag([1.0, 2.0, 3.0]))
        assert np.array_equal(pattern, np.eye(3, dtype=bool))

    def test_banded_truth_is_fully_nonzero(self):
        idx = np.arange(3)
        theta0 = 0.6 ** np.abs(np.subtract.outer(idx, idx))
        assert sparsity_pattern(theta0).all()

    def test_thresholded_solution_pattern(self):
        S = np.array([[1.0, 0.5], [0.5, 1.0]])
        est = solve(S, 0.5)
        pattern = sparsity_pattern(est.theta, zero_tol=1e-6)
        assert pattern[0, 0] and pattern[1, 1]
        assert not pattern[0, 1] and not pattern[1, 0]


class TestObjective:
    def test_objective_prefers_solution(self):
        # the solver's maximizer beats nearby PD alternatives
        S = random_psd(6, 900)
        rho = float(rho_grid(S).values[3])
        est = solve(S, rho)
        q_star = penalized_objective(est.theta, S, rho)
        rng = np.random.default_rng(10)
        for _ in range(10):
            alt = est.theta + 0.05 * random_psd(6, int(rng.integers(1e6)))
            assert penalized_objective(alt, S, rho) <= q_star + 1e-8
