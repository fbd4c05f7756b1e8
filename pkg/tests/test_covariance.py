import numpy as np
import pytest

from cellglasso.covariance import (
    corr_based_cov,
    gk_cov_matrix,
    gk_npd_cov,
    nearest_psd,
    sample_cov,
    spatial_median,
    spatial_sign_cov,
    spatial_sign_incons,
    spatial_sign_state,
    unit_direction,
)
from cellglasso.errors import DegenerateColumnError
from cellglasso.linalg import eigen_sym, is_psd
from cellglasso.scale import QN, qn

from helpers import random_symmetric


def contaminate_columns(X, count, low, high, rng):
    X = X.copy()
    n, p = X.shape
    for j in range(p):
        rows = rng.choice(n, count, replace=False)
        X[rows, j] = rng.uniform(low, high, count)
    return X


class TestCorrBasedCov:
    def test_identical_columns(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(40)
        X = np.column_stack([x, x])
        est = corr_based_cov(X, "gauss_rank")
        q2 = qn(x) ** 2
        assert np.allclose(est.matrix, q2 * np.ones((2, 2)), rtol=1e-10)
        assert est.psd_certified
        assert est.builder == "corr:gauss_rank"

    def test_single_column(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal(30)
        est = corr_based_cov(x[:, None], "spearman")
        assert est.matrix.shape == (1, 1)
        assert est.matrix[0, 0] == pytest.approx(qn(x) ** 2)

    def test_independent_columns_near_diagonal(self):
        rng = np.random.default_rng(2)
        X = rng.standard_normal((1000, 3))
        est = corr_based_cov(X, "gauss_rank")
        scales = est.scales
        normalized = est.matrix / np.outer(scales, scales)
        off = normalized[~np.eye(3, dtype=bool)]
        assert np.all(np.abs(off) <= 0.1)

    def test_diagonal_is_squared_scale(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((50, 4))
        for kind in ("gauss_rank", "spearman", "quadrant", "pearson"):
            est = corr_based_cov(X, kind)
            expected = np.array([qn(X[:, j]) ** 2 for j in range(4)])
            assert np.allclose(np.diag(est.matrix), expected, rtol=1e-12)

    def test_matches_pairwise_functions(self):
        from cellglasso.association import CORRELATION_FUNCTIONS
        from cellglasso.scale import qn

        rng = np.random.default_rng(4)
        X = rng.standard_normal((35, 3))
        for kind, fn in CORRELATION_FUNCTIONS.items():
            est = corr_based_cov(X, kind)
            for j in range(3):
                for k in range(j + 1, 3):
                    expected = qn(X[:, j]) * qn(X[:, k]) * fn(X[:, j], X[:, k])
                    assert est.matrix[j, k] == pytest.approx(expected, rel=1e-9, abs=1e-12)

    def test_psd_certificate_random_data(self):
        rng = np.random.default_rng(5)
        for kind in ("gauss_rank", "spearman", "quadrant", "pearson"):
            for seed in range(5):
                X = np.random.default_rng(seed).standard_normal((30, 8))
                est = corr_based_cov(X, kind)
                assert est.psd_certified
                assert is_psd(est.matrix)

    def test_degenerate_column_rejected(self):
        X = np.column_stack([np.ones(20), np.arange(20.0)])
        with pytest.raises(DegenerateColumnError) as err:
            corr_based_cov(X, "gauss_rank")
        assert err.value.column == 0

    def test_ties_still_psd(self):
        rng = np.random.default_rng(6)
        X = rng.integers(0, 10, size=(40, 5)).astype(float)  # many ties
        for kind in ("gauss_rank", "spearman", "quadrant"):
            est = corr_based_cov(X, kind)
            assert is_psd(est.matrix), kind


class TestGkMatrix:
    def test_duplicated_column(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal(60)
        G = gk_cov_matrix(np.column_stack([x, x]))
        q2 = qn(x) ** 2
        assert np.allclose(G, q2 * np.ones((2, 2)), rtol=1e-10)

    def test_diagonal_entries(self):
        rng = np.random.default_rng(8)
        X = rng.standard_normal((50, 4))
        G = gk_cov_matrix(X)
        assert np.allclose(np.diag(G), [qn(X[:, j]) ** 2 for j in range(4)])

    def test_contamination_can_make_indefinite(self):
        # moderate cellwise contamination drives the assembled matrix
        # indefinite for at least one seed
        hits = 0
        for seed in range(3):
            rng = np.random.default_rng(seed)
            X = contaminate_columns(rng.standard_normal((60, 3)), 18, 1e2, 2e2, rng)
            if np.linalg.eigvalsh(gk_cov_matrix(X))[0] < 0:
                hits += 1
        assert hits >= 1


class TestNearestPsd:
    def test_psd_input_unchanged(self):
        rng = np.random.default_rng(9)
        V = rng.standard_normal((10, 6))
        A = V.T @ V / 10
        assert np.allclose(nearest_psd(A), A, atol=1e-10)

    def test_two_by_two_clip(self):
        P = nearest_psd(np.array([[1.0, 2.0], [2.0, 1.0]]))
        assert np.allclose(P, np.full((2, 2), 1.5), atol=1e-10)

    def test_idempotent(self):
        for seed in range(10):
            A = random_symmetric(7, seed)
            P = nearest_psd(A)
            assert np.allclose(nearest_psd(P), P, atol=1e-10)

    def test_projection_distance_is_clipped_mass(self):
        for seed in range(10):
            A = random_symmetric(6, 100 + seed)
            P = nearest_psd(A)
            values = eigen_sym(A).values
            expected = np.sum(np.minimum(values, 0.0) ** 2)
            assert np.linalg.norm(A - P) ** 2 == pytest.approx(expected, abs=1e-8)


class TestGkNpd:
    def test_already_psd_unchanged(self):
        rng = np.random.default_rng(10)
        X = rng.standard_normal((80, 3))
        G = gk_cov_matrix(X)
        if np.linalg.eigvalsh(G)[0] >= 0:
            est = gk_npd_cov(X)
            assert np.allclose(est.matrix, G, atol=1e-10)

    def test_repairs_indefinite_case(self):
        rng = np.random.default_rng(0)
        X = contaminate_columns(rng.standard_normal((60, 3)), 18, 1e2, 2e2, rng)
        G = gk_cov_matrix(X)
        assert np.linalg.eigvalsh(G)[0] < 0
        est = gk_npd_cov(X)
        assert est.psd_certified
        assert np.linalg.eigvalsh(est.matrix)[0] >= -1e-9

    def test_duplicated_column_rank_one(self):
        rng = np.random.default_rng(11)
        x = rng.standard_normal(60)
        est = gk_npd_cov(np.column_stack([x, x]))
        q2 = qn(x) ** 2
        assert np.allclose(est.matrix, q2 * np.ones((2, 2)), rtol=1e-8)


class TestSpatialMedian:
    def test_single_point(self):
        assert np.allclose(spatial_median(np.array([[2.0, -3.0]])), [2.0, -3.0])

    def test_symmetric_cross(self):
        X = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        assert np.allclose(spatial_median(X), [0.0, 0.0], atol=1e-7)

    def test_collinear_reduces_to_univariate_median(self):
        t = np.array([-3.0, -1.0, 0.0, 2.0, 7.0])
        v = np.array([1.0, 2.0]) / np.sqrt(5.0)
        X = t[:, None] * v[None, :] + np.array([0.5, -0.25])
        expected = np.median(t) * v + np.array([0.5, -0.25])
        assert np.allclose(spatial_median(X), expected, atol=1e-6)

    def test_objective_monotone(self):
        rng = np.random.default_rng(12)
        X = rng.standard_normal((50, 4)) + rng.standard_normal(4)
        _, converged, _, objective = spatial_median(X, return_info=True)
        assert converged
        assert np.all(np.diff(objective) <= 1e-10)


class TestSpatialSign:
    def test_unit_direction(self):
        assert np.allclose(unit_direction([3.0, 4.0]), [0.6, 0.8])
        assert np.allclose(unit_direction([0.0, 0.0]), [0.0, 0.0])

    def test_trace_of_sign_covariance(self):
        rng = np.random.default_rng(13)
        X = rng.standard_normal((40, 5))
        S = spatial_sign_incons(X)
        assert np.trace(S) <= 1.0 + 1e-12

    def test_spherical_data_recovers_identity(self):
        rng = np.random.default_rng(14)
        X = rng.standard_normal((2000, 3))
        est = spatial_sign_cov(X)
        assert est.psd_certified
        assert np.max(np.abs(est.matrix - np.eye(3))) <= 0.15

    def test_state_invariants(self):
        rng = np.random.default_rng(15)
        X = rng.standard_normal((60, 4))
        state = spatial_sign_state(X)
        V = state.eigvecs
        assert np.linalg.norm(V.T @ V - np.eye(4)) <= 1e-8
        assert np.all(state.robust_eigvals >= 0.0)


class TestSampleCov:
    def test_two_observations(self):
        X = np.array([[0.0, 0.0], [2.0, 0.0]])
        est = sample_cov(X)
        assert np.allclose(est.matrix, [[2.0, 0.0], [0.0, 0.0]])
        assert est.psd_certified

    def test_duplicated_dataset_denominator_relation(self):
        rng = np.random.default_rng(16)
        X = rng.standard_normal((20, 3))
        doubled = sample_cov(np.vstack([X, X])).matrix
        n = 20
        # direct-formula oracle on the stacked data
        stacked = np.vstack([X, X])
        dev = stacked - stacked.mean(axis=0)
        assert np.allclose(doubled, dev.T @ dev / (2 * n - 1))
        assert np.allclose(doubled, sample_cov(X).matrix * 2 * (n - 1) / (2 * n - 1))

    def test_constant_data(self):
        X = np.ones((10, 3)) * 4.2
        assert np.allclose(sample_cov(X).matrix, 0.0)


class TestCertificates:
    def test_every_certified_builder_passes_psd_test(self):
        rng = np.random.default_rng(18)
        X = rng.standard_normal((60, 6))
        from cellglasso.covariance import corr_based_cov as cbc

        estimates = [
            cbc(X, "gauss_rank"), cbc(X, "spearman"), cbc(X, "quadrant"),
            cbc(X, "pearson"), gk_npd_cov(X), spatial_sign_cov(X), sample_cov(X),
        ]
        for est in estimates:
            assert est.psd_certified, est.builder
            assert is_psd(est.matrix), est.builder
            assert np.all(np.diag(est.matrix) >= 0.0), est.builder
            assert np.allclose(est.matrix, est.matrix.T), est.builder


class TestBounds:
    def test_top_eigenvalue_bounded_by_scales(self):
        # contaminated data cannot push the top eigenvalue of a
        # correlation-based estimate past p * max squared scale
        rng = np.random.default_rng(17)
        for draw in range(100):
            n, p = 40, 6
            X = rng.standard_normal((n, p))
            m = int(rng.integers(0, n // 2))
            magnitude = 10 ** rng.integers(2, 10)
            if m:
                X = contaminate_columns(X, m, magnitude, 2 * magnitude, rng)
            est = corr_based_cov(X, "gauss_rank")
            top = np.linalg.eigvalsh(est.matrix)[-1]
            bound = p * max(qn(X[:, j]) for j in range(p)) ** 2
            assert top <= bound + 1e-6

    def test_breakdown_contrast_corr_vs_gk(self):
        # 30% wild cells per column: the correlation-based estimate stays
        # bounded while the pairwise variance-difference route explodes
        exploded = 0
        for seed in range(3):
            rng = np.random.default_rng(seed)
            X = contaminate_columns(rng.standard_normal((100, 10)), 30, 1e8, 2e8, rng)
            corr = corr_based_cov(X, "gauss_rank")
            top_corr = np.linalg.eigvalsh(corr.matrix)[-1]
            bound = 10 * max(qn(X[:, j]) for j in range(10)) ** 2
            assert top_corr <= bound + 1e-6
            assert top_corr < 1e4
            top_gk = np.linalg.eigvalsh(gk_npd_cov(X).matrix)[-1]
            if top_gk > 1e10:
                exploded += 1
        assert exploded >= 1
