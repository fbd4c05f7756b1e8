import numpy as np
import pytest
from sklearn.base import clone

from cellglasso.estimators import METHODS, RobustGraphicalLasso, covariance_builder
from cellglasso.glasso import kkt_check
from cellglasso.linalg import cholesky_lower
from cellglasso.simulate import SchemeSpec, make_theta0, sample_mvn


@pytest.fixture(scope="module")
def banded_data():
    theta0 = make_theta0(SchemeSpec("banded", 10))
    return sample_mvn(theta0, 120, seed=0)


class TestSklearnApi:
    def test_get_set_params_roundtrip(self):
        est = RobustGraphicalLasso(method="GlassoSpearmanQn", cv_folds=3, seed=9)
        params = est.get_params()
        assert params["method"] == "GlassoSpearmanQn"
        assert params["cv_folds"] == 3
        other = RobustGraphicalLasso().set_params(**params)
        assert other.get_params() == params

    def test_clone(self):
        est = RobustGraphicalLasso(method="GlassoQuadQn", selection="bic")
        cloned = clone(est)
        assert cloned.get_params() == est.get_params()

    def test_fit_returns_self_and_sets_attributes(self, banded_data):
        est = RobustGraphicalLasso(selection="fixed", rho=0.3)
        assert est.fit(banded_data) is est
        p = banded_data.shape[1]
        assert est.precision_.shape == (p, p)
        assert est.covariance_.shape == (p, p)
        assert est.rho_ == 0.3
        assert est.converged_
        assert cholesky_lower(est.precision_) is not None
        assert est.kkt_residual_ == pytest.approx(
            kkt_check(est.precision_, est.covariance_, 0.3), abs=1e-12
        )

    def test_score_prefers_truth_scale(self, banded_data):
        est = RobustGraphicalLasso(selection="cv", seed=1).fit(banded_data)
        theta0 = make_theta0(SchemeSpec("banded", 10))
        X_test = sample_mvn(theta0, 80, seed=42)
        s_fit = est.score(X_test)
        assert np.isfinite(s_fit)

    def test_unknown_method_raises(self, banded_data):
        with pytest.raises(ValueError, match="unknown method"):
            RobustGraphicalLasso(method="Magic").fit(banded_data)

    def test_selection_validation(self, banded_data):
        with pytest.raises(ValueError, match="requires rho"):
            RobustGraphicalLasso(selection="fixed").fit(banded_data)
        with pytest.raises(ValueError, match="selection"):
            RobustGraphicalLasso(selection="aic").fit(banded_data)


class TestBattery:
    @pytest.mark.parametrize("method", [m for m in METHODS if m != "Classic"])
    def test_each_method_fits(self, banded_data, method):
        est = RobustGraphicalLasso(method=method, selection="cv", cv_folds=3,
                                   seed=2).fit(banded_data)
        assert est.converged_
        assert est.rho_ in est.selection_.grid.values
        assert cholesky_lower(est.precision_) is not None

    def test_classic_is_plain_inverse(self, banded_data):
        est = RobustGraphicalLasso(method="Classic").fit(banded_data)
        from cellglasso.covariance import sample_cov
        from cellglasso.linalg import inverse_pd

        expected = inverse_pd(sample_cov(banded_data).matrix)
        assert np.allclose(est.precision_, expected)
        assert est.rho_ is None and est.selection_ is None

    def test_classic_requires_tall_data(self):
        rng = np.random.default_rng(3)
        with pytest.raises(ValueError, match="more rows than columns"):
            RobustGraphicalLasso(method="Classic").fit(rng.standard_normal((10, 12)))

    def test_builder_registry_matches_methods(self):
        for method in METHODS:
            builder = covariance_builder(method)
            assert callable(builder)
        with pytest.raises(ValueError, match="unknown method"):
            covariance_builder("Magic")

    def test_bic_selection_path(self, banded_data):
        est = RobustGraphicalLasso(selection="bic").fit(banded_data)
        assert est.selection_.method == "bic"
        assert est.rho_ in est.selection_.grid.values

    def test_scale_override(self, banded_data):
        est_mad = RobustGraphicalLasso(selection="fixed", rho=0.4, scale="mad")
        est_mad.fit(banded_data)
        est_qn = RobustGraphicalLasso(selection="fixed", rho=0.4, scale="qn")
        est_qn.fit(banded_data)
        assert not np.allclose(est_mad.covariance_, est_qn.covariance_)

    def test_edges_reported_above_threshold(self, banded_data):
        est = RobustGraphicalLasso(selection="fixed", rho=0.2).fit(banded_data)
        edges = est.edges()
        theta = est.precision_
        for i, j, w in edges:
            assert i < j
            assert theta[i, j] == w
            assert abs(w) > est.zero_tol
        n_nonzero_upper = int(np.sum(np.abs(np.triu(theta, 1)) > est.zero_tol))
        assert len(edges) == n_nonzero_upper
