"""Scikit-learn style estimator wrapping the full pipeline: robust covariance
build, penalty selection, and the penalized precision solve."""

import numpy as np
from sklearn.base import BaseEstimator

from .covariance import corr_based_cov, gk_npd_cov, sample_cov, spatial_sign_cov
from .errors import NotPositiveDefiniteError
from .glasso import GlassoConfig, glasso_solve
from .linalg import cholesky_lower, inverse_pd
from .selection import _neg_log_likelihood, bic_select, cv_select
from .validation import check_data_matrix

#: Estimator identifiers accepted by ``method=`` and the command line.
METHODS = (
    "GlassoClass",
    "GlassoQuadQn",
    "GlassoGaussQn",
    "GlassoSpearmanQn",
    "GlassoNPDQn",
    "GlassoSpSign",
    "Classic",
)

_CORR_KIND = {
    "GlassoQuadQn": "quadrant",
    "GlassoGaussQn": "gauss_rank",
    "GlassoSpearmanQn": "spearman",
}


def covariance_builder(method, scale="qn"):
    """Covariance builder callable for a battery method id.

    The Qn suffix in the rank-based ids reflects the default scale; ``scale``
    may override it with "mad" or "sd".
    """
    if method in _CORR_KIND:
        kind = _CORR_KIND[method]
        return lambda X: corr_based_cov(X, kind=kind, scale=scale)
    if method == "GlassoNPDQn":
        return lambda X: gk_npd_cov(X, scale=scale)
    if method == "GlassoSpSign":
        return lambda X: spatial_sign_cov(X)
    if method in ("GlassoClass", "Classic"):
        return sample_cov
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


class RobustGraphicalLasso(BaseEstimator):
    """Sparse precision matrix estimation robust to cellwise outliers.

    Builds a covariance estimate according to ``method``, selects the
    penalty by cross validation, an information criterion, or a fixed value,
    and solves the L1-penalized log-likelihood problem. The special method
    "Classic" skips the penalized solve and inverts the sample covariance
    directly (requires more rows than columns).

    Parameters
    ----------
    method : str
        One of ``METHODS``. "GlassoGaussQn" (normal-scores correlation with
        the Qn scale) is the recommended default under cellwise
        contamination.
    selection : str
        "cv", "bic", or "fixed".
    rho : float or None
        Penalty value when selection="fixed".
    cv_folds : int
        Number of cross-validation folds.
    cv_aggregate : str
        "mean" (default) or "median" aggregation of per-fold scores.
    scale : str
        Marginal scale estimator for the robust builders: "qn", "mad", "sd".
    seed : int
        Seed for the cross-validation fold shuffle.
    outer_tol, max_outer, inner_tol, max_inner, penalize_diagonal :
        Solver settings, see GlassoConfig.
    zero_tol : float
        Threshold used when reporting the estimated support.

    Attributes
    ----------
    covariance_ : ndarray
        The covariance estimate fed to the solver.
    precision_ : ndarray
        The estimated precision matrix.
    rho_ : float or None
        The penalty used (None for "Classic").
    selection_ : RhoSelection or None
        Scores of the grid search when selection is "cv" or "bic".
    result_ : PrecisionEstimate or None
        Full solver output.
    """

    def __init__(self, method="GlassoGaussQn", selection="cv", rho=None,
                 cv_folds=5, cv_aggregate="mean", scale="qn", seed=0,
                 outer_tol=1e-4, max_outer=100, inner_tol=1e-6, max_inner=1000,
                 penalize_diagonal=True, zero_tol=1e-8):
        self.method = method
        self.selection = selection
        self.rho = rho
        self.cv_folds = cv_folds
        self.cv_aggregate = cv_aggregate
        self.scale = scale
        self.seed = seed
        self.outer_tol = outer_tol
        self.max_outer = max_outer
        self.inner_tol = inner_tol
        self.max_inner = max_inner
        self.penalize_diagonal = penalize_diagonal
        self.zero_tol = zero_tol

    def _solver_kwargs(self):
        return dict(
            outer_tol=self.outer_tol,
            max_outer=self.max_outer,
            inner_tol=self.inner_tol,
            max_inner=self.max_inner,
            penalize_diagonal=self.penalize_diagonal,
        )

    def fit(self, X, y=None):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        X = check_data_matrix(X)
        n, p = X.shape

        if self.method == "Classic":
            cov = sample_cov(X)
            if n <= p:
                raise ValueError(
                    f"Classic requires more rows than columns (n={n}, p={p})"
                )
            if cholesky_lower(cov.matrix) is None:
                raise NotPositiveDefiniteError("sample covariance is singular")
            self.covariance_ = cov.matrix
            self.scales_ = cov.scales
            self.precision_ = inverse_pd(cov.matrix)
            self.rho_ = None
            self.selection_ = None
            self.result_ = None
            self.kkt_residual_ = None
            self.n_iter_ = 0
            self.converged_ = True
            return self

        builder = covariance_builder(self.method, scale=self.scale)
        cov = builder(X)

        if self.selection == "fixed":
            if self.rho is None:
                raise ValueError("selection='fixed' requires rho")
            rho = float(self.rho)
            self.selection_ = None
        elif self.selection == "cv":
            self.selection_ = cv_select(
                X, builder, n_folds=self.cv_folds, seed=self.seed,
                aggregate=self.cv_aggregate, cov=cov, **self._solver_kwargs(),
            )
            rho = self.selection_.chosen_rho
        elif self.selection == "bic":
            self.selection_ = bic_select(
                X, builder, zero_tol=self.zero_tol, cov=cov,
                **self._solver_kwargs(),
            )
            rho = self.selection_.chosen_rho
        else:
            raise ValueError("selection must be 'cv', 'bic' or 'fixed'")

        result = glasso_solve(cov, GlassoConfig(rho=rho, **self._solver_kwargs()))
        self.covariance_ = cov.matrix
        self.scales_ = cov.scales
        self.precision_ = result.theta
        self.result_ = result
        self.rho_ = result.rho
        self.kkt_residual_ = result.kkt_residual
        self.n_iter_ = result.iterations
        self.converged_ = result.converged
        return self

    def get_precision(self):
        return self.precision_

    def edges(self):
        """Estimated conditional dependencies as (i, j, weight), i < j."""
        theta = self.precision_
        p = theta.shape[0]
        out = []
        for i in range(p):
            for j in range(i + 1, p):
                if abs(theta[i, j]) > self.zero_tol:
                    out.append((i, j, float(theta[i, j])))
        return out

    def score(self, X_test, y=None):
        """Gaussian log-likelihood of held-out data (higher is better).

        The held-out covariance is built by this estimator's own builder, so
        the score stays meaningful under contaminated test rows.
        """
        X_test = check_data_matrix(X_test)
        builder = covariance_builder(self.method, scale=self.scale)
        cov_test = builder(X_test)
        return -_neg_log_likelihood(self.precision_, cov_test.matrix)
