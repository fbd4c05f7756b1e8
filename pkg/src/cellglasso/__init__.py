"""Cellwise-robust sparse precision matrix estimation.

Robust pairwise covariance matrices (rank and sign based correlations with
high-breakdown scales) plugged into an L1-penalized precision solver, with
robust penalty selection and a reproducible simulation harness.
"""

from .association import (
    CORRELATION_KINDS,
    correlation,
    gauss_rank_corr,
    gk_cov,
    pearson_corr,
    quadrant_corr,
    ranks,
    spearman_corr,
)
from .covariance import (
    CovarianceEstimate,
    corr_based_cov,
    gk_cov_matrix,
    gk_npd_cov,
    nearest_psd,
    sample_cov,
    spatial_median,
    spatial_sign_cov,
)
from .errors import (
    CellGlassoError,
    DegenerateColumnError,
    DegenerateMarginError,
    FoldTooSmallError,
    NotPositiveDefiniteError,
    UndefinedCorrelationError,
)
from .estimators import METHODS, RobustGraphicalLasso, covariance_builder
from .glasso import (
    GlassoConfig,
    PrecisionEstimate,
    glasso_path,
    glasso_solve,
    kkt_check,
    sparsity_pattern,
)
from .linalg import (
    EigenDecomposition,
    cholesky_lower,
    eigen_sym,
    inverse_pd,
    is_psd,
    log_det_pd,
)
from .regression import regression_from_precision
from .scale import MAD, QN, SAMPLE_SD, ScaleEstimator, mad, median, qn
from .selection import RhoGrid, RhoSelection, bic_select, cv_select, rho_grid
from .simulate import (
    ContaminationSpec,
    EvaluationReport,
    SchemeSpec,
    SweepReport,
    breakdown_sweep,
    contaminate_cellwise,
    contaminate_cellwise_per_column,
    d_metric,
    fp_fn,
    kl_divergence,
    make_theta0,
    run_experiment,
    sample_alternative_t,
    sample_mvn,
)

__version__ = "0.1.0"

__all__ = [
    "CORRELATION_KINDS",
    "CellGlassoError",
    "ContaminationSpec",
    "CovarianceEstimate",
    "DegenerateColumnError",
    "DegenerateMarginError",
    "EigenDecomposition",
    "EvaluationReport",
    "FoldTooSmallError",
    "GlassoConfig",
    "MAD",
    "METHODS",
    "NotPositiveDefiniteError",
    "PrecisionEstimate",
    "QN",
    "RhoGrid",
    "RhoSelection",
    "RobustGraphicalLasso",
    "SAMPLE_SD",
    "ScaleEstimator",
    "SchemeSpec",
    "SweepReport",
    "UndefinedCorrelationError",
    "breakdown_sweep",
    "cholesky_lower",
    "contaminate_cellwise",
    "contaminate_cellwise_per_column",
    "corr_based_cov",
    "correlation",
    "covariance_builder",
    "cv_select",
    "bic_select",
    "d_metric",
    "eigen_sym",
    "fp_fn",
    "gauss_rank_corr",
    "gk_cov",
    "gk_cov_matrix",
    "gk_npd_cov",
    "glasso_path",
    "glasso_solve",
    "inverse_pd",
    "is_psd",
    "kkt_check",
    "kl_divergence",
    "log_det_pd",
    "mad",
    "make_theta0",
    "median",
    "nearest_psd",
    "pearson_corr",
    "qn",
    "quadrant_corr",
    "ranks",
    "regression_from_precision",
    "rho_grid",
    "run_experiment",
    "sample_alternative_t",
    "sample_cov",
    "sample_mvn",
    "sparsity_pattern",
    "spatial_median",
    "spatial_sign_cov",
    "spearman_corr",
]
