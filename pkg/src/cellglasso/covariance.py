"""Full p x p covariance builders.

Four routes to a covariance estimate:

* ``corr_based_cov`` -- robust marginal scales times a pairwise correlation
  matrix (Gaussian rank, Spearman, Quadrant or Pearson). Each correlation
  matrix is a Gram matrix of transformed data, so the result is positive
  semidefinite by construction.
* ``gk_npd_cov`` -- pairwise variance-difference covariances, which are not
  necessarily PSD, repaired by projection onto the PSD cone.
* ``spatial_sign_cov`` -- direction vectors from the spatial median give the
  eigenvectors; eigenvalues are recalibrated with Qn along those directions.
* ``sample_cov`` -- the classical estimator, as a benchmark.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri
from scipy.stats import rankdata

from .association import CORRELATION_KINDS, normal_scores_ss
from .errors import DegenerateColumnError
from .linalg import eigen_sym, is_psd
from .scale import QN, get_scale_estimator
from .validation import check_data_matrix, check_symmetric


@dataclass
class CovarianceEstimate:
    """A symmetric covariance estimate with builder provenance."""

    matrix: np.ndarray
    builder: str
    psd_certified: bool
    scales: np.ndarray = field(repr=False)

    @property
    def p(self) -> int:
        return self.matrix.shape[0]


def _column_scales(X, scale):
    scale = get_scale_estimator(scale)
    scales = np.array([scale(X[:, j]) for j in range(X.shape[1])])
    for j, s in enumerate(scales):
        if s <= 0.0:
            raise DegenerateColumnError(j)
    return scales


def _correlation_matrix(X, kind):
    """Correlation matrix as a Gram matrix of transformed columns, unit diagonal."""
    n, p = X.shape
    if kind == "gauss_rank":
        R_ranks = np.apply_along_axis(rankdata, 0, X)
        Z = ndtri(R_ranks / (n + 1.0))
        R = (Z.T @ Z) / normal_scores_ss(n)
    elif kind == "spearman":
        Z = np.apply_along_axis(rankdata, 0, X) - (n + 1.0) / 2.0
        norms = np.sqrt(np.einsum("ij,ij->j", Z, Z))
        R = (Z / norms).T @ (Z / norms)
    elif kind == "quadrant":
        Z = np.sign(X - np.median(X, axis=0))
        R = (Z.T @ Z) / n
    elif kind == "pearson":
        Z = X - X.mean(axis=0)
        norms = np.sqrt(np.einsum("ij,ij->j", Z, Z))
        R = (Z / norms).T @ (Z / norms)
    else:
        raise ValueError(
            f"unknown correlation kind {kind!r}; choose from {CORRELATION_KINDS}"
        )
    R = 0.5 * (R + R.T)
    # Diagonal self-association can fall below one (ties, quadrant zero signs);
    # raising it to one adds a nonnegative diagonal and preserves PSD-ness.
    np.fill_diagonal(R, 1.0)
    return np.clip(R, -1.0, 1.0)


def corr_based_cov(X, kind="gauss_rank", scale=QN) -> CovarianceEstimate:
    """Covariance from marginal scales and a pairwise correlation matrix.

    Entry (j, k) is scale(col j) * scale(col k) * r(col j, col k); the
    diagonal is exactly the squared scales.
    """
    X = check_data_matrix(X)
    scales = _column_scales(X, scale)
    R = _correlation_matrix(X, kind)
    S = R * np.outer(scales, scales)
    np.fill_diagonal(S, scales**2)
    S = 0.5 * (S + S.T)
    return CovarianceEstimate(S, f"corr:{kind}", psd_certified=is_psd(S), scales=scales)


def gk_cov_matrix(X, scale=QN) -> np.ndarray:
    """Pairwise variance-difference covariance matrix; not necessarily PSD.

    Diagonal entries are the squared marginal scales directly (equivalent to
    the identity applied with x = y, but cheaper).
    """
    X = check_data_matrix(X)
    scale = get_scale_estimator(scale)
    scales = _column_scales(X, scale)
    p = X.shape[1]
    S = np.diag(scales**2)
    inv = 1.0 / scales
    for j in range(p):
        xj = X[:, j] * inv[j]
        for k in range(j + 1, p):
            yk = X[:, k] * inv[k]
            plus = scale(xj + yk)
            minus = scale(xj - yk)
            S[j, k] = S[k, j] = (plus * plus - minus * minus) * scales[j] * scales[k] / 4.0
    return S


def nearest_psd(A) -> np.ndarray:
    """Frobenius projection onto the PSD cone by eigenvalue clipping."""
    A = check_symmetric(A)
    values, vectors = eigen_sym(A)
    clipped = np.maximum(values, 0.0)
    P = (vectors * clipped) @ vectors.T
    return 0.5 * (P + P.T)


def gk_npd_cov(X, scale=QN) -> CovarianceEstimate:
    """Pairwise variance-difference covariances repaired to nearest PSD."""
    scale = get_scale_estimator(scale)
    raw = gk_cov_matrix(X, scale)
    scales = np.sqrt(np.diag(raw))
    S = nearest_psd(raw)
    return CovarianceEstimate(S, "gk_npd", psd_certified=True, scales=scales)


def spatial_median(X, return_info=False):
    """Geometric median of the rows, by damped fixed-point iteration.

    Starts from the coordinatewise median; the 1e-10 added to distances keeps
    the update defined when the iterate lands on a data point. The distance
    objective is nonincreasing along the iterates.
    """
    X = check_data_matrix(X, min_rows=1)
    mu = np.median(X, axis=0)
    converged = False
    iterations = 0
    objective = [float(np.linalg.norm(X - mu, axis=1).sum())]
    for iterations in range(1, 501):
        d = np.linalg.norm(X - mu, axis=1) + 1e-10
        w = 1.0 / d
        mu_new = (w @ X) / w.sum()
        step = np.linalg.norm(mu_new - mu)
        mu = mu_new
        objective.append(float(np.linalg.norm(X - mu, axis=1).sum()))
        if step <= 1e-8 * (1.0 + np.linalg.norm(mu)):
            converged = True
            break
    if return_info:
        return mu, converged, iterations, np.asarray(objective)
    return mu


def spatial_sign_objective(X, mu) -> float:
    """Sum of Euclidean distances minimized by the spatial median."""
    X = check_data_matrix(X, min_rows=1)
    return float(np.linalg.norm(X - np.asarray(mu, dtype=float), axis=1).sum())


def unit_direction(y) -> np.ndarray:
    """y / ||y||, with the zero vector mapped to zero."""
    y = np.asarray(y, dtype=float)
    nrm = np.linalg.norm(y)
    if nrm == 0.0:
        return np.zeros_like(y)
    return y / nrm


@dataclass
class SpatialSignState:
    """Intermediate quantities of the spatial sign covariance."""

    location: np.ndarray
    eigvecs: np.ndarray
    robust_eigvals: np.ndarray


def spatial_sign_state(X) -> SpatialSignState:
    X = check_data_matrix(X)
    n = X.shape[0]
    mu = spatial_median(X)
    Y = X - mu
    norms = np.linalg.norm(Y, axis=1)
    U = np.zeros_like(Y)
    nonzero = norms > 0.0
    U[nonzero] = Y[nonzero] / norms[nonzero, None]
    sign_cov = (U.T @ U) / n
    _, vectors = eigen_sym(sign_cov)
    # Only the eigenvectors of the sign covariance are usable directly; the
    # eigenvalues are recalibrated as squared Qn scales of the projected data.
    proj = X @ vectors
    robust_eigvals = np.array([QN(proj[:, j]) ** 2 for j in range(X.shape[1])])
    return SpatialSignState(mu, vectors, robust_eigvals)


def spatial_sign_incons(X) -> np.ndarray:
    """Uncalibrated spatial sign covariance (mean of direction outer products)."""
    X = check_data_matrix(X)
    mu = spatial_median(X)
    Y = X - mu
    norms = np.linalg.norm(Y, axis=1)
    U = np.zeros_like(Y)
    nonzero = norms > 0.0
    U[nonzero] = Y[nonzero] / norms[nonzero, None]
    return (U.T @ U) / X.shape[0]


def spatial_sign_cov(X) -> CovarianceEstimate:
    """Spatial sign covariance with Qn-recalibrated eigenvalues."""
    state = spatial_sign_state(X)
    V = state.eigvecs
    S = (V * state.robust_eigvals) @ V.T
    S = 0.5 * (S + S.T)
    scales = np.sqrt(np.clip(np.diag(S), 0.0, None))
    return CovarianceEstimate(S, "spatial_sign", psd_certified=True, scales=scales)


def sample_cov(X) -> CovarianceEstimate:
    """Classical sample covariance with the n-1 denominator."""
    X = check_data_matrix(X)
    n = X.shape[0]
    Xc = X - X.mean(axis=0)
    S = (Xc.T @ Xc) / (n - 1)
    S = 0.5 * (S + S.T)
    scales = np.sqrt(np.clip(np.diag(S), 0.0, None))
    return CovarianceEstimate(S, "sample", psd_certified=True, scales=scales)
