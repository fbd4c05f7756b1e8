"""Dense symmetric matrix primitives: eigendecomposition, Cholesky, log-det,
inverse, and the shared positive-semidefiniteness test."""

from typing import NamedTuple, Optional

import numpy as np
from scipy.linalg.lapack import dpotrf

from .errors import NotPositiveDefiniteError
from .validation import check_symmetric

# A symmetric matrix counts as PSD when lmin >= -PSD_RTOL * max(1, lmax);
# rank-based builders produce tiny negative eigenvalues from rounding.
PSD_RTOL = 1e-8


class EigenDecomposition(NamedTuple):
    values: np.ndarray  # sorted descending
    vectors: np.ndarray  # orthonormal columns, vectors[:, i] pairs with values[i]


def eigen_sym(A) -> EigenDecomposition:
    """Full eigendecomposition of a symmetric matrix, eigenvalues descending."""
    A = check_symmetric(A)
    values, vectors = np.linalg.eigh(A)
    return EigenDecomposition(values[::-1].copy(), vectors[:, ::-1].copy())


def cholesky_lower(A) -> Optional[np.ndarray]:
    """Lower Cholesky factor of A, or None when A is not positive definite.

    Not-PD is a value, not a failure; callers branch on it.
    """
    A = check_symmetric(A)
    c, info = dpotrf(A, lower=1, clean=1, overwrite_a=0)
    if info != 0:
        return None
    return c


def _factor_or_raise(A, name):
    A = check_symmetric(A, name=name)
    c, info = dpotrf(A, lower=1, clean=1, overwrite_a=0)
    if info != 0:
        raise NotPositiveDefiniteError(
            f"{name} is not positive definite (leading minor of order {info})",
            minor=int(info),
        )
    return c


def log_det_pd(A, name="A") -> float:
    """log det(A) for positive definite A, via 2 * sum(log diag(L))."""
    L = _factor_or_raise(A, name)
    return 2.0 * float(np.sum(np.log(np.diag(L))))


def inverse_pd(A, name="A") -> np.ndarray:
    """Inverse of a positive definite matrix via its Cholesky factor."""
    L = _factor_or_raise(A, name)
    p = L.shape[0]
    inv_l = np.linalg.solve(L, np.eye(p))
    inv = inv_l.T @ inv_l
    return 0.5 * (inv + inv.T)


def is_psd(A) -> bool:
    """Shared PSD test with the package-wide rounding tolerance."""
    values = np.linalg.eigvalsh(check_symmetric(A))
    return bool(values[0] >= -PSD_RTOL * max(1.0, float(values[-1])))
