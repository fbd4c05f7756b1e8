"""Sparse regression coefficients recovered from a joint precision matrix."""

import numpy as np

from .estimators import RobustGraphicalLasso
from .validation import check_data_matrix, check_vector


def regression_from_precision(X, y, method="GlassoGaussQn", selection="cv",
                              rho=None, cv_folds=5, seed=0, **estimator_kwargs):
    """Regress y on the columns of X through the joint precision matrix.

    Estimates the precision matrix of the (p+1)-column matrix (X | y) and
    applies the partitioned-inverse identity: the coefficient vector is the
    last column of the precision matrix divided by the negated last diagonal
    entry. Sparsity of the joint estimate carries over to the coefficients.
    """
    X = check_data_matrix(X)
    y = check_vector(y, min_len=2, name="y")
    if y.size != X.shape[0]:
        raise ValueError(f"y has {y.size} entries for {X.shape[0]} rows of X")
    joint = np.column_stack([X, y])
    est = RobustGraphicalLasso(
        method=method, selection=selection, rho=rho, cv_folds=cv_folds,
        seed=seed, **estimator_kwargs,
    ).fit(joint)
    theta = est.precision_
    return -theta[:-1, -1] / theta[-1, -1]
