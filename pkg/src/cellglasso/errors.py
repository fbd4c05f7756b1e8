"""Exception types shared across the package."""


class CellGlassoError(Exception):
    """Base class for all package-specific errors."""


class NotPositiveDefiniteError(CellGlassoError):
    """A matrix required to be positive definite is not.

    ``minor`` is the 1-based order of the first failing leading minor when
    known (as reported by the Cholesky factorization), else None.
    """

    def __init__(self, message, minor=None):
        super().__init__(message)
        self.minor = minor


class UndefinedCorrelationError(CellGlassoError):
    """A correlation is requested for a constant (rank-degenerate) input."""


class DegenerateColumnError(CellGlassoError):
    """A data column has zero robust scale; covariance entries are undefined."""

    def __init__(self, column, message=None):
        super().__init__(message or f"column {column} has zero scale")
        self.column = column


class DegenerateMarginError(CellGlassoError):
    """One margin of a pairwise covariance has zero scale."""


class FoldTooSmallError(CellGlassoError):
    """A cross-validation fold is too small for the covariance builder."""

    def __init__(self, n_folds, fold_size):
        super().__init__(
            f"cross validation with K={n_folds} folds leaves a fold of "
            f"{fold_size} rows; at least 3 are required"
        )
        self.n_folds = n_folds
        self.fold_size = fold_size
