"""Input validation helpers used across estimators and builders."""

import numpy as np


def check_vector(x, min_len=1, name="x"):
    """Coerce to a finite 1-D float array of length >= min_len."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        x = x.ravel()
    if x.size < min_len:
        raise ValueError(f"{name} must have at least {min_len} entries, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite values")
    return x


def check_data_matrix(X, min_rows=2, name="X"):
    """Coerce to a finite 2-D float array with at least ``min_rows`` rows."""
    values = getattr(X, "values", X)
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got ndim={values.ndim}")
    n, p = values.shape
    if n < min_rows:
        raise ValueError(f"{name} must have at least {min_rows} rows, got {n}")
    if p < 1:
        raise ValueError(f"{name} must have at least one column")
    if not np.all(np.isfinite(values)):
        bad = np.argwhere(~np.isfinite(values))[0]
        raise ValueError(
            f"{name} contains a non-finite value at row {bad[0]}, column {bad[1]}; "
            "missing values are rejected"
        )
    return values


def check_symmetric(A, name="A"):
    """Coerce to a finite square matrix, symmetrized as (A + A.T) / 2."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite values")
    return 0.5 * (A + A.T)


def as_seed_sequence(seed):
    """Normalize int / SeedSequence inputs to a SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)
