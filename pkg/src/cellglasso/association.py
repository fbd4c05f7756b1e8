"""Pairwise association estimators.

Provides ranks with the midrank tie convention, the normal-scores (Gaussian
rank) correlation, Spearman and Quadrant correlations, the classical sample
correlation, and the variance-difference pairwise covariance identity
cov(X, Y) = [var(aX + bY) - var(aX - bY)] / (4ab) evaluated with a robust
scale.

Spearman and Quadrant correlations are used untransformed: the nonlinear
transforms that would make them consistent at the normal model destroy
positive semidefiniteness of the assembled matrix.
"""

import numpy as np
from scipy.special import ndtri
from scipy.stats import rankdata

from .errors import DegenerateMarginError, UndefinedCorrelationError
from .scale import QN, get_scale_estimator
from .validation import check_vector

CORRELATION_KINDS = ("gauss_rank", "spearman", "quadrant", "pearson")


def ranks(x) -> np.ndarray:
    """Ranks in 1..n with midranks for ties."""
    x = check_vector(x, min_len=1)
    return rankdata(x, method="average")


def _check_pair(x, y, min_len=1):
    x = check_vector(x, min_len=min_len, name="x")
    y = check_vector(y, min_len=min_len, name="y")
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    return x, y


def _require_varying(v, label):
    if np.all(v == v[0]):
        raise UndefinedCorrelationError(f"{label} is constant; correlation undefined")


def _clip_unit(r: float) -> float:
    return float(min(1.0, max(-1.0, r)))


def normal_scores_ss(n: int) -> float:
    """Sum of squared normal scores: sum_i ndtri(i / (n+1))**2."""
    return float(np.sum(ndtri(np.arange(1, n + 1) / (n + 1.0)) ** 2))


def gauss_rank_corr(x, y) -> float:
    """Correlation of the normal scores of the ranks.

    Numerator sum of products of ndtri(rank / (n+1)) scores; denominator is
    the fixed sum of squared scores, so a tie-free column correlates with
    itself exactly to 1.
    """
    x, y = _check_pair(x, y, min_len=2)
    _require_varying(x, "x")
    _require_varying(y, "y")
    n = x.size
    zx = ndtri(ranks(x) / (n + 1.0))
    zy = ndtri(ranks(y) / (n + 1.0))
    return _clip_unit(float(zx @ zy) / normal_scores_ss(n))


def spearman_corr(x, y) -> float:
    """Sample correlation of the ranks (no consistency transform)."""
    x, y = _check_pair(x, y, min_len=2)
    _require_varying(x, "x")
    _require_varying(y, "y")
    return pearson_corr(ranks(x), ranks(y))


def quadrant_corr(x, y) -> float:
    """Mean sign of products of median-centered observations.

    sign(0) counts as 0, so constant input yields 0 rather than an error.
    """
    x, y = _check_pair(x, y, min_len=1)
    sx = np.sign(x - np.median(x))
    sy = np.sign(y - np.median(y))
    return _clip_unit(float(np.mean(sx * sy)))


def pearson_corr(x, y) -> float:
    """Classical sample correlation."""
    x, y = _check_pair(x, y, min_len=2)
    _require_varying(x, "x")
    _require_varying(y, "y")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt(float(xc @ xc) * float(yc @ yc))
    if denom == 0.0:
        raise UndefinedCorrelationError("zero variance; correlation undefined")
    return _clip_unit(float(xc @ yc) / denom)


CORRELATION_FUNCTIONS = {
    "gauss_rank": gauss_rank_corr,
    "spearman": spearman_corr,
    "quadrant": quadrant_corr,
    "pearson": pearson_corr,
}


def correlation(x, y, kind="gauss_rank") -> float:
    """Dispatch a pairwise correlation by kind."""
    try:
        fn = CORRELATION_FUNCTIONS[kind]
    except KeyError:
        raise ValueError(
            f"unknown correlation kind {kind!r}; choose from {CORRELATION_KINDS}"
        ) from None
    return fn(x, y)


def gk_cov(x, y, scale=QN) -> float:
    """Pairwise covariance from the variance-difference identity.

    With a = 1/scale(x), b = 1/scale(y) and var(.) = scale(.)^2:
    cov = [scale(a x + b y)^2 - scale(a x - b y)^2] / (4ab). Sums and
    differences of columns propagate outliers, so under cellwise
    contamination this breaks down earlier than rank-based correlations.
    """
    scale = get_scale_estimator(scale)
    x, y = _check_pair(x, y, min_len=2)
    sx = scale(x)
    sy = scale(y)
    if sx <= 0.0 or sy <= 0.0:
        raise DegenerateMarginError(
            f"zero scale in a margin (scale(x)={sx}, scale(y)={sy})"
        )
    a = 1.0 / sx
    b = 1.0 / sy
    plus = scale(a * x + b * y)
    minus = scale(a * x - b * y)
    return (plus * plus - minus * minus) / (4.0 * a * b)
