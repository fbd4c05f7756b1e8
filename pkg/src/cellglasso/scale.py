"""Univariate location and scale estimators: median, MAD and the
pairwise-difference Qn scale."""

from dataclasses import dataclass

import numpy as np

from .validation import check_vector

# Consistency factor making Qn estimate the standard deviation at the normal
# model; no finite-sample correction is applied.
QN_CONSISTENCY = 2.21914
MAD_CONSISTENCY = 1.4826


def median(x) -> float:
    """Median with the lower-upper average convention for even lengths."""
    x = check_vector(x, min_len=1)
    return float(np.median(x))


def mad(x) -> float:
    """Scaled median absolute deviation: 1.4826 * med|x - med(x)|."""
    x = check_vector(x, min_len=1)
    return MAD_CONSISTENCY * float(np.median(np.abs(x - np.median(x))))


def qn(x) -> float:
    """Qn scale: 2.21914 times the k-th smallest pairwise absolute difference.

    With h = floor(n/2) + 1 and k = h(h-1)/2, this is a high-breakdown scale
    that needs no location estimate. Plain O(n^2) evaluation; the sample sizes
    used here (n up to a few thousand) make selection on the full difference
    set cheap.
    """
    x = check_vector(x, min_len=2, name="x")
    n = x.size
    i, j = np.triu_indices(n, k=1)
    diffs = np.abs(x[i] - x[j])
    h = n // 2 + 1
    k = h * (h - 1) // 2
    kth = np.partition(diffs, k - 1)[k - 1]
    return QN_CONSISTENCY * float(kth)


def sample_sd(x) -> float:
    """Classical standard deviation with the n-1 denominator."""
    x = check_vector(x, min_len=2)
    return float(np.std(x, ddof=1))


@dataclass(frozen=True)
class ScaleEstimator:
    """A named scale estimator with its normal-model consistency factor."""

    kind: str
    consistency_factor: float

    def __post_init__(self):
        if self.consistency_factor <= 0:
            raise ValueError("consistency_factor must be positive")

    def __call__(self, x) -> float:
        return _SCALE_FUNCTIONS[self.kind](x)


_SCALE_FUNCTIONS = {"qn": qn, "mad": mad, "sd": sample_sd}

QN = ScaleEstimator("qn", QN_CONSISTENCY)
MAD = ScaleEstimator("mad", MAD_CONSISTENCY)
SAMPLE_SD = ScaleEstimator("sd", 1.0)

SCALE_ESTIMATORS = {"qn": QN, "mad": MAD, "sd": SAMPLE_SD}


def get_scale_estimator(scale) -> ScaleEstimator:
    """Resolve a scale estimator from a name or pass an instance through."""
    if isinstance(scale, ScaleEstimator):
        return scale
    try:
        return SCALE_ESTIMATORS[scale]
    except KeyError:
        raise ValueError(
            f"unknown scale estimator {scale!r}; choose from {sorted(SCALE_ESTIMATORS)}"
        ) from None
