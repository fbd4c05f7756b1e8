"""Shared test utilities: seeded samplers and random matrix generators."""

import numpy as np


def bivariate_normal(rho, n, seed):
    """(x, y) with population correlation rho."""
    rng = np.random.default_rng(seed)
    z1 = rng.standard_normal(n)
    z2 = rng.standard_normal(n)
    return z1, rho * z1 + np.sqrt(1.0 - rho * rho) * z2


def random_symmetric(p, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((p, p)) * scale
    return 0.5 * (A + A.T)


def random_psd(p, seed, rank=None):
    """Random PSD matrix with O(1) entries; rank defaults to full."""
    rng = np.random.default_rng(seed)
    k = rank if rank is not None else p
    V = rng.standard_normal((k, p))
    return (V.T @ V) / k


def random_orthogonal(p, seed):
    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(rng.standard_normal((p, p)))
    return Q * np.sign(np.diag(R))


def random_pd(p, seed, cond_boost=0.5):
    """Random strictly positive definite matrix."""
    return random_psd(p, seed) + cond_boost * np.eye(p)
