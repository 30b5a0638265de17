"""Welsch (correntropy) loss and Gaussian kernel machinery.

The Gaussian kernel is parametrized as

    k(x, x') = exp(-||x - x'||^2 / (2 h^2))

with bandwidth ``h``. Every bandwidth grid in the package uses this
convention.
"""
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DomainError, UsageError

__all__ = ["WelschLoss", "GaussianKernel", "GramMatrix", "welsch_loss",
           "welsch_weight", "gram", "as_points", "DEFAULT_JITTER"]

DEFAULT_JITTER = 1e-10


def _check_sigma(sigma):
    s = np.asarray(sigma, dtype=float)
    if not np.all(np.isfinite(s) & (s > 0)):
        raise DomainError(f"sigma must be a positive finite number, got {sigma!r}")
    return s if s.ndim else float(s)


def _check_residuals(t):
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise DomainError("residuals must be finite")
    return t


def welsch_loss(t, sigma):
    """Welsch loss ``sigma^2 * (1 - exp(-t^2 / sigma^2))``.

    Works elementwise, broadcasting ``t`` against ``sigma``. Values lie in ``[0, sigma^2]``; the upper
    end is reached only when the exponential underflows.
    """
    sigma = _check_sigma(sigma)
    t = _check_residuals(t)
    return -sigma ** 2 * np.expm1(-(t / sigma) ** 2)


def welsch_weight(t, sigma):
    """Half-quadratic weight ``exp(-t^2 / sigma^2)``, the derivative of the
    Welsch loss with respect to ``t^2``."""
    sigma = _check_sigma(sigma)
    t = _check_residuals(t)
    return np.exp(-(t / sigma) ** 2)


@dataclass(frozen=True)
class WelschLoss:
    sigma: float

    def __post_init__(self):
        _check_sigma(self.sigma)

    def __call__(self, t):
        return welsch_loss(t, self.sigma)

    def weight(self, t):
        return welsch_weight(t, self.sigma)


def as_points(inputs, allow_empty=False):
    """Coerce ``inputs`` to a 2-d float array of shape (n, d).

    A 1-d array is read as n scalar inputs.
    """
    pts = np.asarray(inputs, dtype=float)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif pts.ndim == 1:
        pts = pts[:, None]
    elif pts.ndim != 2:
        raise UsageError(f"inputs must be at most 2-d, got shape {pts.shape}")
    if pts.shape[0] == 0 and not allow_empty:
        raise UsageError("input list is empty")
    if not np.all(np.isfinite(pts)):
        raise DomainError("input coordinates must be finite")
    return pts


@dataclass(frozen=True)
class GaussianKernel:
    bandwidth: float

    def __post_init__(self):
        if not (np.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise DomainError(f"bandwidth must be positive, got {self.bandwidth!r}")

    def __call__(self, a, b=None):
        """Cross-kernel matrix between point sets ``a`` (m, d) and ``b`` (p, d)."""
        a = as_points(a, allow_empty=True)
        b = a if b is None else as_points(b, allow_empty=True)
        if a.shape[1] != b.shape[1]:
            raise UsageError(
                f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
        sq = cdist(a, b, "sqeuclidean")
        return np.exp(-sq / (2.0 * self.bandwidth ** 2))


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Kernel matrix of a training set with ``jitter`` added on the diagonal."""
    entries: np.ndarray
    jitter: float

    @property
    def n(self):
        return self.entries.shape[0]


def gram(inputs, kernel, jitter=DEFAULT_JITTER):
    """Jittered Gram matrix ``K_ij = k(x_i, x_j) + jitter * [i == j]``."""
    if jitter < 0 or not np.isfinite(jitter):
        raise DomainError(f"jitter must be non-negative, got {jitter!r}")
    pts = as_points(inputs)
    K = kernel(pts)
    # cdist gives exact zeros on the diagonal, so K is exactly symmetric
    # with a unit diagonal before the jitter goes in.
    K[np.diag_indices_from(K)] = 1.0 + jitter
    K.setflags(write=False)
    return GramMatrix(K, float(jitter))
