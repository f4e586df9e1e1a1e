"""Redundancy averaging, diagonal-loading rectification, sample-size advisor."""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateInput, InvalidInput
from .numerics import as_hermitian, eigvals_desc


@dataclass
class ToeplitzLags:
    """Hermitian Toeplitz matrix stored by its first row.

    ``t0`` is the (real) diagonal and ``lags[k-1] = T[j, j+k]``; the lower
    triangle holds the conjugates.
    """

    t0: float
    lags: np.ndarray

    def __post_init__(self):
        self.t0 = float(np.real(self.t0))
        self.lags = np.asarray(self.lags, dtype=np.complex128).reshape(-1)

    @classmethod
    def from_row(cls, row):
        row = np.asarray(row, dtype=np.complex128)
        return cls(row[0].real, row[1:].copy())

    @classmethod
    def from_polar(cls, t0, moduli, phases):
        moduli = np.asarray(moduli, dtype=np.float64)
        if np.any(moduli < 0):
            raise InvalidInput("lag moduli must be non-negative")
        return cls(t0, moduli * np.exp(1j * np.asarray(phases, dtype=np.float64)))

    @property
    def n(self):
        return self.lags.shape[0] + 1

    @property
    def row(self):
        return np.concatenate(([complex(self.t0)], self.lags))

    @property
    def moduli(self):
        return np.abs(self.lags)

    @property
    def phases(self):
        """Lag phases in (-pi, pi]."""
        return np.angle(self.lags)

    def matrix(self):
        return kernels.toeplitz_from_row(self.row)

    def trace(self):
        return self.n * self.t0


@dataclass
class RectifiedEstimate:
    lags: ToeplitzLags
    loading: float
    scale: float

    @property
    def matrix(self):
        return self.lags.matrix()


def redundancy_average(r):
    """Replace every diagonal of *r* by its mean (upper-triangle convention)."""
    r = as_hermitian(r)
    return ToeplitzLags.from_row(kernels.diagonal_means(r))


def rectify_loading(ra, lambda_star):
    """Diagonally load *ra* until its smallest eigenvalue is ``lambda_star``, then
    rescale so the trace is unchanged.

    The load is ``lambda_star + max(0, -lambda_min)``, so inputs that are
    already positive definite are loaded by ``lambda_star`` only.
    """
    if not lambda_star > 0:
        raise InvalidInput("lambda_star must be positive")
    trace = ra.trace()
    if trace <= 0:
        raise DegenerateInput("redundancy-averaged matrix has non-positive trace")
    lam_min = eigvals_desc(ra.matrix())[-1]
    loading = lambda_star + max(0.0, -lam_min)
    scale = trace / (trace + ra.n * loading)
    lags = ToeplitzLags(scale * (ra.t0 + loading), scale * ra.lags)
    return RectifiedEstimate(lags, loading, scale)


def min_sample_size(n, lambda_min):
    """Smallest ``T`` with ``n / (T lambda_min^2) <= 1``."""
    if not lambda_min > 0:
        raise InvalidInput("lambda_min must be positive")
    if n < 1:
        raise InvalidInput("n must be positive")
    q = n / (lambda_min * lambda_min)
    # absorb rounding in lambda_min^2 so that exact ratios are not bumped up
    return max(1, math.ceil(q * (1.0 - 1e-12)))
