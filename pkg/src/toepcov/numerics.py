"""Dense complex-matrix primitives used by every other module."""

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import (
    InvalidInput,
    NotPositiveDefinite,
    NotPositiveSemidefinite,
    NumericalFailure,
)

HERMITIAN_RTOL = 1e-12


class EigenDecomposition(NamedTuple):
    """Eigenvalues sorted descending, eigenvectors as matching columns."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self):
        return (self.vectors * self.values) @ self.vectors.conj().T


def as_hermitian(m, *, check=True):
    """Return ``(m + m^H) / 2`` as a complex array.

    With *check*, reject non-square or non-finite input and input whose
    anti-Hermitian part exceeds ``1e-12`` of its scale.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise InvalidInput(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidInput("matrix has non-finite entries")
    if check:
        scale = np.max(np.abs(m))
        skew = np.max(np.abs(m - m.conj().T))
        if skew > HERMITIAN_RTOL * scale + 1e-300:
            raise InvalidInput(f"matrix is not Hermitian (max |M - M^H| = {skew:.3e})")
    return 0.5 * (m + m.conj().T)


def hermitian_eig(m):
    m = as_hermitian(m)
    try:
        values, vectors = scipy.linalg.eigh(m, driver="evd")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailure(f"eigendecomposition failed: {exc}") from exc
    return EigenDecomposition(values[::-1].copy(), vectors[:, ::-1].copy())


def eigvals_desc(m):
    """Eigenvalues only, descending. *m* must already be Hermitian."""
    return scipy.linalg.eigvalsh(m, check_finite=False)[::-1]


def hermitian_sqrt(m):
    """Principal square root of a Hermitian positive semidefinite matrix.

    Eigenvalues down to ``-1e-12 * lambda_max`` are treated as rounding noise
    and clamped to zero; anything more negative is rejected.
    """
    values, vectors = hermitian_eig(m)
    top = max(values[0], 0.0)
    if values[-1] < -1e-12 * top:
        raise NotPositiveSemidefinite(
            f"smallest eigenvalue {values[-1]:.3e} is below -1e-12 * {top:.3e}"
        )
    root = np.sqrt(np.clip(values, 0.0, None))
    s = (vectors * root) @ vectors.conj().T
    return 0.5 * (s + s.conj().T)


def poly_roots(coeffs):
    """Roots of ``sum_k coeffs[k] z**k`` via companion-matrix eigenvalues.

    Trailing (highest-power) coefficients with magnitude at most
    ``1e-14 * max|coeff|`` are dropped first. LAPACK balances the companion
    matrix before the QR iteration.
    """
    c = np.atleast_1d(np.asarray(coeffs, dtype=np.complex128))
    if c.ndim != 1 or c.shape[0] < 2:
        raise InvalidInput("need at least two coefficients")
    if not np.all(np.isfinite(c)):
        raise InvalidInput("coefficients must be finite")
    scale = np.max(np.abs(c))
    if scale == 0.0:
        raise InvalidInput("all coefficients are zero")
    keep = np.nonzero(np.abs(c) > 1e-14 * scale)[0]
    c = c[: keep[-1] + 1]
    deg = c.shape[0] - 1
    if deg == 0:
        return np.empty(0, dtype=np.complex128)
    comp = np.zeros((deg, deg), dtype=np.complex128)
    comp[0, :] = -c[-2::-1] / c[-1]
    comp[np.arange(1, deg), np.arange(deg - 1)] = 1.0
    try:
        roots = scipy.linalg.eigvals(comp, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"companion eigenvalues failed: {exc}") from exc
    return roots


def poly_eval(coeffs, z):
    """Evaluate an ascending-power polynomial at the points *z*."""
    c = np.asarray(coeffs, dtype=np.complex128)
    return np.polynomial.polynomial.polyval(np.asarray(z, dtype=np.complex128), c)


def solve_hermitian(m, b):
    """Solve ``m x = b`` for Hermitian positive definite *m* by Cholesky."""
    m = as_hermitian(m)
    b = np.asarray(b, dtype=np.complex128)
    try:
        factor = scipy.linalg.cho_factor(m, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"Cholesky factorization failed: {exc}") from exc
    return scipy.linalg.cho_solve(factor, b, check_finite=False)


def cholesky_lower(m):
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"Cholesky factorization failed: {exc}") from exc


def spectral_norm(m):
    """Largest singular value; for Hermitian input, the largest |eigenvalue|."""
    m = np.asarray(m)
    if np.array_equal(m, m.conj().T):
        return float(np.max(np.abs(scipy.linalg.eigvalsh(m, check_finite=False))))
    return float(np.linalg.norm(m, 2))
