"""Positive definite Toeplitz matrices with a prescribed Maximum Entropy spectrum.

A p.d. Hermitian sample matrix ``R`` defines the prediction polynomial
``W(z) = sum_k w_k z^k`` with ``w = R^-1 e1 / (R^-1)_00`` and the ME spectrum
``S(omega) = 1 / ((R^-1)_00 |W(e^{i omega})|^2)``. A vector is the first column
of the inverse of a p.d. Hermitian Toeplitz matrix exactly when its polynomial
has no zeros in the open unit disk, so the zeros of ``W`` inside the disk are
reflected to ``1 / conj(z)``; this leaves ``|W|`` on the unit circle unchanged.
The Gohberg-Semencul formula then gives the inverse of the Toeplitz matrix
directly from the reflected vector.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import kernels
from .errors import (
    BoundaryRootWarning,
    DegenerateSpectrum,
    InvalidInput,
    NotPositiveDefinite,
    NumericalFailure,
)
from .numerics import as_hermitian, hermitian_eig, poly_eval, poly_roots, solve_hermitian

BOUNDARY_EPS = 1e-8
TOEPLITZ_RTOL = 1e-7


@dataclass
class PredictionPolynomial:
    coeffs: np.ndarray  # ascending powers, coeffs[0] = value at z = 0
    roots_inside: np.ndarray
    roots_outside: np.ndarray
    eps_boundary: float = BOUNDARY_EPS
    error_power: float = 1.0  # 1 / (R^-1)_00 of the source matrix

    @property
    def n(self):
        return self.coeffs.shape[0]

    @property
    def inside_count(self):
        return int(self.roots_inside.shape[0])

    @property
    def boundary_roots(self):
        roots = np.concatenate((self.roots_inside, self.roots_outside))
        mag = np.abs(roots)
        return roots[np.abs(mag - 1.0) <= self.eps_boundary]

    @property
    def has_boundary_root(self):
        return self.boundary_roots.shape[0] > 0

    def __call__(self, z):
        return poly_eval(self.coeffs, z)


def unit_circle(n_points=512):
    return np.exp(2j * np.pi * np.arange(n_points) / n_points)


def classify_roots(roots, eps=BOUNDARY_EPS):
    roots = np.asarray(roots, dtype=np.complex128)
    inside = np.abs(roots) < 1.0 - eps
    return roots[inside], roots[~inside]


def _polynomial(coeffs, error_power=1.0, eps=BOUNDARY_EPS):
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    roots = poly_roots(coeffs) if coeffs.shape[0] > 1 else np.empty(0, np.complex128)
    inside, outside = classify_roots(roots, eps)
    return PredictionPolynomial(coeffs, inside, outside, eps, error_power)


def prediction_vector(sample):
    """Normalized first column of ``sample^-1`` as a classified polynomial."""
    r = as_hermitian(sample)
    e1 = np.zeros(r.shape[0], dtype=np.complex128)
    e1[0] = 1.0
    a = solve_hermitian(r, e1)
    a00 = a[0].real
    if not a00 > 0:
        raise NotPositiveDefinite("(R^-1)_00 is not positive")
    w = a / a00
    w[0] = 1.0
    poly = _polynomial(w, 1.0 / a00)
    if poly.has_boundary_root:
        warnings.warn(
            f"{poly.boundary_roots.shape[0]} prediction root(s) on the unit circle",
            BoundaryRootWarning,
        )
    return poly


def me_spectrum(matrix, n_points=512):
    """ME power spectrum of a p.d. Hermitian matrix on an ``n_points`` circle grid."""
    poly = prediction_vector(matrix)
    return poly.error_power / np.abs(poly(unit_circle(n_points))) ** 2


def _polish(coeffs, z, steps=3):
    deriv = np.polynomial.polynomial.polyder(coeffs)
    for _ in range(steps):
        d = poly_eval(deriv, z)
        if d == 0:
            break
        z_new = z - poly_eval(coeffs, z) / d
        if not np.isfinite(z_new):
            break
        z = z_new
    return z


def _deflate(coeffs, root):
    """Divide by ``(z - root)``, working down from the leading coefficient
    (stable for ``|root| < 1``)."""
    deg = coeffs.shape[0] - 1
    q = np.empty(deg, dtype=np.complex128)
    q[deg - 1] = coeffs[deg]
    for k in range(deg - 1, 0, -1):
        q[k - 1] = coeffs[k] + root * q[k]
    return q


def _trim(coeffs):
    scale = np.max(np.abs(coeffs))
    keep = np.nonzero(np.abs(coeffs) > 1e-14 * scale)[0]
    return coeffs[: keep[-1] + 1]


def minimum_phase_flip(w):
    """Reflect the zeros of *w* inside the unit disk to ``1 / conj(z)``.

    The result has the same modulus as *w* on the unit circle, no zeros inside
    the disk, and a real positive constant term equal to ``prod 1/|z_inside|``
    when ``w(0) = 1``.
    """
    if w.has_boundary_root:
        raise DegenerateSpectrum("prediction polynomial has a root on the unit circle")
    if w.inside_count == 0:
        return w
    n = w.n
    work = _trim(w.coeffs.copy())
    flipped = []
    for z in w.roots_inside:
        z = _polish(work, z)
        q = _deflate(work, z)
        # multiply by (1 - conj(z) x)
        work = np.concatenate((q, [0.0])) - np.conj(z) * np.concatenate(([0.0], q))
        flipped.append(1.0 / np.conj(z))
    p0 = work[0]
    if p0 == 0:
        raise NumericalFailure("flipped polynomial vanishes at the origin")
    work = work * (np.abs(p0) / p0)
    work[0] = abs(p0)
    coeffs = np.zeros(n, dtype=np.complex128)
    coeffs[: work.shape[0]] = work
    outside = np.concatenate((w.roots_outside, np.array(flipped)))
    return PredictionPolynomial(
        coeffs, np.empty(0, np.complex128), outside, w.eps_boundary, w.error_power
    )


def gohberg_semencul_inverse(p):
    """Inverse of the Hermitian Toeplitz matrix whose ``T^-1 e1`` is *p*."""
    coeffs = p.coeffs if isinstance(p, PredictionPolynomial) else np.asarray(p)
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    if abs(coeffs[0].imag) > 1e-14 * abs(coeffs[0]) or not coeffs[0].real > 0:
        raise InvalidInput("p[0] must be real and positive")
    coeffs = coeffs.copy()
    coeffs[0] = coeffs[0].real
    inv = kernels.gohberg_semencul(coeffs)
    try:
        np.linalg.cholesky(inv)
    except np.linalg.LinAlgError:
        vals = np.linalg.eigvalsh(inv)
        raise NumericalFailure(
            "Gohberg-Semencul result is not positive definite "
            f"(eigenvalues in [{vals[0]:.3e}, {vals[-1]:.3e}])"
        ) from None
    return inv


@dataclass
class MeReconstruction:
    matrix: np.ndarray
    prediction: PredictionPolynomial
    flipped: PredictionPolynomial
    toeplitz_deviation: float


def me_reconstruction(sample):
    """Full pipeline with intermediate results; see :func:`reconstruct_toeplitz`."""
    r = as_hermitian(sample)
    w = prediction_vector(r)
    p = minimum_phase_flip(w)
    # scale so T^-1 e1 reproduces the source's prediction-error power:
    # S_out = x0 / |x|^2 must equal error_power / |W|^2
    p1 = p.coeffs[0].real
    x = p.coeffs * (p1 / w.error_power)
    inv = gohberg_semencul_inverse(x)
    try:
        factor = scipy.linalg.cho_factor(inv, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"cannot invert reconstructed inverse: {exc}") from exc
    t = scipy.linalg.cho_solve(factor, np.eye(inv.shape[0], dtype=np.complex128))
    t = 0.5 * (t + t.conj().T)
    row = kernels.diagonal_means(t)
    toeplitz = kernels.toeplitz_from_row(row)
    deviation = float(np.max(np.abs(t - toeplitz)) / np.max(np.abs(t)))
    if deviation > TOEPLITZ_RTOL:
        raise NumericalFailure(
            f"reconstruction deviates from Toeplitz structure by {deviation:.3e}"
        )
    return MeReconstruction(toeplitz, w, p, deviation)


def reconstruct_toeplitz(sample):
    """P.d. Hermitian Toeplitz matrix with the same ME spectrum as *sample*.

    P.d. Toeplitz inputs are returned unchanged (up to rounding).
    """
    return me_reconstruction(sample).matrix


def replace_eigenvalues(sample, new_spectrum):
    """Keep the eigenvectors of *sample*, swap in *new_spectrum* (descending)."""
    eig = hermitian_eig(sample)
    new = np.asarray(new_spectrum, dtype=np.float64)
    if new.shape != eig.values.shape:
        raise InvalidInput("spectrum length does not match the matrix dimension")
    if np.any(new <= 0):
        raise InvalidInput("replacement eigenvalues must be positive")
    new = np.sort(new)[::-1]
    out = (eig.vectors * new) @ eig.vectors.conj().T
    return 0.5 * (out + out.conj().T)
