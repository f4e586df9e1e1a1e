"""Independent reference computations used by the tests.

Each oracle reaches its answer by a different route from the library code:
bisection instead of an eigenvalue downdate, finite differences instead of
analytic sensitivities, dense solves instead of structured formulas.
"""

import math

import numpy as np
import scipy.linalg


def mestre_roots_bisection(lam, t):
    """Roots of ``sum lam_k / (lam_k - mu) = t`` for distinct ascending ``lam > 0``.

    ``f(mu) = sum lam/(lam - mu) - t`` rises from ``-t`` (at -inf, it tends to
    ``-t``) to ``+inf`` on the first interval ``(-inf, lam_0)`` and from ``-inf``
    to ``+inf`` on each ``(lam_{k-1}, lam_k)``.
    """
    lam = np.asarray(lam, dtype=float)

    def f(mu):
        return float(np.sum(lam / (lam - mu))) - t

    roots = []
    for k in range(lam.size):  # bisect to adjacent floats
        hi = lam[k]
        if k == 0:
            lo = -1.0
            while f(lo) > 0:
                lo *= 2
        else:
            lo = lam[k - 1]
        a = lo if k == 0 else np.nextafter(lo, hi)
        b = np.nextafter(hi, lo)
        for _ in range(400):
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            if f(mid) > 0:
                b = mid
            else:
                a = mid
        roots.append(0.5 * (a + b))
    return np.array(roots)


def toeplitz_hermitian(row):
    """Dense Hermitian Toeplitz from its first row via scipy's constructor."""
    row = np.asarray(row, dtype=complex)
    return scipy.linalg.toeplitz(np.conj(row), row)


def naive_diagonal_average(r):
    n = r.shape[0]
    row = np.array([np.mean([r[j, j + k] for j in range(n - k)]) for k in range(n)])
    row[0] = row[0].real
    return row


def random_pd_toeplitz(rng, n, spread=0.9):
    """Random p.d. Hermitian Toeplitz from a positive spectral density."""
    m = 4 * n
    omega = 2 * np.pi * np.arange(m) / m
    dens = 0.1 + rng.random(m) * spread
    dens += 3 * np.exp(-((omega - rng.random() * 2 * np.pi) ** 2) * 4)
    k = np.arange(n)
    # t_k = (1/m) sum S(w) e^{-i k w}; matches T[j, j+k] of a density-weighted Fourier basis
    row = (dens[None, :] * np.exp(-1j * k[:, None] * omega[None, :])).mean(axis=1)
    row[0] = row[0].real
    return toeplitz_hermitian(row)


def random_hermitian_pd(rng, n, cond=1e3):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    vals = np.geomspace(1.0, 1.0 / cond, n)
    return (q * vals) @ q.conj().T


def sorted_eigs(m):
    return np.sort(np.linalg.eigvalsh(0.5 * (m + m.conj().T)))[::-1]


def eig_fd_phase(row, k, h=1e-6):
    """Central difference of descending eigenvalues w.r.t. the phase of lag k (1-based)."""
    mod, ph = np.abs(row[k]), np.angle(row[k])
    plus, minus = row.copy(), row.copy()
    plus[k] = mod * np.exp(1j * (ph + h))
    minus[k] = mod * np.exp(1j * (ph - h))
    return (sorted_eigs(toeplitz_hermitian(plus)) - sorted_eigs(toeplitz_hermitian(minus))) / (2 * h)


def eig_fd_modulus(row, k, h=1e-6):
    mod, ph = np.abs(row[k]), np.angle(row[k])
    plus, minus = row.copy(), row.copy()
    plus[k] = (mod + h) * np.exp(1j * ph)
    minus[k] = (mod - h) * np.exp(1j * ph)
    return (sorted_eigs(toeplitz_hermitian(plus)) - sorted_eigs(toeplitz_hermitian(minus))) / (2 * h)


def normal_bin_probabilities(edges):
    cdf = np.array([0.5 * (1 + math.erf(e / math.sqrt(2))) for e in edges])
    return np.diff(cdf)


def sphericity_direct(candidate, sample):
    """Log sphericity via det and trace of ``C^-1 R`` (no whitening)."""
    n = candidate.shape[0]
    m = np.linalg.solve(candidate, sample)
    sign, logdet = np.linalg.slogdet(m)
    return float(logdet.real - n * np.log(np.trace(m).real / n))


def poly_from_roots_ascending(roots, lead=1.0):
    """Ascending coefficients of ``lead * prod (z - r)``."""
    c = np.array([lead], dtype=complex)
    for r in roots:
        c = np.convolve(c, np.array([-r, 1.0]))
    return c
