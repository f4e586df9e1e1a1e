"""Inner-loop kernels with a numba path and a pure-numpy path.

Every kernel exists twice: ``<name>_numba`` (``@njit``) and ``<name>_numpy``.
The bare ``<name>`` is bound to the numba version unless numba is missing or
the environment variable ``TOEPCOV_DISABLE_NUMBA`` is set to a truthy value
before import. Both paths must agree to rounding error; the test-suite checks
this and ``benchmarks/bench_kernels.py`` times them against each other.
"""

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn


def _env_disabled():
    flag = os.environ.get("TOEPCOV_DISABLE_NUMBA", "").strip().lower()
    return flag not in ("", "0", "false", "no")


USE_NUMBA = HAVE_NUMBA and not _env_disabled()
BACKEND = "numba" if USE_NUMBA else "numpy"


# --- Hermitian Toeplitz matrix from its first row ---------------------------

@njit(cache=True)
def toeplitz_from_row_numba(row):
    n = row.shape[0]
    out = np.empty((n, n), dtype=np.complex128)
    for i in range(n):
        out[i, i] = row[0].real
        for j in range(i + 1, n):
            v = row[j - i]
            out[i, j] = v
            out[j, i] = v.conjugate()
    return out


def toeplitz_from_row_numpy(row):
    row = np.asarray(row, dtype=np.complex128)
    n = row.shape[0]
    idx = np.arange(n)
    lag = idx[None, :] - idx[:, None]
    out = np.where(lag >= 0, row[np.abs(lag)], np.conj(row[np.abs(lag)]))
    out[idx, idx] = row[0].real
    return out


# --- diagonal (redundancy) averaging ----------------------------------------
# Mean of each superdiagonal, taken as first element + mean deviation so that
# a diagonal of identical values returns that value bit for bit.

@njit(cache=True)
def diagonal_means_numba(r):
    n = r.shape[0]
    out = np.empty(n, dtype=np.complex128)
    for k in range(n):
        first = r[0, k]
        acc = 0.0 + 0.0j
        for j in range(1, n - k):
            acc += r[j, j + k] - first
        out[k] = first + acc / (n - k)
    return out


def diagonal_means_numpy(r):
    r = np.asarray(r, dtype=np.complex128)
    n = r.shape[0]
    out = np.empty(n, dtype=np.complex128)
    for k in range(n):
        d = np.diagonal(r, offset=k)
        out[k] = d[0] + np.sum(d[1:] - d[0]) / (n - k)
    return out


# --- eigenvector lag correlations -------------------------------------------
# C[m, k-1] = sum_j conj(U[j, m]) * U[j + k, m],  k = 1..n-1

@njit(cache=True)
def lag_correlations_numba(u):
    n, ncol = u.shape
    out = np.zeros((ncol, n - 1), dtype=np.complex128)
    for m in range(ncol):
        for k in range(1, n):
            acc = 0.0 + 0.0j
            for j in range(n - k):
                acc += u[j, m].conjugate() * u[j + k, m]
            out[m, k - 1] = acc
    return out


def lag_correlations_numpy(u):
    u = np.asarray(u, dtype=np.complex128)
    n, ncol = u.shape
    out = np.zeros((ncol, n - 1), dtype=np.complex128)
    cu = np.conj(u)
    for k in range(1, n):
        out[:, k - 1] = np.sum(cu[: n - k] * u[k:], axis=0)
    return out


# --- Gohberg-Semencul inverse -----------------------------------------------
# (1/p0) (L L^H - M M^H); L lower-triangular Toeplitz with first column p,
# M lower-triangular Toeplitz with first column (0, conj(p[n-1]), ..., conj(p[1])).

@njit(cache=True)
def gohberg_semencul_numba(p):
    n = p.shape[0]
    m = np.zeros(n, dtype=np.complex128)
    for i in range(1, n):
        m[i] = p[n - i].conjugate()
    out = np.empty((n, n), dtype=np.complex128)
    p0 = p[0].real
    for i in range(n):
        for j in range(i, n):
            acc = 0.0 + 0.0j
            # (L L^H)[i, j] = sum_k L[i, k] conj(L[j, k]), k <= min(i, j) = i
            for k in range(i + 1):
                acc += p[i - k] * p[j - k].conjugate() - m[i - k] * m[j - k].conjugate()
            v = acc / p0
            out[i, j] = v
            out[j, i] = v.conjugate()
        out[i, i] = out[i, i].real
    return out


def _lower_toeplitz(col):
    n = col.shape[0]
    idx = np.arange(n)
    lag = idx[:, None] - idx[None, :]
    return np.where(lag >= 0, col[np.clip(lag, 0, None)], 0)


def gohberg_semencul_numpy(p):
    p = np.asarray(p, dtype=np.complex128)
    n = p.shape[0]
    m = np.zeros(n, dtype=np.complex128)
    m[1:] = np.conj(p[:0:-1])
    low = _lower_toeplitz(p)
    shift = _lower_toeplitz(m)
    out = (low @ low.conj().T - shift @ shift.conj().T) / p[0].real
    out = 0.5 * (out + out.conj().T)
    return out


# --- Box-Muller circular complex normals ------------------------------------
# Flat float arrays in, flat complex array out. u1 in [0, 1) is mapped to
# (0, 1] so the log stays finite. Real and imaginary parts are N(0, 1/2).

@njit(cache=True)
def box_muller_numba(u1, u2):
    n = u1.shape[0]
    out = np.empty(n, dtype=np.complex128)
    two_pi = 2.0 * np.pi
    for i in range(n):
        rad = np.sqrt(-np.log(1.0 - u1[i]))
        ang = two_pi * u2[i]
        out[i] = complex(rad * np.cos(ang), rad * np.sin(ang))
    return out


def box_muller_numpy(u1, u2):
    rad = np.sqrt(-np.log(1.0 - u1))
    ang = 2.0 * np.pi * u2
    return rad * np.cos(ang) + 1j * (rad * np.sin(ang))


_NUMBA = {
    "toeplitz_from_row": toeplitz_from_row_numba,
    "diagonal_means": diagonal_means_numba,
    "lag_correlations": lag_correlations_numba,
    "gohberg_semencul": gohberg_semencul_numba,
    "box_muller": box_muller_numba,
}
_NUMPY = {
    "toeplitz_from_row": toeplitz_from_row_numpy,
    "diagonal_means": diagonal_means_numpy,
    "lag_correlations": lag_correlations_numpy,
    "gohberg_semencul": gohberg_semencul_numpy,
    "box_muller": box_muller_numpy,
}


def implementations(name):
    """Return ``(numba_impl, numpy_impl)`` for the kernel called *name*."""
    return _NUMBA[name], _NUMPY[name]


_active = _NUMBA if USE_NUMBA else _NUMPY
toeplitz_from_row = _active["toeplitz_from_row"]
diagonal_means = _active["diagonal_means"]
lag_correlations = _active["lag_correlations"]
gohberg_semencul = _active["gohberg_semencul"]
box_muller = _active["box_muller"]
