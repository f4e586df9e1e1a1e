"""Random-matrix eigenvalue tools: Mestre's consistent eigenvalue estimator and
the Marchenko-Pastur law."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidInput, UnsupportedRegime


@dataclass(frozen=True)
class SubspacePartition:
    """Contiguous clusters of ascending eigenvalue indices (0-based)."""

    clusters: tuple

    def __post_init__(self):
        clusters = tuple(tuple(int(i) for i in c) for c in self.clusters)
        flat = [i for c in clusters for i in c]
        if any(len(c) == 0 for c in clusters):
            raise InvalidInput("empty cluster")
        if flat != list(range(len(flat))):
            raise InvalidInput("clusters must be contiguous, ordered and cover 0..n-1")
        object.__setattr__(self, "clusters", clusters)

    @property
    def n(self):
        return sum(len(c) for c in self.clusters)

    @property
    def multiplicities(self):
        return tuple(len(c) for c in self.clusters)

    @classmethod
    def singletons(cls, n):
        return cls(tuple((i,) for i in range(n)))

    @classmethod
    def noise_cluster(cls, n, noise_dim):
        """The ``noise_dim`` smallest eigenvalues pooled, the rest as singletons."""
        if not 0 <= noise_dim <= n:
            raise InvalidInput(f"noise_dim must lie in [0, {n}]")
        if noise_dim <= 1:
            return cls.singletons(n)
        head = (tuple(range(noise_dim)),)
        return cls(head + tuple((i,) for i in range(noise_dim, n)))


@dataclass
class RmtCorrection:
    sample_values: np.ndarray  # ascending
    mu: np.ndarray  # ascending, interlacing sample_values
    corrected: np.ndarray  # one value per cluster
    partition: SubspacePartition

    def expanded(self):
        """Corrected values repeated over their clusters, ascending index order."""
        return np.repeat(self.corrected, self.partition.multiplicities)

    def target_spectrum(self):
        """Per-eigenvalue corrected values sorted descending."""
        return np.sort(self.expanded())[::-1]

    @property
    def smallest(self):
        return float(np.min(self.corrected))


def mestre_roots(lambda_hat, t):
    """Solutions ``mu`` of ``sum_k lambda_k / (lambda_k - mu) = t``, ascending.

    They are the eigenvalues of the rank-one downdate
    ``diag(lambda) - sqrt(lambda) sqrt(lambda)^T / t``, which handles repeated
    sample eigenvalues without any per-interval search.
    """
    lam = np.asarray(lambda_hat, dtype=np.float64)
    root = np.sqrt(lam)
    mu = scipy.linalg.eigvalsh(np.diag(lam) - np.outer(root, root) / t)
    mu = np.sort(mu)
    # enforce interlacing mu_k in (lambda_{k-1}, lambda_k] against rounding
    upper = lam
    lower = np.concatenate(([-np.inf], lam[:-1]))
    mu = np.clip(mu, lower, upper)
    return _polish_roots(lam, t, mu)


def _polish_roots(lam, t, mu, steps=6):
    """Newton refinement of each root in terms of its gap ``lambda_k - mu_k``.

    The eigenvalue route is accurate to ``eps * max(lambda)`` in absolute
    terms; working on the gap gives small roots full relative accuracy too.
    Roots at a repeated sample value are exact and left alone.
    """
    mu = mu.copy()
    for k in range(lam.shape[0]):
        if lam[k] <= 0 or (k > 0 and lam[k] == lam[k - 1]):
            continue
        if k + 1 < lam.shape[0] and lam[k + 1] == lam[k]:
            continue
        room = lam[k] - lam[k - 1] if k > 0 else np.inf
        gap = lam[k] - mu[k]
        if not 0 < gap < room:
            continue
        others = np.delete(lam, k)
        diff = others - lam[k]
        for _ in range(steps):
            den = diff + gap
            f = lam[k] / gap + np.sum(others / den) - t
            df = -lam[k] / gap**2 - np.sum(others / den**2)
            new = gap - f / df
            if not 0 < new < room:
                break
            if new == gap:
                break
            gap = new
        mu[k] = lam[k] - gap
    return mu


def mestre_correct(lambda_hat, t, partition=None):
    lam = np.asarray(lambda_hat, dtype=np.float64)
    n = lam.shape[0]
    if partition is None:
        partition = SubspacePartition.singletons(n)
    if partition.n != n:
        raise InvalidInput("partition does not match the number of eigenvalues")
    if t <= n:
        raise UnsupportedRegime(f"need t > n, got t={t}, n={n}")
    if np.any(lam < 0):
        raise InvalidInput("sample eigenvalues must be non-negative")
    if np.any(np.diff(lam) < 0):
        raise InvalidInput("sample eigenvalues must be sorted ascending")
    mu = mestre_roots(lam, t)
    gaps = lam - mu
    corrected = np.array(
        [t * gaps[list(c)].sum() / len(c) for c in partition.clusters]
    )
    return RmtCorrection(lam, mu, corrected, partition)


@dataclass(frozen=True)
class MpLaw:
    beta: float

    @property
    def support(self):
        return mp_support(self.beta)

    def density(self, x):
        return mp_density(x, self.beta)


def mp_support(beta):
    if not 0.0 < beta <= 1.0:
        raise InvalidInput(f"beta must lie in (0, 1], got {beta}")
    r = np.sqrt(beta)
    return (1.0 - r) ** 2, (1.0 + r) ** 2


def mp_density(x, beta):
    """Marchenko-Pastur density for aspect ratio ``beta = n / t``, unit variance."""
    lo, hi = mp_support(beta)
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0):
        raise InvalidInput("density is defined for x > 0 only")
    inner = np.clip(x - lo, 0.0, None) * np.clip(hi - x, 0.0, None)
    out = np.sqrt(inner) / (2.0 * np.pi * beta * x)
    return float(out) if out.ndim == 0 else out
