"""Circular complex Gaussian snapshots and the sample covariance matrix."""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidInput
from .numerics import as_hermitian, hermitian_sqrt


def make_rng(seed):
    """Philox generator for ``seed`` = int or ``(base, *stream_key)``.

    Streams with different keys are statistically independent and do not
    depend on the order in which they are created, so trial ``i`` of a Monte
    Carlo batch always sees the same numbers.
    """
    if isinstance(seed, (tuple, list)):
        base, key = int(seed[0]), tuple(int(k) for k in seed[1:])
    else:
        base, key = int(seed), ()
    ss = np.random.SeedSequence(base, spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def complex_normals(rng, shape):
    """CN(0, 1) draws: real and imaginary parts independent N(0, 1/2)."""
    size = int(np.prod(shape))
    u1 = rng.random(size)
    u2 = rng.random(size)
    return kernels.box_muller(u1, u2).reshape(shape)


@dataclass
class SnapshotSet:
    data: np.ndarray  # n x t, one snapshot per column
    seed: object = None

    @property
    def n(self):
        return self.data.shape[0]

    @property
    def t(self):
        return self.data.shape[1]


@dataclass
class SampleCovariance:
    matrix: np.ndarray
    t: int

    @property
    def n(self):
        return self.matrix.shape[0]


def draw_snapshots(cov, t, seed, *, sqrt_cov=None):
    """Draw ``t`` snapshots ``cov^{1/2} xi`` with ``xi ~ CN(0, I)``.

    Pass a precomputed ``sqrt_cov`` to skip the square root when many
    snapshot sets share one covariance.
    """
    if t < 1:
        raise InvalidInput("need at least one snapshot")
    root = hermitian_sqrt(cov) if sqrt_cov is None else sqrt_cov
    n = root.shape[0]
    xi = complex_normals(make_rng(seed), (n, int(t)))
    return SnapshotSet(root @ xi, seed)


STREAM_BLOCK = 1 << 16  # snapshot columns generated per block when streaming


def draw_sample_covariance(cov, t, seed, *, sqrt_cov=None, block=STREAM_BLOCK):
    """Sample covariance of ``t`` snapshots without holding them all in memory.

    Snapshots are generated in blocks of ``block`` columns from one stream and
    their outer products accumulated. For ``t <= block`` the result is
    bitwise identical to ``sample_covariance(draw_snapshots(cov, t, seed))``;
    longer runs are reproducible for a fixed ``block``.
    """
    if t < 1:
        raise InvalidInput("need at least one snapshot")
    if block < 1:
        raise InvalidInput("block must be positive")
    t = int(t)
    if t <= block:
        return sample_covariance(draw_snapshots(cov, t, seed, sqrt_cov=sqrt_cov))
    root = hermitian_sqrt(cov) if sqrt_cov is None else sqrt_cov
    n = root.shape[0]
    rng = make_rng(seed)
    acc = np.zeros((n, n), dtype=np.complex128)
    done = 0
    while done < t:
        cols = min(block, t - done)
        x = root @ complex_normals(rng, (n, cols))
        acc += x @ x.conj().T
        done += cols
    return SampleCovariance(as_hermitian(acc / t, check=False), t)


def sample_covariance(x):
    data = x.data if isinstance(x, SnapshotSet) else np.asarray(x)
    t = data.shape[1]
    r = (data @ data.conj().T) / t
    return SampleCovariance(as_hermitian(r, check=False), t)
