"""Sphericity likelihood ratios and Expected-Likelihood noise-order selection.

Everything is computed as a natural log: the ratios of interest reach 1e-25
and below.
"""

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateProjection,
    InvalidInput,
    NoFlatSubspaceWarning,
    NotPositiveDefinite,
    ParseError,
)
from .numerics import as_hermitian, cholesky_lower, hermitian_eig
from .sampling import SampleCovariance, draw_snapshots, sample_covariance

# whitened eigenvalues this far below the largest mean a singular sample matrix
SINGULAR_RTOL = 1e-13


@dataclass
class LikelihoodReport:
    log_lr: float
    n: int
    t: int
    kind: str = "regular"
    m_signal: int = 0
    singular: bool = False

    @property
    def lr(self):
        return float(np.exp(self.log_lr))


def _log_flatness(values):
    """``sum(log v) - d log(mean v)``: log of geometric over arithmetic mean, ^d."""
    values = np.asarray(values, dtype=np.float64)
    d = values.shape[0]
    scale = values.max()
    v = values / scale
    return float(np.sum(np.log(v)) - d * np.log(np.mean(v)))


def _as_sample(sample, t=None):
    if isinstance(sample, SampleCovariance):
        return sample
    if t is None:
        raise InvalidInput("a bare matrix needs the snapshot count t")
    return SampleCovariance(as_hermitian(sample), int(t))


def sphericity(candidate, sample, t=None):
    """Log sphericity ratio ``det(R C^-1) / (tr(R C^-1) / n)^n`` of a p.d. candidate."""
    sample = _as_sample(sample, t)
    c = as_hermitian(candidate)
    r = sample.matrix
    n = c.shape[0]
    if r.shape != c.shape:
        raise InvalidInput("candidate and sample dimensions differ")
    low = cholesky_lower(c)
    half = scipy.linalg.solve_triangular(low, r, lower=True, check_finite=False)
    whitened = scipy.linalg.solve_triangular(
        low, half.conj().T, lower=True, check_finite=False
    )
    whitened = 0.5 * (whitened + whitened.conj().T)
    g = scipy.linalg.eigvalsh(whitened, check_finite=False)
    if g[-1] <= 0 or g[0] <= SINGULAR_RTOL * g[-1]:
        return LikelihoodReport(-np.inf, n, sample.t, "regular", 0, singular=True)
    return LikelihoodReport(min(_log_flatness(g), 0.0), n, sample.t)


def spiked_sphericity(candidate, m_signal, sample, t=None):
    """Sphericity of ``R`` restricted to the candidate's ``n - m_signal`` weakest
    eigenvectors. Only eigenvectors of the candidate are used, so it need not
    be positive definite."""
    sample = _as_sample(sample, t)
    n = sample.n
    if not 0 <= m_signal < n:
        raise InvalidInput(f"m_signal must lie in [0, {n})")
    vectors = hermitian_eig(candidate).vectors[:, m_signal:]
    q = np.real(np.einsum("ij,ik,kj->j", vectors.conj(), sample.matrix, vectors))
    if np.any(q <= 0):
        raise DegenerateProjection("non-positive quadratic form on the noise subspace")
    log_lr = 0.0 if q.shape[0] == 1 else min(_log_flatness(q), 0.0)
    return LikelihoodReport(log_lr, n, sample.t, "spiked", m_signal)


@dataclass
class ReferencePdf:
    """Sorted null-distribution sample of the log sphericity ratio of the true
    covariance, which depends on ``(n, t)`` only."""

    values: np.ndarray
    n: int
    t: int
    trials: int
    seed: int
    excluded: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.sort(np.asarray(self.values, dtype=np.float64))

    def quantile(self, alpha):
        return float(np.quantile(self.values, alpha))

    def median(self):
        return float(np.median(self.values))

    def save(self, path):
        path = Path(path)
        lines = [
            f"reference_pdf n={self.n} t={self.t} trials={self.trials} "
            f"seed={self.seed} excluded={self.excluded}"
        ]
        lines += [f"{v:.17g}" for v in self.values]
        path.write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path):
        path = Path(path)
        lines = path.read_text().splitlines()
        if not lines or not lines[0].startswith("reference_pdf "):
            raise ParseError("missing reference_pdf header", line=1)
        head = {}
        for item in lines[0].split()[1:]:
            key, sep, val = item.partition("=")
            if not sep:
                raise ParseError("malformed header item", line=1, field=item)
            try:
                head[key] = int(val)
            except ValueError:
                raise ParseError("header value is not an integer", line=1, field=key)
        for key in ("n", "t", "trials", "seed", "excluded"):
            if key not in head:
                raise ParseError("missing header field", line=1, field=key)
        values = []
        for lineno, text in enumerate(lines[1:], start=2):
            if not text.strip():
                continue
            try:
                values.append(float(text))
            except ValueError:
                raise ParseError("not a number", line=lineno)
        expected = head["trials"] - head["excluded"]
        if len(values) != expected:
            raise ParseError(
                f"expected {expected} values, found {len(values)}", field="trials"
            )
        return cls(np.array(values), head["n"], head["t"], head["trials"],
                   head["seed"], head["excluded"])


def reference_sphericity(n, t, trials, seed, *, threads=1):
    """Monte Carlo null pdf: sphericity of white-noise sample covariances against I.

    Trial ``i`` uses the stream ``(seed, i)``; the result does not depend on
    ``threads``. Singular draws (``t < n``) are dropped and counted.
    """
    identity = np.eye(n, dtype=np.complex128)

    def one(i):
        s = sample_covariance(draw_snapshots(identity, t, (seed, i), sqrt_cov=identity))
        return sphericity(identity, s).log_lr

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(threads) as pool:
            raw = list(pool.map(one, range(trials)))
    else:
        raw = [one(i) for i in range(trials)]
    raw = np.array(raw)
    finite = raw[np.isfinite(raw)]
    return ReferencePdf(finite, n, t, trials, seed, excluded=int(trials - finite.size))


def cached_reference(n, t, trials, seed, cache_dir, *, threads=1):
    """Load ``reference_sphericity(n, t, trials, seed)`` from *cache_dir*, or
    compute and store it."""
    cache_dir = Path(cache_dir)
    path = cache_dir / f"refpdf_n{n}_t{t}_trials{trials}_seed{seed}.txt"
    if path.exists():
        return ReferencePdf.load(path)
    ref = reference_sphericity(n, t, trials, seed, threads=threads)
    cache_dir.mkdir(parents=True, exist_ok=True)
    ref.save(path)
    return ref


def noise_subspace_log_lr(sample_eigs, noise_dim):
    """Log ratio for pooling the ``noise_dim`` smallest sample eigenvalues."""
    lam = np.sort(np.asarray(sample_eigs, dtype=np.float64))
    tail = lam[:noise_dim]
    if np.any(tail <= 0):
        return -np.inf
    return min(_log_flatness(tail), 0.0)


def select_noise_dim(sample_eigs, t, ref, alpha=0.05):
    """Largest noise-subspace dimension whose pooled likelihood ratio is
    consistent with the null pdf of the true covariance.

    Replacing the ``d`` smallest sample eigenvalues by their mean gives a
    candidate whose sphericity against the sample matrix is
    ``prod(lambda) / mean(lambda)^d`` over those ``d`` values. It is accepted
    when it lies at or above the ``alpha`` quantile of *ref*.
    """
    lam = np.asarray(sample_eigs, dtype=np.float64)
    n = lam.shape[0]
    if ref.n != n:
        raise InvalidInput(f"reference pdf is for n={ref.n}, sample has n={n}")
    if ref.t != t:
        raise InvalidInput(f"reference pdf is for t={ref.t}, sample has t={t}")
    if not 0.0 < alpha < 1.0:
        raise InvalidInput("alpha must lie in (0, 1)")
    threshold = ref.quantile(alpha)
    for d in range(n - 1, 0, -1):
        if noise_subspace_log_lr(lam, d) >= threshold:
            return d
    warnings.warn("no noise subspace dimension accepted", NoFlatSubspaceWarning)
    return 0
