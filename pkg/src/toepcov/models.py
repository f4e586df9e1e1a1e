"""Ground-truth Hermitian Toeplitz covariance scenarios.

Matrices are built from their first row ``t_k = T[0, k]`` so every constructor
returns an exactly Toeplitz result. Angles are in degrees at the interface.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidInput


@dataclass(frozen=True)
class ClutterScenario:
    """HF over-the-horizon radar clutter seen by a uniform linear array.

    Two band-limited components: a broad one of normalized width ``w1`` at
    broadside and a weaker (x0.5) one of width ``w2`` steered to ``theta_o``,
    plus white noise of power ``noise_power``.
    """

    n: int = 17
    w1: float = 0.2
    w2: float = 0.1
    theta_o: float = 20.0
    spacing_ratio: float = 0.5
    noise_power: float = 1e-4

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInput("n must be positive")
        for name in ("w1", "w2"):
            w = getattr(self, name)
            if not 0.0 < w <= 0.5:
                raise InvalidInput(f"{name} must lie in (0, 0.5], got {w}")
        if self.noise_power <= 0:
            raise InvalidInput("noise_power must be positive")


@dataclass(frozen=True)
class PlaneWaveScenario:
    """Independent plane waves on a uniform linear array in white noise."""

    n: int
    angles: tuple = ()
    powers: tuple = ()
    spacing_ratio: float = 0.5
    noise_power: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        object.__setattr__(self, "powers", tuple(float(p) for p in self.powers))
        if len(self.angles) != len(self.powers):
            raise InvalidInput("angles and powers must have equal length")
        if len(self.angles) >= self.n:
            raise InvalidInput("need fewer sources than sensors")
        if any(p <= 0 for p in self.powers):
            raise InvalidInput("source powers must be positive")
        if self.noise_power <= 0:
            raise InvalidInput("noise_power must be positive")


def steering_phase(theta_deg, spacing_ratio):
    """Inter-element phase increment ``2 pi (d / lambda) sin(theta)``."""
    return 2.0 * np.pi * spacing_ratio * np.sin(np.deg2rad(theta_deg))


def sinc_lags(n, w):
    if not 0.0 < w <= 0.5:
        raise InvalidInput(f"bandwidth must lie in (0, 0.5], got {w}")
    k = np.arange(1, n)
    lags = np.empty(n, dtype=np.float64)
    lags[0] = 2.0 * w
    lags[1:] = np.sin(2.0 * np.pi * w * k) / (np.pi * k)
    return lags


def sinc_matrix(n, w):
    """Real symmetric Toeplitz ``sin(2 pi w (i - j)) / (pi (i - j))``, diagonal ``2w``."""
    return kernels.toeplitz_from_row(sinc_lags(n, w).astype(np.complex128))


def clutter_lags(s):
    # T[i, j] = s1(i-j) + 0.5 s2(i-j) exp(i (i-j) phi); first row uses j - i = k.
    k = np.arange(s.n)
    phi = steering_phase(s.theta_o, s.spacing_ratio)
    row = sinc_lags(s.n, s.w1) + 0.5 * sinc_lags(s.n, s.w2) * np.exp(-1j * k * phi)
    row[0] = row[0].real + s.noise_power
    return row


def clutter_covariance(s):
    return kernels.toeplitz_from_row(clutter_lags(s))


def plane_wave_lags(s):
    k = np.arange(s.n)
    row = np.zeros(s.n, dtype=np.complex128)
    for theta, power in zip(s.angles, s.powers):
        row += power * np.exp(-1j * k * steering_phase(theta, s.spacing_ratio))
    row[0] = row[0].real + s.noise_power
    return row


def plane_wave_covariance(s):
    return kernels.toeplitz_from_row(plane_wave_lags(s))
