"""Toeplitz covariance estimation from complex Gaussian snapshots.

Estimators: redundancy averaging, diagonal-loading rectification, Mestre
eigenvalue correction with alternating Newton refinement, and reconstruction
of a p.d. Toeplitz matrix with the sample's Maximum Entropy spectrum. Quality
is judged by sphericity likelihood ratios.
"""

from .errors import *  # noqa: F401,F403
from .kernels import BACKEND
from .likelihood import (
    LikelihoodReport,
    ReferencePdf,
    reference_sphericity,
    select_noise_dim,
    spiked_sphericity,
    sphericity,
)
from .mespec import (
    minimum_phase_flip,
    gohberg_semencul_inverse,
    prediction_vector,
    reconstruct_toeplitz,
    replace_eigenvalues,
)
from .models import (
    ClutterScenario,
    PlaneWaveScenario,
    clutter_covariance,
    plane_wave_covariance,
    sinc_matrix,
)
from .numerics import hermitian_eig, hermitian_sqrt, poly_roots, solve_hermitian
from .rmt import SubspacePartition, mestre_correct, mp_density, mp_support
from .sampling import (
    SampleCovariance,
    SnapshotSet,
    draw_sample_covariance,
    draw_snapshots,
    sample_covariance,
)
from .toeplitzify import ToeplitzLags, min_sample_size, rectify_loading, redundancy_average
from .toiep import ToiepOptions, moduli_step, phase_step, solve

__version__ = "0.1.0"
