"""Alternating first-order Newton refinement of a Hermitian Toeplitz matrix
toward prescribed eigenvalues.

The iterate is stored as lag moduli and phases, never as a dense matrix, so
every iterate is exactly Hermitian Toeplitz and the diagonal ``t0`` (hence the
trace) never changes. Phase stages move the ``n - 1`` lag phases with moduli
fixed; moduli stages move the ``n - 1`` moduli with phases fixed.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import InvalidInput, NotPositiveDefinite, SingularSensitivity
from .likelihood import sphericity
from .numerics import EigenDecomposition, hermitian_eig, spectral_norm
from .toeplitzify import ToeplitzLags

PHASE = "phase"
MODULI = "moduli"
HISTORY_FIELDS = (
    "iteration",
    "stage",
    "eigen_distance",
    "log_lr",
    "spiked_log_lr",
    "spectral_norm_error",
)


@dataclass
class ToiepOptions:
    max_iterations: int = 5000
    step_cap: float = 0.05  # max |delta| per coordinate (radians or modulus units)
    stall_tolerance: float = 1e-10  # stop once the eigen-distance is this small
    stage_switch_tolerance: float = 1e-4  # relative per-iteration improvement
    line_search: bool = True
    step_floor: float = 1e-6
    ridge: float = 1e-12

    def __post_init__(self):
        if not self.step_cap > 0:
            raise InvalidInput("step_cap must be positive")
        if self.max_iterations < 0:
            raise InvalidInput("max_iterations must be non-negative")


@dataclass
class NewtonState:
    t0: float
    moduli: np.ndarray
    phases: np.ndarray
    eig: EigenDecomposition
    iteration: int = 0
    stage: str = PHASE
    accepted: bool = True
    history: list = field(default_factory=list)

    @classmethod
    def start(cls, lags):
        moduli = lags.moduli.copy()
        phases = lags.phases.copy()
        eig = hermitian_eig(lags.matrix())
        return cls(lags.t0, moduli, phases, eig)

    @property
    def lags(self):
        return ToeplitzLags.from_polar(self.t0, self.moduli, self.phases)

    def matrix(self):
        return self.lags.matrix()

    def distance(self, target):
        return float(np.linalg.norm(self.eig.values - target))


def as_target(values):
    target = np.asarray(values, dtype=np.float64)
    if np.any(target <= 0):
        raise InvalidInput("target eigenvalues must be positive")
    if np.any(np.diff(target) > 0):
        raise InvalidInput("target eigenvalues must be sorted descending")
    return target


def wrap_phase(phases):
    """Map to (-pi, pi]."""
    wrapped = np.mod(phases + np.pi, 2.0 * np.pi) - np.pi
    return np.where(wrapped == -np.pi, np.pi, wrapped)


def phase_sensitivity(state):
    """``d lambda_m / d psi_k`` for descending eigenvalues ``m`` and lags ``k``."""
    corr = kernels.lag_correlations(state.eig.vectors)
    rot = np.exp(1j * state.phases)
    return -2.0 * state.moduli[None, :] * np.imag(rot[None, :] * corr)


def moduli_sensitivity(state):
    """``d lambda_m / d |t_k|`` for descending eigenvalues ``m`` and lags ``k``."""
    corr = kernels.lag_correlations(state.eig.vectors)
    rot = np.exp(1j * state.phases)
    return 2.0 * np.real(rot[None, :] * corr)


def _direction(sens, residual, active, opts, scale):
    b = sens[:, active]
    if b.size == 0 or np.max(np.abs(b)) <= 1e-10 * scale:
        raise SingularSensitivity("eigenvalues do not respond to this parameter set")
    gram = b.T @ b
    ridge = opts.ridge * np.trace(gram) / gram.shape[0]
    try:
        step = np.linalg.solve(gram + ridge * np.eye(gram.shape[0]), b.T @ residual)
    except np.linalg.LinAlgError as exc:
        raise SingularSensitivity(str(exc)) from exc
    if not np.all(np.isfinite(step)):
        raise SingularSensitivity("non-finite Newton step")
    delta = np.zeros(sens.shape[1])
    delta[active] = step
    return delta


def _nearly_degenerate(values):
    gaps = -np.diff(values)
    return gaps.size > 0 and np.min(gaps) < 1e-10 * abs(values[0])


def _step(state, target, opts, stage):
    residual = target - state.eig.values
    current = float(np.linalg.norm(residual))
    if current == 0.0:
        return _moved(state, state.moduli, state.phases, state.eig, stage, False)
    scale = max(abs(state.t0), float(np.max(state.moduli, initial=0.0)))
    if stage == PHASE:
        sens = phase_sensitivity(state)
        active = state.moduli > 0  # a zero lag has no phase to move
    else:
        sens = moduli_sensitivity(state)
        active = np.ones(state.moduli.shape, dtype=bool)
    delta = _direction(sens, residual, active, opts, scale)
    biggest = np.max(np.abs(delta))
    if biggest > opts.step_cap:
        delta *= opts.step_cap / biggest
    c = 0.5 if _nearly_degenerate(state.eig.values) else 1.0
    while True:
        if stage == PHASE:
            moduli, phases = state.moduli, wrap_phase(state.phases + c * delta)
        else:
            moduli, phases = np.maximum(state.moduli + c * delta, 0.0), state.phases
        row = np.concatenate(([complex(state.t0)], moduli * np.exp(1j * phases)))
        eig = hermitian_eig(kernels.toeplitz_from_row(row))
        if not opts.line_search:
            return _moved(state, moduli, phases, eig, stage, True)
        if np.linalg.norm(target - eig.values) < current:
            return _moved(state, moduli, phases, eig, stage, True)
        c *= 0.5
        if c < opts.step_floor:
            return _moved(state, state.moduli, state.phases, state.eig, stage, False)


def _moved(state, moduli, phases, eig, stage, accepted):
    return NewtonState(
        state.t0,
        np.array(moduli, dtype=np.float64),
        np.array(phases, dtype=np.float64),
        eig,
        state.iteration + 1,
        stage,
        accepted,
        state.history,
    )


def phase_step(state, target, opts=None):
    """One least-squares Newton update of the lag phases (moduli fixed)."""
    return _step(state, as_target(target), opts or ToiepOptions(), PHASE)


def moduli_step(state, target, opts=None):
    """One least-squares Newton update of the lag moduli (phases and ``t0`` fixed)."""
    return _step(state, as_target(target), opts or ToiepOptions(), MODULI)


def _record(state, target, sample, reference, noise_dim):
    matrix = state.matrix()
    try:
        log_lr = sphericity(matrix, sample).log_lr
    except NotPositiveDefinite:
        log_lr = math.nan
    spiked = math.nan
    if noise_dim:
        vectors = state.eig.vectors[:, sample.n - noise_dim:]
        q = np.real(np.einsum("ij,ik,kj->j", vectors.conj(), sample.matrix, vectors))
        if np.all(q > 0):
            spiked = float(np.sum(np.log(q)) - q.size * np.log(np.mean(q)))
    err = spectral_norm(matrix - reference) if reference is not None else math.nan
    state.history.append(
        {
            "iteration": state.iteration,
            "stage": state.stage,
            "eigen_distance": state.distance(target),
            "log_lr": log_lr,
            "spiked_log_lr": spiked,
            "spectral_norm_error": err,
        }
    )


def solve(initial, target, sample, opts=None, *, reference=None, noise_dim=None):
    """Alternate phase and moduli stages from *initial* toward *target*.

    A stage hands over to the other one when an iteration improves the
    eigen-distance by less than ``stage_switch_tolerance`` (relative) or its
    sensitivity matrix is singular. The loop ends after ``max_iterations``,
    when the distance drops to ``stall_tolerance``, or when both stages fail
    to make progress back to back. History row 0 describes *initial*.
    """
    opts = opts or ToiepOptions()
    target = as_target(target)
    if target.shape[0] != initial.n:
        raise InvalidInput("target length does not match the matrix dimension")
    state = NewtonState.start(initial)
    _record(state, target, sample, reference, noise_dim)
    stage = PHASE
    idle_switches = 0
    while state.iteration < opts.max_iterations:
        before = state.distance(target)
        if before <= opts.stall_tolerance:
            break
        try:
            state = _step(state, target, opts, stage)
        except SingularSensitivity:
            state = _moved(state, state.moduli, state.phases, state.eig, stage, False)
        after = state.distance(target)
        _record(state, target, sample, reference, noise_dim)
        if (before - after) < opts.stage_switch_tolerance * before:
            idle_switches = idle_switches + 1 if not state.accepted else 0
            if idle_switches >= 2:
                break
            stage = MODULI if stage == PHASE else PHASE
        else:
            idle_switches = 0
    return state


def write_history_csv(history, path):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=HISTORY_FIELDS)
        writer.writeheader()
        for row in history:
            writer.writerow({k: row[k] for k in HISTORY_FIELDS})
