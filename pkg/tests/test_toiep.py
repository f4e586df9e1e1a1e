import csv

import numpy as np
import pytest

import toepcov as tc
from toepcov import errors, toiep
from toepcov.toiep import NewtonState, ToiepOptions

from oracles import eig_fd_modulus, eig_fd_phase, random_pd_toeplitz


def _state(row):
    return NewtonState.start(tc.ToeplitzLags.from_row(row))


def _distinct(values, rel=1e-6):
    return np.min(-np.diff(values)) > rel * abs(values[0])


@pytest.mark.parametrize("n", [3, 5, 8])
def test_sensitivities_match_finite_differences(rng, n):
    checked = 0
    while checked < 5:
        t = random_pd_toeplitz(rng, n)
        state = _state(t[0])
        if not _distinct(state.eig.values, 1e-3):
            continue
        b = toiep.phase_sensitivity(state)
        bdot = toiep.moduli_sensitivity(state)
        assert b.shape == bdot.shape == (n, n - 1)
        for k in range(1, n):
            np.testing.assert_allclose(b[:, k - 1], eig_fd_phase(t[0], k), atol=1e-4, rtol=0)
            np.testing.assert_allclose(bdot[:, k - 1], eig_fd_modulus(t[0], k), atol=1e-4,
                                       rtol=0)
        checked += 1


def test_zero_residual_is_a_no_op(rng):
    t = random_pd_toeplitz(rng, 5)
    state = _state(t[0])
    target = state.eig.values.copy()
    for step in (toiep.phase_step, toiep.moduli_step):
        new = step(state, target)
        np.testing.assert_array_equal(new.moduli, state.moduli)
        np.testing.assert_array_equal(new.phases, state.phases)


def test_two_by_two_phase_is_singular():
    state = _state([1.0, 0.3 * np.exp(0.4j)])
    with pytest.raises(errors.SingularSensitivity):
        toiep.phase_step(state, [1.5, 0.5])


def test_two_by_two_moduli_full_step():
    state = _state([1.0, 0.3])
    new = toiep.moduli_step(state, [1.5, 0.5], ToiepOptions(step_cap=1.0, ridge=0.0))
    assert new.moduli[0] == pytest.approx(0.5, abs=1e-14)
    np.testing.assert_allclose(new.eig.values, [1.5, 0.5], atol=1e-14)
    assert new.t0 == 1.0


def test_step_cap_limits_the_move():
    state = _state([1.0, 0.3])
    new = toiep.moduli_step(state, [1.5, 0.5])
    assert new.moduli[0] == pytest.approx(0.35, abs=1e-14)


def test_diagonal_matrix_moduli_singular():
    state = _state([2.0, 0.0, 0.0, 0.0])
    with pytest.raises(errors.SingularSensitivity):
        toiep.moduli_step(state, [3.0, 2.0, 2.0, 1.0])


def test_target_validation():
    state = _state([1.0, 0.3, 0.1])
    with pytest.raises(errors.InvalidInput):
        toiep.phase_step(state, [1.0, 2.0, 0.5])
    with pytest.raises(errors.InvalidInput):
        toiep.phase_step(state, [2.0, 1.0, 0.0])
    with pytest.raises(errors.InvalidInput):
        ToiepOptions(step_cap=0.0)


def test_wrap_phase():
    np.testing.assert_allclose(toiep.wrap_phase(np.array([np.pi, -np.pi, 3 * np.pi, 0.1])),
                               [np.pi, np.pi, np.pi, 0.1])


def test_solve_returns_at_target(rng, clutter_sample):
    t = random_pd_toeplitz(rng, 17)
    lags = tc.ToeplitzLags.from_row(t[0])
    target = np.sort(np.linalg.eigvalsh(t))[::-1]
    state = tc.solve(lags, target, clutter_sample)
    assert state.iteration == 0
    assert len(state.history) == 1


def test_solve_monotone_and_trace_exact(rng):
    n = 8
    start = random_pd_toeplitz(rng, n)
    goal = random_pd_toeplitz(rng, n)
    goal *= np.trace(start).real / np.trace(goal).real
    target = np.sort(np.linalg.eigvalsh(goal))[::-1]
    sample = tc.SampleCovariance(goal, 100)
    state = tc.solve(tc.ToeplitzLags.from_row(start[0]), target, sample,
                     ToiepOptions(max_iterations=300), reference=goal, noise_dim=3)
    dist = [row["eigen_distance"] for row in state.history]
    assert np.all(np.diff(dist) <= 0)
    assert dist[-1] < 0.5 * dist[0]
    assert state.matrix()[0, 0].real == start[0, 0].real
    stages = {row["stage"] for row in state.history}
    assert stages == {"phase", "moduli"}
    assert all(np.isfinite(row["spectral_norm_error"]) for row in state.history)


def test_history_csv(tmp_path, rng):
    n = 5
    start = random_pd_toeplitz(rng, n)
    target = np.sort(np.linalg.eigvalsh(random_pd_toeplitz(rng, n)))[::-1]
    state = tc.solve(tc.ToeplitzLags.from_row(start[0]), target,
                     tc.SampleCovariance(start, 50), ToiepOptions(max_iterations=20))
    path = tmp_path / "trace.csv"
    toiep.write_history_csv(state.history, path)
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == list(toiep.HISTORY_FIELDS)
    assert len(rows) == len(state.history)
    assert int(rows[-1]["iteration"]) == state.iteration


def test_iterates_stay_toeplitz(rng):
    start = random_pd_toeplitz(rng, 6)
    target = np.sort(np.linalg.eigvalsh(random_pd_toeplitz(rng, 6)))[::-1]
    state = tc.solve(tc.ToeplitzLags.from_row(start[0]), target,
                     tc.SampleCovariance(start, 50), ToiepOptions(max_iterations=50))
    m = state.matrix()
    for k in range(6):
        d = np.diagonal(m, k)
        assert np.all(d == d[0])
