import numpy as np
import pytest

import toepcov as tc
from toepcov import errors
from toepcov.likelihood import (
    ReferencePdf,
    cached_reference,
    noise_subspace_log_lr,
)

from conftest import CLUTTER_EIGS
from oracles import random_hermitian_pd, sphericity_direct


def test_self_sphericity_is_zero(clutter_sample):
    rep = tc.sphericity(clutter_sample.matrix, clutter_sample)
    assert abs(rep.log_lr) <= 1e-12
    assert rep.lr == pytest.approx(1.0)


def test_hand_example():
    rep = tc.sphericity(np.eye(2), np.diag([2.0, 0.5]), t=10)
    assert rep.log_lr == pytest.approx(np.log(0.64), abs=1e-15)


def test_matches_det_trace_formula(rng, clutter_sample):
    for _ in range(5):
        c = random_hermitian_pd(rng, 17, cond=50)
        ours = tc.sphericity(c, clutter_sample).log_lr
        assert ours == pytest.approx(sphericity_direct(c, clutter_sample.matrix), abs=1e-8)
        assert ours <= 0


def test_scale_invariance(clutter, clutter_sample):
    base = tc.sphericity(clutter, clutter_sample).log_lr
    for c in (1e-6, 0.37, 5.0, 1e8):
        assert abs(tc.sphericity(c * clutter, clutter_sample).log_lr - base) <= 1e-12


def test_rejects_indefinite_candidate(clutter_sample):
    with pytest.raises(errors.NotPositiveDefinite):
        tc.sphericity(-np.eye(17), clutter_sample)


def test_singular_sample_flagged():
    r = tc.sample_covariance(tc.draw_snapshots(np.eye(5), 3, 1))
    rep = tc.sphericity(np.eye(5), r)
    assert rep.singular and rep.log_lr == -np.inf


def test_bare_matrix_needs_t():
    with pytest.raises(errors.InvalidInput):
        tc.sphericity(np.eye(2), np.eye(2))


def test_spiked_single_direction_is_one(clutter, clutter_sample):
    assert tc.spiked_sphericity(clutter, 16, clutter_sample).log_lr == 0.0


def test_spiked_matches_direct_formula(clutter, clutter_sample):
    ev, u = np.linalg.eigh(clutter)
    q = np.real(np.einsum("ij,ik,kj->j", u[:, :4].conj(), clutter_sample.matrix, u[:, :4]))
    expect = np.log(np.prod(q) / np.mean(q) ** 4)
    got = tc.spiked_sphericity(clutter, 13, clutter_sample).log_lr
    assert got == pytest.approx(expect, abs=1e-12)


def test_spiked_accepts_indefinite_candidate(clutter_sample):
    ra = tc.redundancy_average(clutter_sample.matrix).matrix()
    ra = ra - (np.linalg.eigvalsh(ra)[0] + 0.1) * np.eye(17)
    assert tc.spiked_sphericity(ra, 13, clutter_sample).log_lr <= 0


def test_spiked_rephasing_invariance(clutter_sample, rng):
    # re-phasing eigenvectors leaves q_j = u^H R u unchanged: use a candidate
    # whose eigenvectors we control explicitly
    c = random_hermitian_pd(rng, 17)
    ev, u = np.linalg.eigh(c)
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, 17))
    c2 = ((u * phases) * ev) @ (u * phases).conj().T
    a = tc.spiked_sphericity(c, 13, clutter_sample).log_lr
    b = tc.spiked_sphericity(c2, 13, clutter_sample).log_lr
    assert a == pytest.approx(b, abs=1e-12)


def test_spiked_degenerate_projection():
    r = tc.SampleCovariance(np.diag([1.0, 1.0, 0.0]), 2)
    with pytest.raises(errors.DegenerateProjection):
        tc.spiked_sphericity(np.diag([3.0, 2.0, 1.0]), 1, r)


def test_ml_estimate_upper_bounds_true_matrix(clutter, clutter_sample):
    assert tc.sphericity(clutter, clutter_sample).log_lr < \
        tc.sphericity(clutter_sample.matrix, clutter_sample).log_lr


def test_reference_scalar_case():
    ref = tc.reference_sphericity(1, 10, 20, 3)
    assert np.all(ref.values == 0.0)


def test_reference_large_t():
    ref = tc.reference_sphericity(2, 10_000, 200, 3)
    assert -1e-3 < ref.median() <= 0


def test_reference_deterministic_and_thread_independent():
    a = tc.reference_sphericity(6, 30, 40, 9)
    b = tc.reference_sphericity(6, 30, 40, 9, threads=3)
    np.testing.assert_array_equal(a.values, b.values)
    assert np.all(np.diff(a.values) >= 0) and a.values.size == 40


def test_reference_excludes_singular_draws():
    ref = tc.reference_sphericity(5, 3, 10, 1)
    assert ref.excluded == 10 and ref.values.size == 0


def test_reference_save_load(tmp_path):
    ref = tc.reference_sphericity(4, 20, 25, 2)
    ref.save(tmp_path / "r.txt")
    back = ReferencePdf.load(tmp_path / "r.txt")
    np.testing.assert_array_equal(back.values, ref.values)
    assert (back.n, back.t, back.trials, back.seed) == (4, 20, 25, 2)


def test_reference_load_errors(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("reference_pdf n=4 t=20 trials=3 seed=1 excluded=0\n0.1\n-0.2\n")
    with pytest.raises(errors.ParseError) as info:
        ReferencePdf.load(p)
    assert info.value.field == "trials"
    p.write_text("reference_pdf n=4 t=x trials=1 seed=1 excluded=0\n-0.2\n")
    with pytest.raises(errors.ParseError):
        ReferencePdf.load(p)
    p.write_text("reference_pdf n=4 t=5 trials=1 seed=1 excluded=0\nabc\n")
    with pytest.raises(errors.ParseError) as info:
        ReferencePdf.load(p)
    assert info.value.line == 2


def test_cached_reference(tmp_path):
    a = cached_reference(3, 12, 15, 4, tmp_path)
    files = list(tmp_path.iterdir())
    assert len(files) == 1
    b = cached_reference(3, 12, 15, 4, tmp_path)
    np.testing.assert_array_equal(a.values, b.values)


@pytest.fixture(scope="module")
def ref_17_85():
    return tc.reference_sphericity(17, 85, 300, 1)


def test_noise_subspace_ratio():
    lam = np.array([4.0, 2.0, 1.0, 1.0])
    assert noise_subspace_log_lr(lam, 2) == 0.0
    assert noise_subspace_log_lr(lam, 3) == pytest.approx(np.log(2 / (4 / 3) ** 3))
    assert noise_subspace_log_lr(np.array([1.0, 0.0]), 2) == -np.inf


def test_select_flat_spectrum(ref_17_85):
    assert tc.select_noise_dim(np.ones(17), 85, ref_17_85) == 16


def test_select_true_clutter_spectrum(ref_17_85):
    # The six smallest eigenvalues (all within 2.1e-4 of the floor) pool;
    # a seventh (2.0e-3) does not.
    assert tc.select_noise_dim(CLUTTER_EIGS, 85, ref_17_85) == 6


def test_select_spike_plus_white():
    n, t = 8, 10_000
    cov = np.eye(n, dtype=complex)
    cov[0, 0] = 50.0
    ref = tc.reference_sphericity(n, t, 200, 5)
    lam = np.sort(np.linalg.eigvalsh(tc.sample_covariance(tc.draw_snapshots(cov, t, 2)).matrix))
    assert tc.select_noise_dim(lam[::-1], t, ref) == n - 1


def test_select_none_accepted_warns():
    # a single positive eigenvalue is always "flat", so only a zero eigenvalue
    # (rank-deficient sample) leaves every candidate rejected
    ref = ReferencePdf(np.zeros(10), 3, 50, 10, 0)
    with pytest.warns(errors.NoFlatSubspaceWarning):
        assert tc.select_noise_dim(np.array([100.0, 10.0, 0.0]), 50, ref) == 0


def test_select_validation(ref_17_85):
    with pytest.raises(errors.InvalidInput):
        tc.select_noise_dim(np.ones(16), 85, ref_17_85)
    with pytest.raises(errors.InvalidInput):
        tc.select_noise_dim(np.ones(17), 84, ref_17_85)
    with pytest.raises(errors.InvalidInput):
        tc.select_noise_dim(np.ones(17), 85, ref_17_85, alpha=1.5)
