"""Monte Carlo driver: snapshots -> sample covariance -> estimator chain -> metrics.

Trial ``i`` draws its snapshots from the stream ``(seed, i)``, so a record
depends only on the configuration and its index. Trials may run on several
threads; records are always returned in index order.
"""

import json
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ToepcovError
from ..likelihood import cached_reference, reference_sphericity, select_noise_dim
from ..likelihood import spiked_sphericity, sphericity
from ..mespec import reconstruct_toeplitz, replace_eigenvalues
from ..models import clutter_covariance, plane_wave_covariance, ClutterScenario
from ..numerics import hermitian_sqrt, spectral_norm
from ..rmt import SubspacePartition, mestre_correct
from ..sampling import draw_sample_covariance
from ..toeplitzify import rectify_loading, redundancy_average
from ..toiep import ToiepOptions, solve, write_history_csv
from . import io

N_SMALLEST = 4
QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)
NUMERIC_FIELDS = (
    "spectral_norm",
    "log_lr",
    "spiked_log_lr",
    "true_log_lr",
    "true_spiked_log_lr",
)


@dataclass
class TrialRecord:
    index: int
    smallest: tuple  # the N_SMALLEST smallest estimate eigenvalues, ascending
    spectral_norm: float
    log_lr: float
    spiked_log_lr: float
    true_log_lr: float  # the true covariance scored against the same sample
    true_spiked_log_lr: float
    noise_dim: int  # -1 when not selected
    flags: tuple = ()
    timings: dict = field(default_factory=dict, compare=False)

    @property
    def lambda_min(self):
        return self.smallest[0]

    @property
    def failed(self):
        return any("_failed" in f for f in self.flags)

    def row(self, stages):
        return (
            [self.index, *self.smallest]
            + [getattr(self, name) for name in NUMERIC_FIELDS]
            + [self.noise_dim, ";".join(self.flags)]
            + [self.timings.get(s, math.nan) for s in stages]
        )


def trial_fieldnames(stages):
    return (
        ["index"]
        + [f"eig_min_{k + 1}" for k in range(N_SMALLEST)]
        + list(NUMERIC_FIELDS)
        + ["noise_dim", "flags"]
        + [f"time_{s}" for s in stages]
    )


@dataclass
class ExperimentResult:
    config: object
    records: list
    summary: dict
    truth: np.ndarray


def true_covariance(config):
    model = config.model()
    if model is None:
        return np.eye(config.n, dtype=np.complex128)
    if isinstance(model, ClutterScenario):
        return clutter_covariance(model)
    return plane_wave_covariance(model)


def _needs_reference(config):
    if config.noise_dim != "auto":
        return False
    uses_rmt = config.chain in ("ra+loading", "ra+toiep", "me+replace(rmt)")
    return uses_rmt or "noise_dim" in config.metrics


def build_reference(config):
    if config.cache_dir:
        return cached_reference(config.n, config.t, config.reference_trials,
                                config.reference_seed, config.cache_dir,
                                threads=config.threads)
    return reference_sphericity(config.n, config.t, config.reference_trials,
                                config.reference_seed, threads=config.threads)


class _Trial:
    """State of one trial while its chain runs."""

    def __init__(self, config, truth, sqrt_truth, truth_eigs, reference, index):
        self.config = config
        self.truth = truth
        self.sqrt_truth = sqrt_truth
        self.truth_eigs = truth_eigs
        self.reference = reference
        self.index = index
        self.flags = []
        self.timings = {}
        self.matrices = {}
        self.noise_dim = -1
        self._correction = None

    def timed(self, name, fn, *args):
        start = time.perf_counter()
        try:
            return fn(*args)
        finally:
            self.timings[name] = time.perf_counter() - start

    def correction(self, sample):
        if self._correction is None:
            cfg = self.config
            lam = np.linalg.eigvalsh(sample.matrix)
            lam = np.clip(lam, 0.0, None)
            if cfg.noise_dim == "auto":
                with warnings.catch_warnings(record=True) as caught:
                    warnings.simplefilter("always")
                    self.noise_dim = select_noise_dim(lam[::-1], cfg.t, self.reference,
                                                      cfg.alpha)
                if caught:
                    self.flags.append("no_flat_subspace")
            else:
                self.noise_dim = cfg.noise_dim
            part = SubspacePartition.noise_cluster(cfg.n, self.noise_dim)
            self._correction = mestre_correct(lam, cfg.t, part)
        return self._correction

    def run_chain(self, sample):
        cfg = self.config
        stages = cfg.stages
        estimate = None
        for stage in stages:
            if stage == "ra":
                lags = self.timed("ra", redundancy_average, sample.matrix)
                estimate = lags.matrix()
            elif stage == "loading":
                def load():
                    corr = self.correction(sample)
                    return rectify_loading(lags, corr.smallest).matrix
                estimate = self.timed("loading", load)
            elif stage == "toiep":
                def refine():
                    corr = self.correction(sample)
                    start = rectify_loading(lags, corr.smallest).matrix
                    self.matrices["loading"] = start
                    opts = ToiepOptions(max_iterations=cfg.toiep_iterations)
                    state = solve(redundancy_average(start), corr.target_spectrum(),
                                  sample, opts, reference=self.truth,
                                  noise_dim=cfg.spiked_noise_dim or None)
                    self.history = state.history
                    return state.matrix()
                estimate = self.timed("toiep", refine)
            elif stage == "me":
                estimate = self.timed("me", reconstruct_toeplitz, sample.matrix)
            elif stage.startswith("replace("):
                source = cfg.spectrum_source
                def swap():
                    if source == "true":
                        target = self.truth_eigs
                    else:
                        target = self.correction(sample).target_spectrum()
                    return replace_eigenvalues(estimate, target)
                estimate = self.timed(stage, swap)
            self.matrices[stage] = estimate
        return estimate


def apply_chain(config, sample, truth=None, reference=None):
    """Run ``config.chain`` on one sample covariance outside a Monte Carlo batch.

    Returns ``(estimate, info)`` where *info* holds the selected noise
    dimension, flags, timings, intermediate matrices and, for ``toiep``, the
    convergence history. Errors propagate.
    """
    if config.spectrum_source == "true" and truth is None:
        raise ValueError("replace(true) needs the true covariance")
    if reference is None and _needs_reference(config):
        reference = build_reference(config)
    truth_eigs = None if truth is None else np.sort(np.linalg.eigvalsh(truth))[::-1]
    trial = _Trial(config, truth, None, truth_eigs, reference, 0)
    estimate = trial.run_chain(sample)
    info = {
        "noise_dim": trial.noise_dim,
        "flags": tuple(trial.flags),
        "timings": dict(trial.timings),
        "matrices": dict(trial.matrices),
        "history": getattr(trial, "history", None),
    }
    return estimate, info


def _nan_record(index, flags, timings, noise_dim=-1, true_lr=(math.nan, math.nan)):
    return TrialRecord(index, (math.nan,) * N_SMALLEST, math.nan, math.nan, math.nan,
                       true_lr[0], true_lr[1], noise_dim, tuple(flags), timings)


def _score(candidate, sample, m_signal, flags, tag):
    try:
        rep = sphericity(candidate, sample)
        log_lr = math.nan if rep.singular else rep.log_lr
        if rep.singular:
            flags.append(f"{tag}singular_sample")
    except ToepcovError:
        log_lr = math.nan
        flags.append(f"{tag}not_pd")
    spiked = math.nan
    if m_signal is not None:
        try:
            spiked = spiked_sphericity(candidate, m_signal, sample).log_lr
        except ToepcovError:
            flags.append(f"{tag}degenerate_projection")
    return log_lr, spiked


def run_trial(config, truth, sqrt_truth, truth_eigs, reference, index):
    """One trial; failures inside the chain are recorded, never raised."""
    trial = _Trial(config, truth, sqrt_truth, truth_eigs, reference, index)
    sample = draw_sample_covariance(truth, config.t, (config.seed, index),
                                    sqrt_cov=sqrt_truth)
    metrics = set(config.metrics)
    m_signal = None
    if "spiked_log_lr" in metrics and config.spiked_noise_dim > 0:
        m_signal = config.n - config.spiked_noise_dim
    true_lr = _score(truth, sample, m_signal, trial.flags, "true_")
    try:
        if "noise_dim" in metrics:
            trial.correction(sample)
        estimate = trial.run_chain(sample)
    except (ToepcovError, np.linalg.LinAlgError) as exc:
        stage = next((s for s in config.stages if s not in trial.matrices), "chain")
        trial.flags.append(f"{stage}_failed:{type(exc).__name__}")
        _dump(config, trial, sample)
        return _nan_record(index, trial.flags, trial.timings, trial.noise_dim, true_lr)
    _dump(config, trial, sample)

    smallest = (math.nan,) * N_SMALLEST
    if "eigs" in metrics:
        ev = np.linalg.eigvalsh(estimate)
        smallest = tuple(float(v) for v in ev[:N_SMALLEST])
        smallest += (math.nan,) * (N_SMALLEST - len(smallest))
    norm = spectral_norm(estimate - truth) if "spectral_norm" in metrics else math.nan
    log_lr, spiked = _score(estimate, sample, m_signal, trial.flags, "")
    if "log_lr" not in metrics:
        log_lr = math.nan
    return TrialRecord(index, smallest, float(norm), log_lr, spiked, true_lr[0],
                       true_lr[1], trial.noise_dim, tuple(trial.flags), trial.timings)


def _dump(config, trial, sample):
    if not config.dump_dir:
        return
    out = Path(config.dump_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"trial{trial.index:05d}"
    io.write_matrix(sample.matrix, out / f"{stem}_sample.txt")
    for stage, m in trial.matrices.items():
        io.write_matrix(m, out / f"{stem}_{stage}.txt")
    if getattr(trial, "history", None):
        write_history_csv(trial.history, out / f"{stem}_toiep.csv")


def summarize(records, config, reference=None):
    """Medians, quantiles, histograms and the negative-lambda_min frequency."""
    def column(name):
        return np.array([getattr(r, name) for r in records], dtype=np.float64)

    series = {f"eig_min_{k + 1}": np.array([r.smallest[k] for r in records])
              for k in range(N_SMALLEST)}
    series.update({name: column(name) for name in NUMERIC_FIELDS})

    def stat(values, fn):
        finite = values[np.isfinite(values)]
        return float(fn(finite)) if finite.size else math.nan

    lam_min = series["eig_min_1"]
    valid = np.isfinite(lam_min)
    dims = [r.noise_dim for r in records if r.noise_dim >= 0]
    summary = {
        "trials": len(records),
        "failed_trials": sum(r.failed for r in records),
        "negative_lambda_min_count": int(np.sum(lam_min[valid] < 0)),
        "negative_lambda_min_fraction": (
            float(np.mean(lam_min[valid] < 0)) if valid.any() else math.nan
        ),
        "medians": {k: stat(v, np.median) for k, v in series.items()},
        "quantiles": {
            k: {str(q): stat(v, lambda x: np.quantile(x, q)) for q in QUANTILES}
            for k, v in series.items()
        },
        "noise_dim_counts": {str(d): dims.count(d) for d in sorted(set(dims))},
        "histograms": {k: io.emit_histogram(v, config.bins) for k, v in series.items()},
    }
    if reference is not None:
        summary["reference"] = {
            "n": reference.n,
            "t": reference.t,
            "median_log_lr": reference.median(),
            "alpha_quantile_log_lr": reference.quantile(config.alpha),
        }
    return summary


def run_experiment(config):
    truth = true_covariance(config)
    sqrt_truth = hermitian_sqrt(truth)
    truth_eigs = np.sort(np.linalg.eigvalsh(truth))[::-1]
    reference = build_reference(config) if _needs_reference(config) else None

    def one(i):
        return run_trial(config, truth, sqrt_truth, truth_eigs, reference, i)

    if config.threads > 1:
        with ThreadPoolExecutor(config.threads) as pool:
            records = list(pool.map(one, range(config.trials)))
    else:
        records = [one(i) for i in range(config.trials)]
    summary = summarize(records, config, reference)
    result = ExperimentResult(config, records, summary, truth)
    write_outputs(result)
    return result


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_outputs(result):
    cfg = result.config
    stages = cfg.stages
    if cfg.trials_csv:
        io.write_csv([r.row(stages) for r in result.records], trial_fieldnames(stages),
                     cfg.trials_csv)
    if cfg.summary_json:
        body = {k: v for k, v in result.summary.items() if k != "histograms"}
        body["config"] = cfg.to_dict()
        Path(cfg.summary_json).write_text(json.dumps(_jsonable(body), indent=2) + "\n")
    if cfg.histogram_dir:
        out = Path(cfg.histogram_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, rows in result.summary["histograms"].items():
            io.write_histogram(rows, out / f"hist_{name}.csv")
