"""Command line entry point: ``toepcov <command> [options]``.

Commands::

    model        write a scenario covariance matrix
    simulate     Monte Carlo experiment from a JSON config
    estimate     run one estimator chain on a snapshot or sample-matrix file
    reconstruct  ME-spectrum p.d. Toeplitz reconstruction of a matrix file
    toiep        Newton refinement toward corrected eigenvalues, with a CSV trace
    lr           sphericity likelihood ratios of a candidate against a sample
    refpdf       build (or load from cache) a null pdf of the sphericity ratio
"""

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .. import __version__
from ..errors import ToepcovError
from ..likelihood import (
    cached_reference,
    reference_sphericity,
    select_noise_dim,
    spiked_sphericity,
    sphericity,
)
from ..mespec import me_reconstruction
from ..numerics import spectral_norm
from ..rmt import SubspacePartition, mestre_correct
from ..sampling import SampleCovariance, sample_covariance
from ..toeplitzify import rectify_loading, redundancy_average
from ..toiep import ToiepOptions, solve, write_history_csv
from . import io
from .config import CHAINS, SCENARIOS, ExperimentConfig, read_config
from .runner import apply_chain, run_experiment, true_covariance

log = logging.getLogger("toepcov")


def _emit_matrix(m, out):
    if out:
        io.write_matrix(m, out)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(io.format_matrix(m))


def _load_sample(path, t):
    """Snapshot file -> sample covariance; Hermitian matrix file -> needs ``t``."""
    kind, data = io.read_any_matrix(path)
    if kind == "complex_matrix":
        return sample_covariance(data)
    if t is None:
        raise SystemExit(f"{path}: a sample matrix file needs --t (snapshot count)")
    return SampleCovariance(data, t)


def _base_config(args):
    cfg = read_config(args.config) if getattr(args, "config", None) else ExperimentConfig()
    changes = {}
    for name in ("seed", "trials", "threads", "n", "t"):
        value = getattr(args, name, None)
        if value is not None:
            changes[name] = value
    n = changes.get("n", cfg.n)
    if cfg.spiked_noise_dim >= n:  # keep the default valid for small arrays
        changes["spiked_noise_dim"] = max(n - 1, 0)
    return cfg.replace(**changes) if changes else cfg


# --- commands -----------------------------------------------------------------


def cmd_model(args):
    cfg = _base_config(args)
    if args.scenario:
        scenario = {"kind": args.scenario}
        if args.scenario == "clutter" and args.spacing_ratio is not None:
            scenario["spacing_ratio"] = args.spacing_ratio
        if args.noise_power is not None and args.scenario != "identity":
            scenario["noise_power"] = args.noise_power
        cfg = cfg.replace(scenario=scenario)
    _emit_matrix(true_covariance(cfg), args.out)
    return 0


def cmd_simulate(args):
    cfg = _base_config(args)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        cfg = cfg.replace(
            trials_csv=str(out / "trials.csv"),
            summary_json=str(out / "summary.json"),
            histogram_dir=str(out / "histograms"),
        )
    result = run_experiment(cfg)
    s = result.summary
    print(f"chain={cfg.chain} n={cfg.n} t={cfg.t} trials={s['trials']} "
          f"failed={s['failed_trials']}")
    print(f"negative lambda_min fraction: {s['negative_lambda_min_fraction']:.4f}")
    for key, value in s["medians"].items():
        print(f"median {key}: {value:.6g}")
    if s["noise_dim_counts"]:
        print("noise dims:", json.dumps(s["noise_dim_counts"]))
    return 0


def cmd_estimate(args):
    cfg = _base_config(args)
    changes = {"chain": args.chain} if args.chain else {}
    sample = _load_sample(args.input, args.t)
    changes["n"], changes["t"] = sample.n, sample.t
    if args.noise_dim is not None:
        changes["noise_dim"] = args.noise_dim
    cfg = cfg.replace(**changes)
    truth = io.read_matrix(args.truth) if args.truth else None
    estimate, info = apply_chain(cfg, sample, truth)
    ev = np.linalg.eigvalsh(estimate)
    log.info("chain %s: lambda_min=%.6g noise_dim=%d flags=%s",
             cfg.chain, ev[0], info["noise_dim"], ",".join(info["flags"]) or "-")
    _emit_matrix(estimate, args.out)
    return 0


def cmd_reconstruct(args):
    m = io.read_matrix(args.input)
    rec = me_reconstruction(m)
    log.info("inside roots flipped: %d, Toeplitz deviation before averaging: %.3e",
             rec.prediction.inside_count, rec.toeplitz_deviation)
    _emit_matrix(rec.matrix, args.out)
    return 0


def cmd_toiep(args):
    sample = _load_sample(args.input, args.t)
    n, t = sample.n, sample.t
    lam = np.clip(np.linalg.eigvalsh(sample.matrix), 0.0, None)
    if args.noise_dim is None:
        ref = reference_sphericity(n, t, args.reference_trials, args.seed,
                                   threads=args.threads)
        noise_dim = select_noise_dim(lam[::-1], t, ref)
    else:
        noise_dim = args.noise_dim
    corr = mestre_correct(lam, t, SubspacePartition.noise_cluster(n, noise_dim))
    lags = redundancy_average(sample.matrix)
    start = rectify_loading(lags, corr.smallest)
    truth = io.read_matrix(args.truth) if args.truth else None
    opts = ToiepOptions(max_iterations=args.iterations)
    state = solve(redundancy_average(start.matrix), corr.target_spectrum(), sample,
                  opts, reference=truth, noise_dim=args.spiked_noise_dim or None)
    hist = state.history
    print(f"noise_dim={noise_dim} loading={start.loading:.6g} "
          f"iterations={state.iteration} eigen_distance "
          f"{hist[0]['eigen_distance']:.6g} -> {hist[-1]['eigen_distance']:.6g}")
    if args.out:
        write_history_csv(hist, args.out)
        log.info("wrote %s", args.out)
    if args.matrix_out:
        io.write_matrix(state.matrix(), args.matrix_out)
    return 0


def cmd_lr(args):
    candidate = io.read_matrix(args.candidate)
    sample = _load_sample(args.sample, args.t)
    rows = []
    rep = sphericity(candidate, sample)
    rows.append(("regular", rep.log_lr))
    if args.spiked_noise_dim:
        m_signal = sample.n - args.spiked_noise_dim
        rows.append(("spiked", spiked_sphericity(candidate, m_signal, sample).log_lr))
    if args.truth:
        truth = io.read_matrix(args.truth)
        rows.append(("spectral_norm_error", spectral_norm(candidate - truth)))
    for name, value in rows:
        if name == "spectral_norm_error":
            print(f"{name}: {value:.6g}")
        else:
            lr = math.exp(value) if value > -745 else 0.0
            print(f"{name}: log_lr={value:.6g} lr={lr:.6g}")
    return 0


def cmd_refpdf(args):
    if args.cache_dir:
        ref = cached_reference(args.n, args.t, args.trials, args.seed, args.cache_dir,
                               threads=args.threads)
    else:
        ref = reference_sphericity(args.n, args.t, args.trials, args.seed,
                                   threads=args.threads)
    if args.out:
        ref.save(args.out)
    print(f"n={ref.n} t={ref.t} trials={ref.trials} excluded={ref.excluded} "
          f"median_log_lr={ref.median():.6g} median_lr={math.exp(ref.median()):.6g}")
    return 0


# --- parser ---------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="toepcov",
        description="Toeplitz covariance estimation experiments.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    verbose = argparse.ArgumentParser(add_help=False)
    verbose.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, **kw):
        return sub.add_parser(name, parents=[verbose], **kw)

    def common(p, trials=False):
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output path")
        p.add_argument("--threads", type=int)
        if trials:
            p.add_argument("--trials", type=int)

    p = command("model", help="write a scenario covariance matrix")
    common(p)
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--n", type=int)
    p.add_argument("--spacing-ratio", type=float, help="element spacing / wavelength")
    p.add_argument("--noise-power", type=float)
    p.set_defaults(func=cmd_model)

    p = command("simulate", help="run a Monte Carlo experiment")
    common(p, trials=True)
    p.set_defaults(func=cmd_simulate)

    p = command("estimate", help="apply one estimator chain")
    common(p)
    p.add_argument("input", help="snapshot (complex_matrix) or sample matrix file")
    p.add_argument("--t", type=int, help="snapshot count for a sample matrix file")
    p.add_argument("--chain", choices=CHAINS)
    p.add_argument("--noise-dim", type=int, help="fixed noise cluster size")
    p.add_argument("--truth", help="true covariance file, for replace(true)")
    p.set_defaults(func=cmd_estimate)

    p = command("reconstruct", help="ME-spectrum Toeplitz reconstruction")
    common(p)
    p.add_argument("input", help="Hermitian p.d. matrix file")
    p.set_defaults(func=cmd_reconstruct)

    p = command("toiep", help="Newton refinement with a convergence CSV")
    p.add_argument("input", help="snapshot or sample matrix file")
    p.add_argument("--t", type=int)
    p.add_argument("--seed", type=int, default=1, help="reference pdf seed")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="convergence CSV")
    p.add_argument("--matrix-out", help="final iterate")
    p.add_argument("--iterations", type=int, default=5000)
    p.add_argument("--noise-dim", type=int, help="default: Expected-Likelihood choice")
    p.add_argument("--spiked-noise-dim", type=int, default=4)
    p.add_argument("--reference-trials", type=int, default=1000)
    p.add_argument("--truth", help="true covariance, for the spectral-norm column")
    p.set_defaults(func=cmd_toiep)

    p = command("lr", help="sphericity likelihood ratios")
    p.add_argument("candidate", help="candidate covariance matrix file")
    p.add_argument("sample", help="snapshot or sample matrix file")
    p.add_argument("--t", type=int)
    p.add_argument("--spiked-noise-dim", type=int, default=4)
    p.add_argument("--truth", help="also report the spectral-norm error")
    p.set_defaults(func=cmd_lr)

    p = command("refpdf", help="null pdf of the sphericity ratio")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--cache-dir")
    p.set_defaults(func=cmd_refpdf)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ToepcovError, OSError, ValueError) as exc:
        print(f"toepcov {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
