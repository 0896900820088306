"""Command-line entry point: ``gmfading <subcommand> --config PATH``."""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bounds, channel, coding, infodensity
from .capacity import InputCovariance, OptimizeOptions, optimize_capacity, phi_mc
from .config import SUBCOMMANDS, ExperimentConfig, parse_config
from .errors import GMFadingError
from .rng import resolve_threads, substream

SCHEMAS = {
    "capacity": "ntx,nrx,alpha,power,sigma2,samples,seed,estimate_bits,stderr_bits",
    "optimize": "ntx,nrx,power,sigma2,iters,converged,capacity_bits,stderr_bits,trace_q",
    "infodensity": "n,alpha,trials,seed,mean_bits,phi_bits,var,kappa_fit",
    "lagcov": "alpha,lag,trials,cov,fit_cprime",
    "bounds": "rho,delta,n,trials,bound,empirical",
    "coding": "rate_bits,n,codebook,gamma,trials,errors,error_rate",
    "lemmas": "check,trials,violations,worst_margin",
}


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def write_csv(out_dir: Path, name: str, rows) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{name}.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCHEMAS[name].split(","))
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def _row_seed(seed: int, tag: int, idx: int) -> int:
    return int(substream(seed, tag, idx).integers(1 << 63))


def _capacity(cfg: ExperimentConfig):
    p = cfg.channel
    est = phi_mc(InputCovariance.isotropic(p), p, cfg.samples, cfg.seed, cfg.threads)
    print(f"capacity ntx={p.n_tx} nrx={p.n_rx} P={fmt(p.power)}: "
          f"{fmt(est.value)} ± {fmt(est.stderr)} bits")
    write_csv(cfg.out_dir, "capacity", [(p.n_tx, p.n_rx, p.alpha, p.power, p.sigma2,
                                        est.samples, est.seed, est.value, est.stderr)])
    return True


def _optimize(cfg: ExperimentConfig):
    p = cfg.channel
    opts = OptimizeOptions(draws=cfg.draws, max_iters=cfg.max_iters, tol=cfg.tol,
                           fresh_samples=cfg.samples)
    res = optimize_capacity(p, opts, cfg.seed, cfg.threads)
    print(f"optimize: {res.iters} iterations, converged={fmt(res.converged)}, "
          f"capacity {fmt(res.estimate.value)} ± {fmt(res.estimate.stderr)} bits, "
          f"tr(Q*)={fmt(res.q.trace)}")
    write_csv(cfg.out_dir, "optimize", [(p.n_tx, p.n_rx, p.power, p.sigma2, res.iters,
                                        res.converged, res.estimate.value,
                                        res.estimate.stderr, res.q.trace)])
    return True


def _infodensity(cfg: ExperimentConfig):
    rows, lag_rows = [], []
    idx = 0
    for alpha in cfg.alphas:
        p = replace(cfg.channel, alpha=alpha)
        q = InputCovariance.isotropic(p)
        for n in cfg.n_list:
            seed = _row_seed(cfg.seed, 1, idx)
            idx += 1
            s = infodensity.variance_experiment(p, q, n, cfg.trials, seed, cfg.threads,
                                                phi_samples=cfg.samples)
            print(f"infodensity alpha={fmt(alpha)} n={n}: mean {fmt(s.mean_bits)} "
                  f"(phi {fmt(s.phi_bits)}), var {fmt(s.var)}, var*n {fmt(s.kappa_fit)}")
            rows.append((n, alpha, s.trials, s.seed, s.mean_bits, s.phi_bits, s.var, s.kappa_fit))
        lags = sorted(set(cfg.lags))
        covs = infodensity.correlation_decay_experiment(
            p, q, lags, cfg.lag_trials, _row_seed(cfg.seed, 2, idx), cfg.threads)
        for c in covs:
            lag_rows.append((alpha, c.lag, cfg.lag_trials, c.cov, c.fit_cprime))
        print(f"lagcov alpha={fmt(alpha)}: fitted c'={fmt(covs[0].fit_cprime)}")
    write_csv(cfg.out_dir, "infodensity", rows)
    write_csv(cfg.out_dir, "lagcov", lag_rows)
    return True


def _bounds(cfg: ExperimentConfig):
    rows = []
    ok = True
    idx = 0
    for rho in cfg.rhos:
        for delta in cfg.deltas:
            for n in cfg.bound_n:
                r = bounds.power_tail_empirical(np.array([[rho]]), n, delta, cfg.bound_trials,
                                                _row_seed(cfg.seed, 3, idx), threads=cfg.threads)
                idx += 1
                ok &= r.holds
                print(f"bounds rho={fmt(rho)} delta={fmt(delta)} n={n}: empirical "
                      f"{fmt(r.empirical)} <= bound {fmt(r.bound)}: {fmt(r.holds)}")
                rows.append((rho, delta, n, r.trials, r.bound, r.empirical))
    write_csv(cfg.out_dir, "bounds", rows)
    return ok


def _coding(cfg: ExperimentConfig):
    p = cfg.channel
    rows = []
    for idx, rate in enumerate(cfg.rates):
        res = coding.simulate_error_probability(
            p, rate, cfg.coding_n, cfg.coding_trials, _row_seed(cfg.seed, 4, idx),
            gamma=cfg.gamma, mode=cfg.coding_mode, capacity_samples=cfg.samples,
            threads=cfg.threads)
        print(f"coding R={fmt(rate)} n={res.n} ({res.mode}): error rate {fmt(res.error_rate)} "
              f"({res.errors}/{res.trials}), C_hat {fmt(res.capacity_bits)}")
        rows.append((rate, res.n, res.codebook_size, res.gamma, res.trials, res.errors,
                     res.error_rate))
    write_csv(cfg.out_dir, "coding", rows)
    return True


def gain_oracle_check(n=64, alphas=(0.1, 0.5, 0.9), seed=0):
    """Worst relative gap between the recursion and both closed forms."""
    worst = 0.0
    for k, alpha in enumerate(alphas):
        p = channel.ChannelParams(2, 2, 1.0, 1.0, alpha)
        seq = channel.sample_gain_sequence(p, n, substream(seed, 5, k))
        for i in range(1, n + 1):
            ref = seq.gains[i - 1]
            scale = max(np.linalg.norm(ref), 1e-300)
            worst = max(worst, np.linalg.norm(channel.gain_closed_form(seq, alpha, i) - ref) / scale)
            for i1 in range(1, i):
                gap = np.linalg.norm(channel.two_index_form(seq, alpha, i1, i) - ref) / scale
                worst = max(worst, gap)
    return worst


def _lemmas(cfg: ExperimentConfig):
    rows = []
    rep = bounds.check_matrix_lemmas(cfg.lemma_trials, cfg.seed)
    for r in rep.lemmas:
        rows.append((r.name, r.trials, r.violations, r.worst_margin))
    gap = gain_oracle_check(seed=cfg.seed)
    rows.append(("gain_closed_forms", 3, int(gap > 1e-10), -gap))
    geo_worst = 0.0
    geo_bad = 0
    count = 0
    for alpha in (0.1, 0.5, 0.9):
        for n in (1, 2, 3, 10, 50, 100):
            lower, upper, bound = bounds.geometric_sum_bounds(alpha, n)
            closed = bounds.geometric_sum_closed_form(alpha, n)
            err = max(abs(lower - closed), abs(upper - closed))
            geo_bad += int(err > 1e-9)
            geo_worst = max(geo_worst, err)
            count += 1
    rows.append(("geometric_sums", count, geo_bad, -geo_worst))
    for name, trials, bad, margin in rows:
        print(f"lemma {name}: {bad} violations in {trials} trials, worst margin {fmt(margin)}")
    write_csv(cfg.out_dir, "lemmas", rows)
    return all(bad == 0 for _, _, bad, _ in rows)


RUNNERS = {
    "capacity": _capacity,
    "optimize": _optimize,
    "infodensity": _infodensity,
    "bounds": _bounds,
    "coding": _coding,
    "lemmas": _lemmas,
}


def run_experiment(cfg: ExperimentConfig) -> int:
    """Run the configured experiment; 0 on success, 1 if any check failed."""
    try:
        ok = RUNNERS[cfg.subcommand](cfg)
    except OSError as exc:
        print(f"error: {cfg.subcommand}: {exc}", file=sys.stderr)
        return 2
    except GMFadingError as exc:
        print(f"error: {cfg.subcommand}: {exc}", file=sys.stderr)
        return 2
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gmfading", description=__doc__)
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", required=True, type=Path)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", type=Path)
    ap.add_argument("--threads")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.config.read_text()
        cfg = parse_config(text, base_dir=args.config.parent)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GMFadingError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return 2
    cfg.subcommand = args.subcommand
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
            return 2
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out_dir = args.out
    if args.threads is not None:
        cfg.threads = resolve_threads(args.threads)
    return run_experiment(cfg)


if __name__ == "__main__":
    sys.exit(main())
