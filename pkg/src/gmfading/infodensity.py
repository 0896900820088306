"""Information densities of the fading channel with receiver CSI, and the
Monte Carlo experiments on their mean, variance and lag correlation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .capacity import InputCovariance, logdet_values, phi_mc
from .channel import ChannelParams, GainSequence, apply_channel, sample_gain_batch
from .errors import DimensionMismatch, InvalidParams
from .linalg import LOG2E, cholesky_psd, complex_normal
from .rng import as_seed, run_chunks, substream

TRIAL_CHUNK = 256
_TAG_VAR = 21
_TAG_PHI = 22
_TAG_LAG = 23


@dataclass(frozen=True)
class InfoDensityStats:
    n: int
    alpha: float
    trials: int
    mean_bits: float
    mean_stderr: float
    var: float
    phi_bits: float
    phi_stderr: float
    kappa_fit: float
    seed: int


@dataclass(frozen=True)
class LagCovariance:
    lag: int
    cov: float
    stderr: float
    bound_shape: float
    fit_cprime: float


def _q_array(q):
    return np.asarray(q.q if isinstance(q, InputCovariance) else q, dtype=np.complex128)


def info_density_symbol(t, z, g, q, sigma2: float) -> float:
    """Per-symbol information density in bits, straight from the three-term formula."""
    if not sigma2 > 0:
        raise InvalidParams("sigma2 must be > 0")
    t = np.atleast_1d(np.asarray(t, dtype=np.complex128))
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    g = np.atleast_2d(np.asarray(g, dtype=np.complex128))
    q = np.atleast_2d(_q_array(q))
    nr, nt = g.shape
    if t.shape != (nt,) or z.shape != (nr,) or q.shape != (nt, nt):
        raise DimensionMismatch(
            f"shapes t{t.shape} z{z.shape} g{g.shape} q{q.shape} are inconsistent"
        )
    A = np.eye(nr) + g @ q @ g.conj().T / sigma2
    sign, ln_det = np.linalg.slogdet(A)
    r = z - g @ t
    noise = np.vdot(r, r).real
    out = np.vdot(z, np.linalg.solve(A, z)).real
    return float(ln_det * LOG2E - LOG2E / sigma2 * noise + LOG2E / sigma2 * out)


def info_density_batch(T, Z, G, q, sigma2: float) -> np.ndarray:
    """Vectorised per-symbol densities; T (..., nt), Z (..., nr), G (..., nr, nt)."""
    if not sigma2 > 0:
        raise InvalidParams("sigma2 must be > 0")
    G = np.asarray(G, dtype=np.complex128)
    T = np.asarray(T, dtype=np.complex128)
    Z = np.asarray(Z, dtype=np.complex128)
    lead = G.shape[:-2]
    nr, nt = G.shape[-2:]
    if T.shape != lead + (nt,) or Z.shape != lead + (nr,):
        raise DimensionMismatch(f"shapes T{T.shape} Z{Z.shape} G{G.shape} are inconsistent")
    Gf = G.reshape(-1, nr, nt)
    Tf = T.reshape(-1, nt)
    Zf = Z.reshape(-1, nr)
    logdet, quad = kernels.output_terms(Gf, Zf, _q_array(q), sigma2)
    noise = kernels.residual_energy(Gf, Tf, Zf)
    return (logdet + LOG2E / sigma2 * (quad - noise)).reshape(lead)


def info_density_sequence(t_seq, z_seq, gain_seq, q, sigma2: float) -> float:
    """Block information density: the sum of the per-symbol densities."""
    gains = gain_seq.gains if isinstance(gain_seq, GainSequence) else np.asarray(gain_seq)
    t_seq = np.asarray(t_seq, dtype=np.complex128)
    z_seq = np.asarray(z_seq, dtype=np.complex128)
    if not (len(t_seq) == len(z_seq) == len(gains)):
        raise DimensionMismatch(
            f"lengths differ: inputs {len(t_seq)}, outputs {len(z_seq)}, gains {len(gains)}"
        )
    return float(np.sum(info_density_batch(t_seq, z_seq, gains, q, sigma2)))


def sample_inputs(q, shape, rng) -> np.ndarray:
    """i.i.d. CN(0, q) input vectors of shape ``shape + (nt,)``."""
    L = cholesky_psd(_q_array(q))
    return complex_normal(rng, tuple(shape) + (L.shape[0],)) @ L.T


def normalized_density_trials(params: ChannelParams, q, n: int, trials: int, rng,
                              threads=None) -> np.ndarray:
    """i(T^n; Z^n, G^n) / n for ``trials`` independent blocks."""
    params.require_noise()
    q = _q_array(q)
    seed = as_seed(rng)

    def chunk(r, size):
        gains, _ = sample_gain_batch(params, n, size, r)
        T = sample_inputs(q, (size, n), r)
        Z = apply_channel(gains, T, params.sigma2, r)
        return info_density_batch(T, Z, gains, q, params.sigma2).sum(axis=1) / n

    return run_chunks(chunk, trials, TRIAL_CHUNK, seed, _TAG_VAR, threads)


def variance_experiment(params: ChannelParams, q, n: int, trials: int, rng=None,
                        threads=None, phi_samples: int = 100_000) -> InfoDensityStats:
    if trials < 100:
        raise InvalidParams("variance experiment needs at least 100 trials")
    if n < 1:
        raise InvalidParams("block length must be >= 1")
    seed = as_seed(rng)
    x = normalized_density_trials(params, q, n, trials, seed, threads)
    phi = phi_mc(q, params, phi_samples, substream(seed, _TAG_PHI).integers(1 << 63), threads)
    var = float(np.var(x, ddof=1))
    return InfoDensityStats(
        n=n,
        alpha=params.alpha,
        trials=trials,
        mean_bits=float(np.mean(x)),
        mean_stderr=float(np.sqrt(var / trials)),
        var=var,
        phi_bits=phi.value,
        phi_stderr=phi.stderr,
        kappa_fit=var * n,
        seed=seed,
    )


def correlation_decay_experiment(params: ChannelParams, q, lags, trials: int, rng=None,
                                 threads=None) -> list[LagCovariance]:
    """Covariance between per-symbol log-dets ``lag`` channel uses apart.

    The scale ``c'`` of the envelope ``c' * sqrt(alpha)**lag`` is fitted in the
    log domain over lags whose estimate is clearly nonzero. With alpha = 0 the
    envelope vanishes and ``c'`` is reported as 0.
    """
    params.require_noise()
    lags = [int(k) for k in lags]
    if not lags or min(lags) < 0:
        raise InvalidParams("lags must be a nonempty list of non-negative integers")
    if trials < 2:
        raise InvalidParams("need at least 2 trials")
    q = _q_array(q)
    seed = as_seed(rng)
    span = max(lags) + 1

    def chunk(r, size):
        gains, _ = sample_gain_batch(params, span, size, r)
        ld = logdet_values(q, params, gains.reshape(-1, params.n_rx, params.n_tx))
        return ld.reshape(size, span)

    ld = run_chunks(chunk, trials, 4096, seed, _TAG_LAG, threads)
    centred = ld - ld.mean(axis=0)
    rows = []
    for lag in lags:
        prod = centred[:, 0] * centred[:, lag]
        cov = float(prod.sum() / (trials - 1))
        se = float(np.std(prod, ddof=1) / np.sqrt(trials))
        rows.append((lag, cov, se))

    cprime = fit_envelope_scale(rows, params.alpha)
    ra = np.sqrt(params.alpha)
    return [LagCovariance(lag, cov, se, cprime * ra ** lag, cprime) for lag, cov, se in rows]


def _significant(rows):
    return [(lag, cov, se) for lag, cov, se in rows if lag >= 1 and abs(cov) > 2.0 * se]


def fit_envelope_scale(rows, alpha: float) -> float:
    """Least-squares log c' with the decay pinned to sqrt(alpha) per lag."""
    if alpha <= 0:
        return 0.0
    keep = _significant(rows)
    if not keep:
        return 0.0
    resid = [np.log(abs(cov)) - lag * 0.5 * np.log(alpha) for lag, cov, _ in keep]
    return float(np.exp(np.mean(resid)))


def fit_decay_ratio(lagcovs) -> float:
    """Per-lag decay factor of |cov| from an unconstrained log-linear fit."""
    rows = [(c.lag, c.cov, c.stderr) for c in lagcovs]
    keep = _significant(rows)
    if len(keep) < 2:
        raise InvalidParams("need at least two significant lags to fit a decay ratio")
    x = np.array([lag for lag, _, _ in keep], dtype=float)
    y = np.log(np.abs([cov for _, cov, _ in keep]))
    slope = np.polyfit(x, y, 1)[0]
    return float(np.exp(slope))
