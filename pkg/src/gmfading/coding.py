"""Random Gaussian codebooks and information-density threshold decoding.

Two ways to estimate the error rate of the threshold decoder:

* ``explicit``: one codebook is drawn per run and every codeword is scored
  against each received block.
* ``ensemble``: for codebooks too large to store, each trial draws its own
  transmitted codeword and the chance that any of the remaining ``M - 1``
  independent codewords crosses the threshold is computed as
  ``1 - (1 - p)**(M - 1)``. The single-codeword exceedance probability ``p``
  is estimated by importance sampling from the Gaussian posterior
  ``p(t | z, G)``. The posterior is the input law tilted by ``2**i``, so each
  sample carries weight ``2**-i``. The estimate is the random-coding ensemble
  average error of the same decoder.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .capacity import InputCovariance, phi_mc
from .channel import ChannelParams, apply_channel, sample_gain_batch, sample_gain_sequence
from .errors import DimensionMismatch, InvalidParams, RejectionExhausted
from .infodensity import info_density_batch
from .linalg import LOG2E, cholesky_psd, complex_normal
from .rng import as_seed, run_chunks, substream

MAX_CODEBOOK = 1 << 20
EXPLICIT_LIMIT = 1 << 12
MAX_ATTEMPTS = 100
TRIAL_CHUNK = 64
_TAG_BOOK = 41
_TAG_TRIALS = 42
_TAG_CAP = 43
_TAG_PE = 44


def codebook_size(rate_bits: float, n: int) -> int:
    """max(1, ceil(2**(n * rate_bits)))."""
    if rate_bits < 0:
        raise InvalidParams("rate_bits must be >= 0")
    x = n * rate_bits
    if x > 1000:
        raise InvalidParams(f"n * rate = {x:.1f} bits is beyond the simulable range")
    # guard against 2**3.0000000000004 rounding up to 9
    return max(1, math.ceil(2.0 ** x * (1 - 1e-12)))


def _power_ok(T, power):
    """Per-codeword membership in the average power constraint set."""
    n = T.shape[-2]
    return np.sum(T.real ** 2 + T.imag ** 2, axis=(-1, -2)) / n <= power


def sample_codewords(q, power: float, count: int, n: int, rng,
                     max_attempts: int = MAX_ATTEMPTS):
    """Draw ``count`` CN(0, q) codewords of shape (n, nt), rejecting power violators.

    Returns (codewords, rejections).
    """
    L = cholesky_psd(q)
    nt = L.shape[0]
    out = complex_normal(rng, (count, n, nt)) @ L.T
    bad = np.flatnonzero(~_power_ok(out, power))
    rejections = 0
    attempts = 1
    while bad.size:
        if attempts >= max_attempts:
            raise RejectionExhausted(
                f"{bad.size} codewords still violate the power constraint after "
                f"{max_attempts} attempts; tr(q) is too close to the budget for n={n}"
            )
        rejections += bad.size
        out[bad] = complex_normal(rng, (bad.size, n, nt)) @ L.T
        bad = bad[~_power_ok(out[bad], power)]
        attempts += 1
    return out, rejections


@dataclass(frozen=True, eq=False)
class Codebook:
    codewords: np.ndarray  # (size, n, nt)
    rate_bits: float
    n: int
    q: np.ndarray
    power: float
    rejections: int = 0

    def __post_init__(self):
        if self.codewords.shape[0] != codebook_size(self.rate_bits, self.n):
            raise InvalidParams("codebook size does not match the rate")
        if not np.all(_power_ok(self.codewords, self.power)):
            raise AssertionError("codeword outside the average power constraint")

    def __len__(self):
        return self.codewords.shape[0]


def build_codebook(rate_bits: float, n: int, q, params: ChannelParams, rng=None) -> Codebook:
    q = np.asarray(q.q if isinstance(q, InputCovariance) else q, dtype=np.complex128)
    InputCovariance(q, params.power)
    size = codebook_size(rate_bits, n)
    if size > MAX_CODEBOOK:
        raise InvalidParams(
            f"codebook of {size} words exceeds the {MAX_CODEBOOK} limit; "
            "use the ensemble simulator for this rate"
        )
    r = rng if isinstance(rng, np.random.Generator) else substream(as_seed(rng), _TAG_BOOK)
    words, rejections = sample_codewords(q, params.power, size, n, r)
    return Codebook(words, float(rate_bits), int(n), q, float(params.power), rejections)


def _gains_of(gain_seq):
    return np.asarray(getattr(gain_seq, "gains", gain_seq), dtype=np.complex128)


def _output_constant(Z, G, q, sigma2):
    logdet, quad = kernels.output_terms(G, Z, q, sigma2)
    return float(np.sum(logdet) + LOG2E / sigma2 * np.sum(quad))


def codeword_densities(z_seq, gain_seq, book: Codebook, sigma2: float) -> np.ndarray:
    """Block information density of every codeword against one received block."""
    G = _gains_of(gain_seq)
    Z = np.asarray(z_seq, dtype=np.complex128)
    if G.shape[0] != book.n or Z.shape != (book.n, G.shape[1]) or G.shape[2] != book.q.shape[0]:
        raise DimensionMismatch(
            f"received block {Z.shape} / gains {G.shape} do not fit codebook n={book.n}"
        )
    if not sigma2 > 0:
        raise InvalidParams("sigma2 must be > 0")
    const = _output_constant(Z, G, book.q, sigma2)
    return const - LOG2E / sigma2 * kernels.codebook_residuals(G, Z, book.codewords)


def threshold_decode(z_seq, gain_seq, book: Codebook, threshold_bits: float, sigma2: float):
    """Index of the unique codeword whose density exceeds the threshold, else None."""
    above = np.flatnonzero(codeword_densities(z_seq, gain_seq, book, sigma2) > threshold_bits)
    return int(above[0]) if above.size == 1 else None


@dataclass(frozen=True)
class CodingResult:
    rate_bits: float
    n: int
    codebook_size: int
    trials: int
    errors: int
    error_rate: float
    gamma: float
    capacity_bits: float
    mode: str
    seed: int

    @property
    def stderr(self) -> float:
        p = self.error_rate
        return float(np.sqrt(p * (1 - p) / self.trials))


def default_gamma(capacity_bits: float, rate_bits: float) -> float:
    return max((capacity_bits - rate_bits) / 4.0, 0.01)


def _explicit_trials(params, book, threshold, seed, trials, threads):
    def chunk(r, size):
        errs = np.zeros(size, dtype=bool)
        for k in range(size):
            msg = int(r.integers(len(book)))
            seq = sample_gain_sequence(params, book.n, r)
            z = apply_channel(seq.gains, book.codewords[msg], params.sigma2, r)
            errs[k] = threshold_decode(z, seq, book, threshold, params.sigma2) != msg
        return errs

    return run_chunks(chunk, trials, TRIAL_CHUNK, seed, _TAG_TRIALS, threads)


def _posterior_factors(G, q, sigma2):
    """Mean map and covariance square root of T given (Z, G) for T ~ CN(0, q)."""
    GH = np.conj(np.swapaxes(G, -1, -2))
    nr = G.shape[-2]
    A = G @ q @ GH + sigma2 * np.eye(nr)
    K = np.swapaxes(np.linalg.solve(A, G @ q), -1, -2).conj()  # q G^H A^{-1}
    S = q - K @ G @ q
    S = 0.5 * (S + np.conj(np.swapaxes(S, -1, -2)))
    lam, V = np.linalg.eigh(S)
    return K, V * np.sqrt(np.maximum(lam, 0.0))[..., None, :]


def _wrong_codeword_probability(p_single, size):
    """1 - (1 - p)**(size - 1) without overflow for astronomically large ``size``."""
    if size <= 1:
        return np.zeros_like(p_single)
    log_m1 = math.log(size - 1)
    with np.errstate(divide="ignore"):
        x = np.exp(log_m1 + np.log(-np.log1p(-np.minimum(p_single, 1.0 - 1e-16))))
    return -np.expm1(-x)


def _ensemble_trials(params, q, size, n, threshold, seed, trials, threads, is_samples, p_in):
    s2 = params.sigma2
    P = params.power

    def chunk(r, m):
        T, _ = sample_codewords(q, P, m, n, r)
        gains, _ = sample_gain_batch(params, n, m, r)
        Z = apply_channel(gains, T, s2, r)
        i_true = info_density_batch(T, Z, gains, q, s2).sum(axis=1)
        errs = i_true <= threshold
        # codeword-independent part of every block density
        nr, nt = params.n_rx, params.n_tx
        ld, quad = kernels.output_terms(gains.reshape(-1, nr, nt), Z.reshape(-1, nr), q, s2)
        const = (ld + LOG2E / s2 * quad).reshape(m, n).sum(axis=1)
        K, F = _posterior_factors(gains, q, s2)
        mu = np.einsum("bitr,bir->bit", K, Z)
        u = complex_normal(r, (m, is_samples, n, nt))
        Tp = mu[:, None] + np.einsum("bitk,bsik->bsit", F, u)
        resid = Z[:, None] - np.einsum("birt,bsit->bsir", gains, Tp)
        i_post = const[:, None] - LOG2E / s2 * np.sum(resid.real ** 2 + resid.imag ** 2, axis=(2, 3))
        inside = _power_ok(Tp, P)
        w = np.where((i_post > threshold) & inside, np.exp2(-np.maximum(i_post, threshold)), 0.0)
        p_single = w.mean(axis=1) / p_in
        p_wrong = _wrong_codeword_probability(p_single, size)
        draw = r.random(m)
        return errs | (draw < p_wrong)

    return run_chunks(chunk, trials, TRIAL_CHUNK, seed, _TAG_TRIALS, threads)


def power_constraint_probability(q, power, n, samples, rng) -> float:
    """P[(1/n) sum ||T_i||^2 <= power] for T_i i.i.d. CN(0, q)."""
    L = cholesky_psd(q)
    T = complex_normal(rng, (samples, n, L.shape[0])) @ L.T
    return float(np.mean(_power_ok(T, power)))


def simulate_error_probability(params: ChannelParams, rate_bits: float, n: int, trials: int,
                               rng=None, q=None, gamma: float | None = None,
                               mode: str = "auto", capacity_bits: float | None = None,
                               capacity_samples: int = 100_000, is_samples: int = 32,
                               threads=None) -> CodingResult:
    """Error rate of the threshold decoder at threshold (rate + gamma) * n bits.

    Erasures (no codeword or several above threshold) count as errors.
    """
    params.require_noise()
    if trials < 1:
        raise InvalidParams("trials must be >= 1")
    if mode not in ("auto", "explicit", "ensemble"):
        raise InvalidParams(f"unknown mode {mode!r}")
    seed = as_seed(rng)
    if q is None:
        q = InputCovariance.isotropic(params).q
    q = np.asarray(q.q if isinstance(q, InputCovariance) else q, dtype=np.complex128)
    InputCovariance(q, params.power)

    if capacity_bits is None:
        capacity_bits = phi_mc(q, params, capacity_samples,
                               substream(seed, _TAG_CAP).integers(1 << 63), threads).value
    if gamma is None:
        gamma = default_gamma(capacity_bits, rate_bits)
    size = codebook_size(rate_bits, n)
    threshold = (rate_bits + gamma) * n
    if mode == "auto":
        mode = "explicit" if size <= EXPLICIT_LIMIT else "ensemble"

    if mode == "explicit":
        book = build_codebook(rate_bits, n, q, params, substream(seed, _TAG_BOOK))
        errs = _explicit_trials(params, book, threshold, seed, trials, threads)
    else:
        p_in = power_constraint_probability(q, params.power, n, 20_000, substream(seed, _TAG_PE))
        errs = _ensemble_trials(params, q, size, n, threshold, seed, trials, threads,
                                is_samples, p_in)

    errors = int(np.count_nonzero(errs))
    return CodingResult(
        rate_bits=float(rate_bits),
        n=int(n),
        codebook_size=size,
        trials=int(trials),
        errors=errors,
        error_rate=errors / trials,
        gamma=float(gamma),
        capacity_bits=float(capacity_bits),
        mode=mode,
        seed=seed,
    )
