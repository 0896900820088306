"""Gauss-Markov gain process and the flat-fading MIMO channel z = G t + noise."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DimensionMismatch, IndexOutOfRange, InvalidOrder, InvalidParams
from .linalg import cholesky_psd, complex_normal, hermitian


@dataclass(frozen=True, eq=False)
class ChannelParams:
    n_tx: int
    n_rx: int
    sigma2: float
    power: float
    alpha: float
    gain_cov: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        problems = []
        if int(self.n_tx) < 1:
            problems.append("n_tx must be >= 1")
        if int(self.n_rx) < 1:
            problems.append("n_rx must be >= 1")
        if not self.sigma2 >= 0:
            problems.append("sigma2 must be >= 0")
        if not self.power >= 0:
            problems.append("power must be >= 0")
        if not 0.0 <= self.alpha < 1.0:
            problems.append("alpha must satisfy 0 <= alpha < 1")
        if problems:
            raise InvalidParams("; ".join(problems))
        d = int(self.n_tx) * int(self.n_rx)
        K = np.eye(d, dtype=np.complex128) if self.gain_cov is None else hermitian(self.gain_cov)
        if K.shape != (d, d):
            raise DimensionMismatch(f"gain_cov must be {d}x{d}, got {K.shape}")
        K.setflags(write=False)
        object.__setattr__(self, "gain_cov", K)
        # validates PSD once; raises NotPsd otherwise
        L = cholesky_psd(K)
        L.setflags(write=False)
        object.__setattr__(self, "_gain_factor", L)

    @property
    def gain_factor(self) -> np.ndarray:
        return self._gain_factor

    def require_noise(self):
        if not self.sigma2 > 0:
            raise InvalidParams("sigma2 must be > 0")


@dataclass(frozen=True, eq=False)
class GainSequence:
    """Gains G_1..G_n, shape (n, n_rx, n_tx), with the draws that produced them.

    ``innovations[0]`` is G_1 itself and ``innovations[i]`` is W_{i+1}.
    """

    gains: np.ndarray
    innovations: np.ndarray
    alpha: float

    def __len__(self):
        return self.gains.shape[0]


def sample_gain_matrices(params: ChannelParams, shape, rng) -> np.ndarray:
    """i.i.d. matrices with vec(G) ~ CN(0, K), vec taken column-major."""
    shape = tuple(np.atleast_1d(shape))
    d = params.n_rx * params.n_tx
    u = complex_normal(rng, shape + (d,))
    v = u @ params.gain_factor.T
    # column-major vec: entry (r, c) sits at c * n_rx + r
    G = v.reshape(shape + (params.n_tx, params.n_rx))
    return np.ascontiguousarray(np.swapaxes(G, -1, -2))


def sample_gain_batch(params: ChannelParams, n: int, trials: int, rng):
    """Return (gains, innovations), each of shape (trials, n, n_rx, n_tx)."""
    if n < 1:
        raise InvalidParams("block length must be >= 1")
    inn = sample_gain_matrices(params, (trials, n), rng)
    return kernels.gauss_markov(inn, params.alpha), inn


def sample_gain_sequence(params: ChannelParams, n: int, rng) -> GainSequence:
    gains, inn = sample_gain_batch(params, n, 1, rng)
    return GainSequence(gains=gains[0], innovations=inn[0], alpha=params.alpha)


def _check_index(seq: GainSequence, i: int):
    if not 1 <= i <= len(seq):
        raise IndexOutOfRange(f"index {i} outside 1..{len(seq)}")


def _check_alpha(alpha: float):
    if not 0.0 < alpha < 1.0:
        raise InvalidParams("closed forms require 0 < alpha < 1")


def gain_closed_form(seq: GainSequence, alpha: float, i: int) -> np.ndarray:
    """G_i from G_1 and W_2..W_i by the telescoped sum (1-based ``i``)."""
    _check_alpha(alpha)
    _check_index(seq, i)
    ra = np.sqrt(alpha)
    out = ra ** (i - 1) * seq.innovations[0]
    for j in range(2, i + 1):
        out = out + np.sqrt(1.0 - alpha) * ra ** (i - j) * seq.innovations[j - 1]
    return out


def two_index_form(seq: GainSequence, alpha: float, i1: int, i2: int) -> np.ndarray:
    """G_{i2} from G_{i1} and W_{i1+1}..W_{i2} (1-based indices, i1 < i2)."""
    _check_alpha(alpha)
    _check_index(seq, i1)
    _check_index(seq, i2)
    if i1 >= i2:
        raise InvalidOrder(f"need i1 < i2, got {i1} >= {i2}")
    ra = np.sqrt(alpha)
    out = ra ** (i2 - i1) * seq.gains[i1 - 1]
    for j in range(i1 + 1, i2 + 1):
        out = out + np.sqrt(1.0 - alpha) * ra ** (i2 - j) * seq.innovations[j - 1]
    return out


def apply_channel(gains, inputs, sigma2, rng) -> np.ndarray:
    """Batched z = G t + xi for gains (..., n_rx, n_tx) and inputs (..., n_tx)."""
    gains = np.asarray(gains)
    inputs = np.asarray(inputs, dtype=np.complex128)
    if inputs.shape[:-1] != gains.shape[:-2] or inputs.shape[-1] != gains.shape[-1]:
        raise DimensionMismatch(
            f"inputs {inputs.shape} do not match gains {gains.shape}"
        )
    z = np.einsum("...rt,...t->...r", gains, inputs)
    if sigma2 > 0:
        z = z + np.sqrt(sigma2) * complex_normal(rng, z.shape)
    return z


def transmit(seq: GainSequence, inputs, sigma2: float, rng) -> np.ndarray:
    """Channel outputs z_1..z_n, shape (n, n_rx)."""
    inputs = np.asarray(inputs, dtype=np.complex128)
    if inputs.ndim != 2 or inputs.shape[0] != len(seq):
        raise DimensionMismatch(
            f"expected {len(seq)} input vectors, got array of shape {inputs.shape}"
        )
    if sigma2 < 0:
        raise InvalidParams("sigma2 must be >= 0")
    return apply_channel(seq.gains, inputs, sigma2, rng)
