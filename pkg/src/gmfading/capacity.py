"""Monte Carlo evaluation and maximisation of E[log2 det(I + G Q G^H / sigma2)]."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import kernels
from .channel import ChannelParams, sample_gain_matrices
from .errors import DimensionMismatch, InvalidParams
from .linalg import LOG2E, hermitian, project_psd_trace
from .rng import as_seed, run_chunks, substream

PHI_CHUNK = 8192
_TAG_PHI = 11
_TAG_POOL = 12
_TAG_FRESH = 13

FEASIBILITY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class InputCovariance:
    """Hermitian PSD input covariance with trace at most ``power``."""

    q: np.ndarray
    power: float | None = None

    def __post_init__(self):
        q = hermitian(self.q)
        lam_min = np.linalg.eigvalsh(q)[0] if q.size else 0.0
        if lam_min < -FEASIBILITY_TOL:
            raise InvalidParams(f"input covariance not PSD (min eigenvalue {lam_min:.3e})")
        if self.power is not None and np.trace(q).real > self.power + FEASIBILITY_TOL:
            raise InvalidParams(
                f"trace {np.trace(q).real:.6g} exceeds power budget {self.power:.6g}"
            )
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @classmethod
    def isotropic(cls, params: ChannelParams) -> "InputCovariance":
        return cls(params.power / params.n_tx * np.eye(params.n_tx), params.power)

    @property
    def trace(self) -> float:
        return float(np.trace(self.q).real)


@dataclass(frozen=True)
class McEstimate:
    value: float
    stderr: float
    samples: int
    seed: int

    @classmethod
    def from_samples(cls, x: np.ndarray, seed: int) -> "McEstimate":
        x = np.asarray(x, dtype=float)
        se = float(np.std(x, ddof=1) / np.sqrt(x.size)) if x.size > 1 else 0.0
        return cls(float(np.mean(x)), se, int(x.size), seed)


def _as_q(q, params: ChannelParams) -> np.ndarray:
    if isinstance(q, InputCovariance):
        q = q.q
    q = np.asarray(q, dtype=np.complex128)
    if q.shape != (params.n_tx, params.n_tx):
        raise DimensionMismatch(f"q must be {params.n_tx}x{params.n_tx}, got {q.shape}")
    return q


def _system_matrices(q, gains, sigma2):
    nr = gains.shape[-2]
    return np.eye(nr) + gains @ q @ np.conj(np.swapaxes(gains, -1, -2)) / sigma2


def logdet_values(q, params: ChannelParams, gains) -> np.ndarray:
    """log2 det(I + G q G^H / sigma2) for every gain in a (B, n_rx, n_tx) stack."""
    params.require_noise()
    q = _as_q(q, params)
    return kernels.logdet_batch(_system_matrices(q, np.asarray(gains), params.sigma2))


def phi_mc(q, params: ChannelParams, samples: int, rng=None, threads=None) -> McEstimate:
    """Sample-mean estimate of the capacity objective at input covariance ``q``."""
    params.require_noise()
    if samples < 1:
        raise InvalidParams("samples must be >= 1")
    q = _as_q(q, params)
    seed = as_seed(rng)

    def chunk(r, size):
        return logdet_values(q, params, sample_gain_matrices(params, size, r))

    vals = run_chunks(chunk, samples, PHI_CHUNK, seed, _TAG_PHI, threads)
    return McEstimate.from_samples(vals, seed)


def phi_gradient_mc(q, params: ChannelParams, gain_draws) -> np.ndarray:
    """Gradient in bits of the draw-averaged objective with respect to ``q``."""
    params.require_noise()
    q = _as_q(q, params)
    G = np.asarray(gain_draws, dtype=np.complex128)
    if G.ndim == 2:
        G = G[None]
    if G.shape[0] == 0:
        raise InvalidParams("gain_draws must be nonempty")
    s2 = params.sigma2
    X = np.linalg.solve(_system_matrices(q, G, s2), G)
    grad = LOG2E / s2 * np.mean(np.conj(np.swapaxes(G, -1, -2)) @ X, axis=0)
    return 0.5 * (grad + grad.conj().T)


@dataclass
class OptimizeOptions:
    draws: int = 4096
    max_iters: int = 500
    tol: float | None = None  # defaults to 1e-6 * power
    armijo: float = 1e-4
    min_step: float = 1e-12
    fresh_samples: int = 100_000
    q0: np.ndarray | None = None


@dataclass
class OptimizeResult:
    q: InputCovariance
    estimate: McEstimate
    iters: int
    converged: bool
    saa_value: float
    history: list = field(default_factory=list)


def optimize_capacity(params: ChannelParams, opts: OptimizeOptions | None = None,
                      rng=None, threads=None) -> OptimizeResult:
    """Projected gradient ascent on the sample-average objective.

    A fixed pool of ``opts.draws`` gains is used for every iterate so the
    objective is deterministic and Armijo backtracking guarantees ascent. The
    reported estimate uses fresh draws.
    """
    opts = opts or OptimizeOptions()
    params.require_noise()
    seed = as_seed(rng)
    P = params.power
    nt = params.n_tx

    if P == 0:
        q = InputCovariance(np.zeros((nt, nt)), 0.0)
        return OptimizeResult(q, McEstimate(0.0, 0.0, opts.fresh_samples, seed), 0, True, 0.0, [0.0])

    pool = sample_gain_matrices(params, opts.draws, substream(seed, _TAG_POOL))
    tol = opts.tol if opts.tol is not None else 1e-6 * P

    def objective(q):
        return float(np.mean(logdet_values(q, params, pool)))

    q = project_psd_trace(opts.q0 if opts.q0 is not None else P / nt * np.eye(nt), P)
    f = objective(q)
    history = [f]
    converged = False
    it = 0
    for it in range(1, opts.max_iters + 1):
        grad = phi_gradient_mc(q, params, pool)
        step = 1.0
        accepted = False
        while step >= opts.min_step:
            q_new = project_psd_trace(q + step * grad, P)
            f_new = objective(q_new)
            if f_new >= f + opts.armijo * np.vdot(grad, q_new - q).real:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            # no ascent step along the projected gradient arc: stationary
            converged = True
            break
        move = np.linalg.norm(q_new - q)
        q, f = q_new, f_new
        history.append(f)
        if move <= tol:
            converged = True
            break

    estimate = phi_mc(q, params, opts.fresh_samples, substream(seed, _TAG_FRESH).integers(1 << 63), threads)
    return OptimizeResult(InputCovariance(q, P), estimate, it, converged, f, history)


def siso_capacity_closed_form(rho: float) -> float:
    """E[log2(1 + rho |g|^2)] for g ~ CN(0, 1), by adaptive quadrature."""
    if not rho > 0:
        raise InvalidParams("rho must be > 0")
    val, _ = integrate.quad(
        lambda x: np.log1p(rho * x) * np.exp(-x), 0.0, np.inf, epsabs=1e-12, epsrel=1e-12
    )
    return float(val * LOG2E)
