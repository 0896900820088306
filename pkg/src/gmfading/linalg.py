"""Complex Hermitian linear algebra and circularly-symmetric Gaussian draws.

Matrices are plain complex128 numpy arrays. Log-determinants are in bits.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NotPd, NotPsd

LOG2E = 1.0 / np.log(2.0)
HERMITIAN_ATOL = 1e-12


def _square(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def hermitian(m, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Validate ``m`` as Hermitian and return a copy with an exactly real diagonal."""
    m = _square(m)
    if not np.allclose(m, m.conj().T, rtol=0.0, atol=atol):
        raise ValueError("matrix is not Hermitian")
    out = 0.5 * (m + m.conj().T)
    out[np.diag_indices_from(out)] = out.diagonal().real
    return out


def cholesky_psd(m, tol: float = 1e-10) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L^H == m`` for Hermitian PSD ``m``.

    Pivots whose magnitude is within ``tol * max(diag)`` are treated as zero and
    their column is dropped, so rank-deficient covariances factor cleanly.
    """
    m = _square(m)
    d = m.shape[0]
    scale = max(float(np.max(m.diagonal().real)), 0.0) if d else 0.0
    cutoff = tol * scale
    L = np.zeros_like(m)
    for j in range(d):
        pivot = m[j, j].real - np.vdot(L[j, :j], L[j, :j]).real
        if pivot < -cutoff:
            raise NotPsd(f"pivot {pivot:.3e} at index {j} is negative")
        if pivot <= cutoff:
            continue
        ljj = np.sqrt(pivot)
        L[j, j] = ljj
        if j + 1 < d:
            L[j + 1:, j] = (m[j + 1:, j] - L[j + 1:, :j] @ L[j, :j].conj()) / ljj
    return L


def logdet_hermitian_pd(m) -> float:
    """log2 det(m) from the Cholesky diagonal."""
    m = _square(m)
    try:
        L = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPd("matrix is not positive definite") from exc
    diag = L.diagonal().real
    if np.any(diag <= 0.0):
        raise NotPd("matrix is not positive definite")
    return float(2.0 * np.sum(np.log2(diag)))


def project_simplex_capped(lam: np.ndarray, p: float) -> np.ndarray:
    """Nearest point to ``lam`` in {x >= 0, sum(x) <= p}."""
    if p <= 0:
        return np.zeros_like(lam)
    clipped = np.maximum(lam, 0.0)
    if clipped.sum() <= p:
        return clipped
    u = np.sort(lam)[::-1]
    cssv = np.cumsum(u) - p
    ind = np.arange(1, len(u) + 1)
    rho = np.count_nonzero(u - cssv / ind > 0)
    theta = cssv[rho - 1] / rho
    return np.maximum(lam - theta, 0.0)


def project_psd_trace(m, p: float) -> np.ndarray:
    """Frobenius projection onto {Q >= 0, tr Q <= p}."""
    m = _square(m)
    m = 0.5 * (m + m.conj().T)
    lam, V = np.linalg.eigh(m)
    lam = project_simplex_capped(lam, p)
    out = (V * lam) @ V.conj().T
    out = 0.5 * (out + out.conj().T)
    out[np.diag_indices_from(out)] = out.diagonal().real
    return out


def operator_norm(m, rtol: float = 1e-10, max_iter: int = 100_000) -> float:
    """Largest singular value by power iteration on ``m^H m``.

    Stops once the eigen-residual of the Rayleigh quotient drops below
    ``rtol`` relative to the estimate.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {m.shape}")
    if m.size == 0 or not np.any(m):
        return 0.0
    B = m.conj().T @ m
    start = np.random.default_rng(0x5EED)
    v = start.standard_normal(B.shape[0]) + 1j * start.standard_normal(B.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = B @ v
        lam = np.vdot(v, w).real
        resid = np.linalg.norm(w - lam * v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        if resid <= rtol * lam:
            break
        v = w / nw
    return float(np.sqrt(max(lam, 0.0)))


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """i.i.d. CN(0, 1) entries: real and imaginary parts each of variance 1/2."""
    shape = tuple(np.atleast_1d(shape))
    raw = rng.standard_normal(shape + (2,))
    return raw.view(np.complex128)[..., 0] * np.sqrt(0.5)


def sample_complex_gaussian(k, rng: np.random.Generator, size=None, factor=None):
    """Draw from CN(0, k). Returns shape (dim,) or (size, dim).

    ``factor`` may carry a precomputed ``cholesky_psd(k)``.
    """
    L = cholesky_psd(k) if factor is None else factor
    d = L.shape[0]
    if size is None:
        return L @ complex_normal(rng, d)
    u = complex_normal(rng, (size, d))
    return u @ L.T


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    M = complex_normal(rng, (dim, dim))
    return 0.5 * (M + M.conj().T)


def random_pd(rng: np.random.Generator, dim: int, margin: float = 0.1) -> np.ndarray:
    A = random_hermitian(rng, dim)
    shift = abs(np.linalg.eigvalsh(A)[0]) + margin
    return A + shift * np.eye(dim)
