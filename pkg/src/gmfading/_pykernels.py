"""Pure-numpy kernels. Same signatures and semantics as the compiled ``_ckernels``."""
import numpy as np

_LN2 = np.log(2.0)


def gauss_markov(innovations, alpha):
    """Run G_i = sqrt(a) G_{i-1} + sqrt(1-a) W_i along axis 1.

    ``innovations`` has shape (B, n, ...) with ``innovations[:, 0]`` holding G_1.
    """
    inn = np.ascontiguousarray(innovations, dtype=np.complex128)
    a = np.sqrt(alpha)
    b = np.sqrt(1.0 - alpha)
    gains = np.empty_like(inn)
    gains[:, 0] = inn[:, 0]
    for i in range(1, inn.shape[1]):
        gains[:, i] = a * gains[:, i - 1] + b * inn[:, i]
    return gains


def logdet_batch(A):
    """log2 det of each Hermitian PD matrix in a (B, d, d) stack; NaN where not PD."""
    A = np.asarray(A, dtype=np.complex128)
    out = np.full(A.shape[0], np.nan)
    if A.shape[0] == 0:
        return out
    try:
        L = np.linalg.cholesky(A)
        diag = np.diagonal(L, axis1=1, axis2=2).real
        return 2.0 * np.sum(np.log(diag), axis=1) / _LN2
    except np.linalg.LinAlgError:
        for k in range(A.shape[0]):
            try:
                diag = np.linalg.cholesky(A[k]).diagonal().real
                out[k] = 2.0 * np.sum(np.log(diag)) / _LN2
            except np.linalg.LinAlgError:
                pass
        return out


def output_terms(G, Z, Q, sigma2):
    """Per-symbol log2 det(I + G Q G^H / s2) and Z^H (I + G Q G^H / s2)^{-1} Z."""
    G = np.asarray(G, dtype=np.complex128)
    Z = np.asarray(Z, dtype=np.complex128)
    nr = G.shape[1]
    A = np.eye(nr) + (G @ Q @ np.conj(np.swapaxes(G, 1, 2))) / sigma2
    L = np.linalg.cholesky(A)
    logdet = 2.0 * np.sum(np.log(np.diagonal(L, axis1=1, axis2=2).real), axis=1) / _LN2
    y = np.linalg.solve(A, Z[..., None])[..., 0]
    quad = np.einsum("bi,bi->b", Z.conj(), y).real
    return logdet, quad


def residual_energy(G, T, Z):
    """||Z_b - G_b T_b||^2 for each row of the batch."""
    G = np.asarray(G, dtype=np.complex128)
    r = np.asarray(Z) - np.einsum("brt,bt->br", G, T)
    return np.einsum("br,br->b", r.conj(), r).real


def codebook_residuals(G, Z, book):
    """sum_i ||Z_i - G_i t_{m,i}||^2 for every codeword m of ``book`` (M, n, Nt)."""
    G = np.asarray(G, dtype=np.complex128)
    book = np.asarray(book, dtype=np.complex128)
    r = np.asarray(Z)[None] - np.einsum("irt,mit->mir", G, book)
    return np.einsum("mir,mir->m", r.conj(), r).real
