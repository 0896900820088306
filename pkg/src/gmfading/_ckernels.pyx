# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Mirrors ``_pykernels`` function for function."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, sqrt, NAN

cnp.import_array()

cdef double LN2 = 0.6931471805599453


def gauss_markov(innovations, double alpha):
    inn_c = np.ascontiguousarray(innovations, dtype=np.complex128)
    cdef Py_ssize_t B = inn_c.shape[0]
    cdef Py_ssize_t n = inn_c.shape[1]
    out = np.empty_like(inn_c)
    cdef const double[:, :, ::1] src = inn_c.reshape(B, n, -1).view(np.float64)
    cdef double[:, :, ::1] dst = out.reshape(B, n, -1).view(np.float64)
    cdef Py_ssize_t D = src.shape[2]
    cdef double a = sqrt(alpha)
    cdef double b = sqrt(1.0 - alpha)
    cdef Py_ssize_t k, i, j
    with nogil:
        for k in range(B):
            for j in range(D):
                dst[k, 0, j] = src[k, 0, j]
            for i in range(1, n):
                for j in range(D):
                    dst[k, i, j] = a * dst[k, i - 1, j] + b * src[k, i, j]
    return out


cdef inline bint _chol(double complex[:, ::1] A, Py_ssize_t d) noexcept nogil:
    # In-place lower Cholesky; returns False on a non-positive pivot.
    cdef Py_ssize_t i, j, k
    cdef double piv
    cdef double complex s
    for j in range(d):
        piv = A[j, j].real
        for k in range(j):
            piv -= A[j, k].real * A[j, k].real + A[j, k].imag * A[j, k].imag
        if not piv > 0.0:
            return False
        piv = sqrt(piv)
        A[j, j] = piv
        for i in range(j + 1, d):
            s = A[i, j]
            for k in range(j):
                s = s - A[i, k] * A[j, k].conjugate()
            A[i, j] = s / piv
    return True


def logdet_batch(A):
    Ac = np.array(A, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t B = Ac.shape[0]
    cdef Py_ssize_t d = Ac.shape[1]
    out = np.empty(B)
    cdef double complex[:, :, ::1] M = Ac
    cdef double[::1] res = out
    cdef Py_ssize_t k, j
    cdef double acc
    with nogil:
        for k in range(B):
            if _chol(M[k], d):
                acc = 0.0
                for j in range(d):
                    acc += log(M[k, j, j].real)
                res[k] = 2.0 * acc / LN2
            else:
                res[k] = NAN
    return out


def output_terms(G, Z, Q, double sigma2):
    Gc = np.ascontiguousarray(G, dtype=np.complex128)
    Zc = np.ascontiguousarray(Z, dtype=np.complex128)
    Qc = np.ascontiguousarray(Q, dtype=np.complex128)
    cdef Py_ssize_t B = Gc.shape[0]
    cdef Py_ssize_t nr = Gc.shape[1]
    cdef Py_ssize_t nt = Gc.shape[2]
    cdef const double complex[:, :, ::1] g = Gc
    cdef const double complex[:, ::1] z = Zc
    cdef const double complex[:, ::1] q = Qc
    gq_arr = np.empty((nr, nt), dtype=np.complex128)
    a_arr = np.empty((nr, nr), dtype=np.complex128)
    y_arr = np.empty(nr, dtype=np.complex128)
    cdef double complex[:, ::1] gq = gq_arr
    cdef double complex[:, ::1] a = a_arr
    cdef double complex[::1] y = y_arr
    logdet = np.empty(B)
    quad = np.empty(B)
    cdef double[::1] ld = logdet
    cdef double[::1] qd = quad
    cdef Py_ssize_t k, r, c, t, s
    cdef double complex acc
    cdef double inv_s2 = 1.0 / sigma2
    cdef double lacc, qacc
    cdef bint ok = True
    with nogil:
        for k in range(B):
            for r in range(nr):
                for c in range(nt):
                    acc = 0.0
                    for t in range(nt):
                        acc = acc + g[k, r, t] * q[t, c]
                    gq[r, c] = acc
            for r in range(nr):
                for c in range(r + 1):
                    acc = 0.0
                    for t in range(nt):
                        acc = acc + gq[r, t] * g[k, c, t].conjugate()
                    acc = acc * inv_s2
                    if r == c:
                        a[r, c] = 1.0 + acc.real
                    else:
                        a[r, c] = acc
            if not _chol(a, nr):
                ok = False
                break
            lacc = 0.0
            qacc = 0.0
            for r in range(nr):
                lacc += log(a[r, r].real)
                acc = z[k, r]
                for s in range(r):
                    acc = acc - a[r, s] * y[s]
                y[r] = acc / a[r, r].real
                qacc += y[r].real * y[r].real + y[r].imag * y[r].imag
            ld[k] = 2.0 * lacc / LN2
            qd[k] = qacc
    if not ok:
        raise np.linalg.LinAlgError("matrix is not positive definite")
    return logdet, quad


def residual_energy(G, T, Z):
    Gc = np.ascontiguousarray(G, dtype=np.complex128)
    Tc = np.ascontiguousarray(T, dtype=np.complex128)
    Zc = np.ascontiguousarray(Z, dtype=np.complex128)
    cdef Py_ssize_t B = Gc.shape[0]
    cdef Py_ssize_t nr = Gc.shape[1]
    cdef Py_ssize_t nt = Gc.shape[2]
    cdef const double complex[:, :, ::1] g = Gc
    cdef const double complex[:, ::1] tt = Tc
    cdef const double complex[:, ::1] z = Zc
    out = np.empty(B)
    cdef double[::1] res = out
    cdef Py_ssize_t k, r, c
    cdef double complex e
    cdef double acc
    with nogil:
        for k in range(B):
            acc = 0.0
            for r in range(nr):
                e = z[k, r]
                for c in range(nt):
                    e = e - g[k, r, c] * tt[k, c]
                acc += e.real * e.real + e.imag * e.imag
            res[k] = acc
    return out


def codebook_residuals(G, Z, book):
    Gc = np.ascontiguousarray(G, dtype=np.complex128)
    Zc = np.ascontiguousarray(Z, dtype=np.complex128)
    Bc = np.ascontiguousarray(book, dtype=np.complex128)
    cdef Py_ssize_t n = Gc.shape[0]
    cdef Py_ssize_t nr = Gc.shape[1]
    cdef Py_ssize_t nt = Gc.shape[2]
    cdef Py_ssize_t M = Bc.shape[0]
    cdef const double complex[:, :, ::1] g = Gc
    cdef const double complex[:, ::1] z = Zc
    cdef const double complex[:, :, ::1] cb = Bc
    out = np.empty(M)
    cdef double[::1] res = out
    cdef Py_ssize_t m, i, r, c
    cdef double complex e
    cdef double acc
    with nogil:
        for m in range(M):
            acc = 0.0
            for i in range(n):
                for r in range(nr):
                    e = z[i, r]
                    for c in range(nt):
                        e = e - g[i, r, c] * cb[m, i, c]
                    acc += e.real * e.real + e.imag * e.imag
            res[m] = acc
    return out
