# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Cyclic Jacobi eigensolver for Hermitian matrices, compiled kernel.

Same sweep schedule, rotation formulas, and skip threshold as the NumPy
fallback in ``qmarg._jacobi_py``; see that module for the derivation.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def jacobi_eigh(a, int max_sweeps=100, double off_tol=1e-12, bint vectors=True):
    """Diagonalize a Hermitian matrix by cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvector columns or None, final off-diagonal
    norm, sweeps used). Eigenvalues are unsorted.
    """
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] A = np.array(a, dtype=np.complex128, copy=True, order="C")
    cdef Py_ssize_t n = A.shape[0]
    if A.shape[1] != n:
        raise ValueError("matrix must be square")
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] V
    if vectors:
        V = np.eye(n, dtype=np.complex128)
    else:
        V = np.empty((0, 0), dtype=np.complex128)

    cdef double fro = 0.0, off, threshold, skip, d2
    cdef double app, aqq, beta, tau, t, c, s
    cdef double complex apq, phase, sp, spc, xp, xq
    cdef Py_ssize_t p, q, k, sweeps

    for p in range(n):
        for q in range(n):
            apq = A[p, q]
            fro += apq.real * apq.real + apq.imag * apq.imag
    fro = sqrt(fro)
    if n < 2 or fro == 0.0:
        w0 = A.diagonal().real.copy()
        return w0, (V if vectors else None), 0.0, 0

    threshold = off_tol * fro
    skip = threshold / n
    sweeps = 0
    off = _off_norm(A, n)

    while off > threshold and sweeps < max_sweeps:
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                beta = sqrt(apq.real * apq.real + apq.imag * apq.imag)
                if beta <= skip:
                    continue
                app = A[p, p].real
                aqq = A[q, q].real
                phase = apq / beta
                tau = (aqq - app) / (2.0 * beta)
                if tau >= 0.0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                sp = s * phase
                spc = s * phase.conjugate()

                for k in range(n):
                    xp = A[k, p]
                    xq = A[k, q]
                    A[k, p] = c * xp - spc * xq
                    A[k, q] = sp * xp + c * xq
                for k in range(n):
                    xp = A[p, k]
                    xq = A[q, k]
                    A[p, k] = c * xp - sp * xq
                    A[q, k] = spc * xp + c * xq

                A[p, p] = app - t * beta
                A[q, q] = aqq + t * beta
                A[p, q] = 0.0
                A[q, p] = 0.0

                if vectors:
                    for k in range(n):
                        xp = V[k, p]
                        xq = V[k, q]
                        V[k, p] = c * xp - spc * xq
                        V[k, q] = sp * xp + c * xq
        sweeps += 1
        off = _off_norm(A, n)

    w = A.diagonal().real.copy()
    return w, (V if vectors else None), off, sweeps


cdef double _off_norm(cnp.complex128_t[:, :] A, Py_ssize_t n):
    cdef double acc = 0.0
    cdef Py_ssize_t i, j
    cdef double complex aij
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            aij = A[i, j]
            acc += aij.real * aij.real + aij.imag * aij.imag
    return sqrt(acc)
