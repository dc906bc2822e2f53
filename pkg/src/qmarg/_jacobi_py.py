"""Cyclic Jacobi eigensolver for Hermitian matrices, NumPy implementation.

Reference implementation and import-time fallback for the compiled kernel in
``qmarg._jacobi``. Both backends run the same row-cyclic sweep schedule with
the same skip threshold, so they make identical rotation decisions.

Each rotation annihilates A[p, q] with the unitary

    J = [[c, s*exp(i*phi)], [-s*exp(-i*phi), c]],   phi = arg(A[p, q]),

where t = s/c is the root of t^2 + 2*tau*t - 1 = 0 of smaller magnitude,
tau = (A[q, q] - A[p, p]) / (2*|A[p, q]|). The off-diagonal norm is rescanned
directly each sweep; tracking it through the Frobenius invariant loses the
small values to cancellation.
"""

from __future__ import annotations

import math

import numpy as np


def jacobi_eigh(a: np.ndarray, max_sweeps: int = 100, off_tol: float = 1e-12,
                vectors: bool = True):
    """Diagonalize a Hermitian matrix by cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvector columns or None, final off-diagonal
    norm, sweeps used). Eigenvalues are unsorted. The caller is responsible
    for Hermitizing the input.
    """
    a = np.asarray(a, dtype=np.complex128)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    A = a.copy()
    V = np.eye(n, dtype=np.complex128) if vectors else None
    if n < 2:
        w = A.real.reshape(n).copy() if n else np.zeros(0)
        return w, V, 0.0, 0

    fro = float(np.linalg.norm(A))
    if fro == 0.0:
        return np.zeros(n), V, 0.0, 0
    threshold = off_tol * fro
    skip = threshold / n

    sweeps = 0
    off = _off_norm(A)
    while off > threshold and sweeps < max_sweeps:
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                beta = abs(apq)
                if beta <= skip:
                    continue
                app = A[p, p].real
                aqq = A[q, q].real
                phase = apq / beta
                tau = (aqq - app) / (2.0 * beta)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                sp = s * phase
                spc = s * phase.conjugate()

                # column update (A <- A J), then row update (A <- J^+ A)
                colp = A[:, p].copy()
                colq = A[:, q]
                A[:, p] = c * colp - spc * colq
                A[:, q] = sp * colp + c * colq
                rowp = A[p, :].copy()
                rowq = A[q, :]
                A[p, :] = c * rowp - sp * rowq
                A[q, :] = spc * rowp + c * rowq

                A[p, p] = app - t * beta
                A[q, q] = aqq + t * beta
                A[p, q] = 0.0
                A[q, p] = 0.0

                if vectors:
                    vp = V[:, p].copy()
                    vq = V[:, q]
                    V[:, p] = c * vp - spc * vq
                    V[:, q] = sp * vp + c * vq
        sweeps += 1
        off = _off_norm(A)

    w = A.diagonal().real.copy()
    return w, V, off, sweeps


def _off_norm(A: np.ndarray) -> float:
    d = A.copy()
    np.fill_diagonal(d, 0.0)
    return float(np.linalg.norm(d))
