"""Hermitian linear algebra built on the in-house Jacobi kernel.

All spectral operations route through one deterministic eigensolver
(`qmarg._backend.jacobi_eigh`): cyclic Jacobi sweeps, capped at 100, with an
off-diagonal norm threshold of 1e-12 relative to the Frobenius norm. Small
entries are skipped per rotation, so matrices supported on a small block
cost little more than the block itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from qmarg._backend import KERNEL_BACKEND, jacobi_eigh
from qmarg.policy import DEFAULT_POLICY, NumericPolicy

MAX_SWEEPS = 100
OFF_TOL = 1e-12


class ConvergenceError(RuntimeError):
    """Jacobi sweeps exhausted before the off-diagonal norm threshold."""


def hermitian_part(a: np.ndarray) -> np.ndarray:
    """Return (A + A^+) / 2."""
    a = np.asarray(a, dtype=np.complex128)
    return 0.5 * (a + a.conj().T)


def hermiticity_defect(a: np.ndarray) -> float:
    """Max entrywise deviation of A from A^+."""
    a = np.asarray(a, dtype=np.complex128)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


@dataclass
class Spectrum:
    """Eigenvalues (real, descending) and matching eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


def eigh(m: np.ndarray, vectors: bool = True) -> Spectrum:
    """Spectral decomposition of a Hermitian matrix.

    The input is symmetrized first; eigenvalues come back sorted descending.
    Raises ConvergenceError if the sweep cap is hit (does not happen for
    Hermitian input in practice).
    """
    a = hermitian_part(m)
    w, v, off, _ = jacobi_eigh(a, max_sweeps=MAX_SWEEPS, off_tol=OFF_TOL,
                               vectors=vectors)
    fro = float(np.linalg.norm(a))
    if off > OFF_TOL * max(fro, 1e-300) * 10:
        raise ConvergenceError(
            f"jacobi sweeps exhausted: off-diagonal norm {off:.3e} "
            f"above threshold {OFF_TOL * fro:.3e} after {MAX_SWEEPS} sweeps")
    order = np.argsort(-w, kind="stable")
    return Spectrum(values=w[order],
                    vectors=v[:, order] if vectors else np.zeros((0, 0)))


def eigvalsh(m: np.ndarray) -> np.ndarray:
    """Eigenvalues only (descending), skipping eigenvector accumulation."""
    a = hermitian_part(m)
    w, _, off, _ = jacobi_eigh(a, max_sweeps=MAX_SWEEPS, off_tol=OFF_TOL,
                               vectors=False)
    fro = float(np.linalg.norm(a))
    if off > OFF_TOL * max(fro, 1e-300) * 10:
        raise ConvergenceError("jacobi sweeps exhausted")
    return np.sort(w)[::-1]


def is_psd(m: np.ndarray, tol: float | None = None,
           policy: NumericPolicy = DEFAULT_POLICY) -> bool:
    """True when the minimum eigenvalue is >= -tol (default: psd_slack)."""
    if tol is None:
        tol = policy.psd_slack
    w = eigvalsh(m)
    return bool(w.size == 0 or w[-1] >= -tol)


def psd_project(m: np.ndarray) -> np.ndarray:
    """Nearest positive semidefinite matrix in Frobenius norm.

    Symmetrizes, clamps negative eigenvalues to zero, reconstructs, and
    re-symmetrizes to kill rotation roundoff.
    """
    s = eigh(m)
    w = np.clip(s.values, 0.0, None)
    return hermitian_part((s.vectors * w) @ s.vectors.conj().T)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """(1/2) * sum |eigenvalues(a - b)| for Hermitian a, b."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    w = eigvalsh(a - b)
    return 0.5 * float(np.sum(np.abs(w)))


def partial_transpose(m: np.ndarray, subset: tuple[int, ...] | list[int],
                      n_qubits: int) -> np.ndarray:
    """Transpose the tensor factors named by `subset` (1-based qubits).

    Qubit 1 is the most significant bit of the basis index.
    """
    m = np.asarray(m, dtype=np.complex128)
    dim = 1 << n_qubits
    if m.shape != (dim, dim):
        raise ValueError(f"expected {dim}x{dim} matrix for {n_qubits} qubits")
    subset = sorted(set(int(k) for k in subset))
    if subset and (subset[0] < 1 or subset[-1] > n_qubits):
        raise ValueError(f"subset {subset} out of range 1..{n_qubits}")
    t = m.reshape((2,) * (2 * n_qubits))
    for k in subset:
        ax = k - 1
        t = np.swapaxes(t, ax, n_qubits + ax)
    return np.ascontiguousarray(t.reshape(dim, dim))


def kron_all(factors) -> np.ndarray:
    """Kronecker product of a sequence of operators, left to right."""
    return reduce(np.kron, [np.asarray(f, dtype=np.complex128) for f in factors])


__all__ = [
    "KERNEL_BACKEND", "ConvergenceError", "Spectrum", "eigh", "eigvalsh",
    "hermitian_part", "hermiticity_defect", "is_psd", "psd_project",
    "trace_distance", "partial_transpose", "kron_all",
]
