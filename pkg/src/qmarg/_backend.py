"""Kernel selection: compiled Jacobi extension if available, NumPy otherwise."""

from __future__ import annotations

try:
    from qmarg._jacobi import jacobi_eigh

    KERNEL_BACKEND = "compiled"
except ImportError:  # extension not built on this install
    from qmarg._jacobi_py import jacobi_eigh

    KERNEL_BACKEND = "python"

__all__ = ["jacobi_eigh", "KERNEL_BACKEND"]
