"""Centralized numeric tolerances.

Every comparison in the package routes through one policy record so the
tolerances can be audited (and overridden from the CLI) in a single place.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class NumericPolicy:
    """Tolerance bundle used across the package.

    equality      absolute tolerance for scalar/entry equality checks and for
                  treating a value as exactly zero
    psd_slack     how far below zero the minimum eigenvalue may dip before a
                  matrix stops counting as positive semidefinite
    feasibility   residual threshold for accepting an alternating-projection
                  iterate as satisfying the marginal constraints
    hermiticity   construction-time tolerance for symmetrization checks
    """

    equality: float = 1e-9
    psd_slack: float = 1e-9
    feasibility: float = 1e-8
    hermiticity: float = 1e-12


DEFAULT_POLICY = NumericPolicy()


def policy_with_tol(tol: float) -> NumericPolicy:
    """Policy scaled from a single user-supplied equality tolerance."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    return NumericPolicy(equality=tol, psd_slack=tol, feasibility=10 * tol)
