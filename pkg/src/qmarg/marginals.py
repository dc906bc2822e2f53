"""Density matrices, partial traces, and named marginal-set descriptors.

Descriptor grammar (1-based qubit labels):
    "star"       {1,K} for K = 2..N
    "chain"      {K,K+1} for K = 1..N-1
    "all-k:K"    every size-K subset
    "star-k:K"   every size-K subset containing qubit 1
    "i,j;k,l"    explicit semicolon-separated subsets
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from qmarg import linalg
from qmarg.policy import DEFAULT_POLICY, NumericPolicy


@dataclass(eq=False)
class DensityMatrix:
    """Trace-1 positive semidefinite operator on n qubits."""

    n_qubits: int
    matrix: np.ndarray
    validate: bool = True

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        dim = 1 << self.n_qubits
        if m.shape != (dim, dim):
            raise ValueError(f"expected {dim}x{dim} matrix")
        if linalg.hermiticity_defect(m) > 1e-10:
            raise ValueError("matrix is not Hermitian")
        self.matrix = linalg.hermitian_part(m)
        if self.validate:
            tr = complex(np.trace(self.matrix))
            if abs(tr - 1.0) > 1e-9:
                raise ValueError(f"trace {tr} is not 1")
            if not linalg.is_psd(self.matrix):
                raise ValueError("matrix is not positive semidefinite")

    @classmethod
    def from_pure(cls, state) -> "DensityMatrix":
        return cls(state.n_qubits, state.density(), validate=False)


def ptrace_array(mat: np.ndarray, n_qubits: int, keep) -> np.ndarray:
    """Partial trace of a raw 2^n x 2^n array onto the kept qubits (1-based)."""
    keep = sorted(set(int(k) for k in keep))
    if not keep or keep[0] < 1 or keep[-1] > n_qubits:
        raise ValueError(f"subset {keep} out of range 1..{n_qubits}")
    t = np.asarray(mat, dtype=np.complex128).reshape((2,) * (2 * n_qubits))
    keep0 = [k - 1 for k in keep]
    labels_row = []
    labels_col = []
    shared = 2 * n_qubits
    out = []
    for ax in range(n_qubits):
        if ax in keep0:
            labels_row.append(ax)
            labels_col.append(n_qubits + ax)
        else:
            labels_row.append(shared)
            labels_col.append(shared)
            shared += 1
    for ax in keep0:
        out.append(ax)
    for ax in keep0:
        out.append(n_qubits + ax)
    res = np.einsum(t, labels_row + labels_col, out)
    d = 1 << len(keep0)
    return np.ascontiguousarray(res.reshape(d, d))


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduced density matrix on the kept qubits, preserving their order
    by ascending label."""
    keep = sorted(set(int(k) for k in keep))
    return DensityMatrix(len(keep), ptrace_array(rho.matrix, rho.n_qubits, keep),
                         validate=False)


def parse_subsets(descriptor: str, n_qubits: int) -> tuple[str, list[tuple[int, ...]]]:
    """Resolve a descriptor string to (name, subsets)."""
    d = descriptor.strip().lower()
    if d == "star":
        if n_qubits < 2:
            raise ValueError("star needs n >= 2")
        return "star", [(1, k) for k in range(2, n_qubits + 1)]
    if d == "chain":
        if n_qubits < 2:
            raise ValueError("chain needs n >= 2")
        return "chain", [(k, k + 1) for k in range(1, n_qubits)]
    if d.startswith("all-k:"):
        k = int(d.split(":", 1)[1])
        if not 1 <= k <= n_qubits:
            raise ValueError(f"all-k size {k} out of range")
        return "all-k", [tuple(s) for s in itertools.combinations(range(1, n_qubits + 1), k)]
    if d.startswith("star-k:"):
        k = int(d.split(":", 1)[1])
        if not 1 <= k <= n_qubits:
            raise ValueError(f"star-k size {k} out of range")
        rest = itertools.combinations(range(2, n_qubits + 1), k - 1)
        return "star-k", [(1,) + tuple(s) for s in rest]
    subsets = []
    for part in descriptor.split(";"):
        part = part.strip()
        if not part:
            continue
        try:
            raw = [int(x) for x in part.split(",")]
        except ValueError:
            raise ValueError(f"bad marginal descriptor {descriptor!r}: "
                             f"expected star, chain, all-k:K, star-k:K, or "
                             f"comma/semicolon site lists") from None
        qs = sorted(set(raw))
        if len(qs) != len(raw):
            raise ValueError(f"repeated site in subset {part!r}")
        if not qs or qs[0] < 1 or qs[-1] > n_qubits:
            raise ValueError(f"subset {qs} out of range 1..{n_qubits}")
        subsets.append(tuple(qs))
    if not subsets:
        raise ValueError(f"empty descriptor {descriptor!r}")
    return "explicit", subsets


@dataclass(eq=False)
class MarginalSet:
    """Reduced density matrices for a family of qubit subsets."""

    n_qubits: int
    name: str
    subsets: list
    reduced: list

    def __post_init__(self):
        if len(self.subsets) != len(self.reduced):
            raise ValueError("subsets/reduced length mismatch")
        fixed_s, fixed_r = [], []
        for sub, red in zip(self.subsets, self.reduced):
            sub = tuple(sorted(set(int(k) for k in sub)))
            if not sub or sub[0] < 1 or sub[-1] > self.n_qubits:
                raise ValueError(f"subset {sub} out of range")
            red = np.asarray(red, dtype=np.complex128)
            d = 1 << len(sub)
            if red.shape != (d, d):
                raise ValueError(f"reduced matrix for {sub} has shape {red.shape}")
            fixed_s.append(sub)
            fixed_r.append(linalg.hermitian_part(red))
        self.subsets = fixed_s
        self.reduced = fixed_r

    def covers_all(self) -> bool:
        got = set()
        for sub in self.subsets:
            got.update(sub)
        return got == set(range(1, self.n_qubits + 1))


def marginal_set(rho: DensityMatrix, descriptor: str) -> MarginalSet:
    """Compute the reduced density matrices named by a descriptor."""
    name, subsets = parse_subsets(descriptor, rho.n_qubits)
    reduced = [ptrace_array(rho.matrix, rho.n_qubits, sub) for sub in subsets]
    return MarginalSet(rho.n_qubits, name, subsets, reduced)


@dataclass
class MatchReport:
    matches: bool
    max_deviation: float
    worst_subset: tuple


def marginals_match(a: DensityMatrix, b: DensityMatrix, descriptor: str,
                    tol: float | None = None,
                    policy: NumericPolicy = DEFAULT_POLICY) -> MatchReport:
    """Entrywise comparison of two states' marginals over a descriptor."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("qubit count mismatch")
    if tol is None:
        tol = policy.equality
    _, subsets = parse_subsets(descriptor, a.n_qubits)
    worst = 0.0
    worst_sub = subsets[0]
    for sub in subsets:
        ra = ptrace_array(a.matrix, a.n_qubits, sub)
        rb = ptrace_array(b.matrix, b.n_qubits, sub)
        dev = float(np.max(np.abs(ra - rb)))
        if dev > worst:
            worst = dev
            worst_sub = sub
    return MatchReport(worst <= tol, worst, worst_sub)


__all__ = [
    "DensityMatrix", "MarginalSet", "MatchReport", "marginal_set",
    "marginals_match", "parse_subsets", "partial_trace", "ptrace_array",
]
