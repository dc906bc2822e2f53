"""Multiqubit pure-state families and local (tensor-factor) operations.

Conventions: qubits are numbered 1..N and qubit 1 is the most significant
bit of the computational-basis index, so |i1 i2 ... iN> sits at index
sum_k i_k * 2^(N-k). After every construction or renormalization the global
phase is fixed so the first nonzero amplitude is real positive; fidelity
comparisons are phase-insensitive regardless.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

_ZERO = 1e-12


def basis_index(bits) -> int:
    """Index of |bits[0] bits[1] ...> with bits[0] on qubit 1."""
    idx = 0
    for b in bits:
        idx = (idx << 1) | (1 if b else 0)
    return idx


def weight_one_index(n: int, k: int) -> int:
    """Index of the string with a single 1 on qubit k."""
    return 1 << (n - k)


def weight_strings(n: int, w: int) -> list[int]:
    """All n-bit basis indices of Hamming weight w, ascending."""
    return [i for i in range(1 << n) if bin(i).count("1") == w]


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    for x in vec:
        if abs(x) > _ZERO:
            ph = x / abs(x)
            return vec * ph.conjugate()
    return vec


@dataclass(eq=False)
class PureState:
    """Normalized amplitude vector over the 2^n computational basis."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if self.amplitudes.shape[0] != 1 << self.n_qubits:
            raise ValueError(f"expected {1 << self.n_qubits} amplitudes, "
                             f"got {self.amplitudes.shape[0]}")
        norm = float(np.linalg.norm(self.amplitudes))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"state not normalized (norm {norm})")
        self.amplitudes = _fix_phase(self.amplitudes / norm)

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


def fidelity(a: PureState, b: PureState) -> float:
    """|<a|b>|^2, insensitive to global phase."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("qubit count mismatch")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


# ---------------------------------------------------------------------------
# coefficient records

@dataclass
class GWCoefficients:
    """c[0] on |0...0> and c[k] on the weight-1 string of qubit k."""

    n_qubits: int
    c: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=np.complex128).reshape(-1)
        if self.c.shape[0] != self.n_qubits + 1:
            raise ValueError(f"need {self.n_qubits + 1} coefficients")
        if abs(np.linalg.norm(self.c) - 1.0) > 1e-9:
            raise ValueError("coefficients not normalized")
        if abs(self.c[1]) <= _ZERO:
            raise ValueError("c_1 must be nonzero")
        if int(np.sum(np.abs(self.c[1:]) > _ZERO)) < 3:
            warnings.warn("fewer than 3 nonzero excitation coefficients; "
                          "outside the generic regime", stacklevel=2)


@dataclass
class DickeCoefficients:
    """One coefficient per weight-ell basis string, in ascending index order."""

    n_qubits: int
    ell: int
    c: np.ndarray

    def __post_init__(self):
        if not 1 <= self.ell <= self.n_qubits // 2:
            raise ValueError("need 1 <= ell <= floor(n/2)")
        self.c = np.asarray(self.c, dtype=np.complex128).reshape(-1)
        want = math.comb(self.n_qubits, self.ell)
        if self.c.shape[0] != want:
            raise ValueError(f"need {want} coefficients")
        if abs(np.linalg.norm(self.c) - 1.0) > 1e-9:
            raise ValueError("coefficients not normalized")
        if np.any(np.abs(self.c) <= _ZERO):
            warnings.warn("zero Dicke coefficient; outside the generic regime",
                          stacklevel=2)

    @property
    def support(self) -> list[int]:
        return weight_strings(self.n_qubits, self.ell)


@dataclass
class GGCoefficients:
    """a[K-1] on the weight-1 string of qubit K, b[K-1] on its complement."""

    n_qubits: int
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        if self.n_qubits < 5:
            raise ValueError("family defined for n >= 5")
        self.a = np.asarray(self.a, dtype=np.complex128).reshape(-1)
        self.b = np.asarray(self.b, dtype=np.complex128).reshape(-1)
        if self.a.shape[0] != self.n_qubits or self.b.shape[0] != self.n_qubits:
            raise ValueError(f"need {self.n_qubits} coefficients in each of a, b")
        total = float(np.sum(np.abs(self.a) ** 2) + np.sum(np.abs(self.b) ** 2))
        if abs(total - 1.0) > 1e-9:
            raise ValueError("coefficients not normalized")
        if np.any(np.abs(self.a * self.b) <= _ZERO ** 2):
            raise ValueError("every a_K * b_K must be nonzero")


# ---------------------------------------------------------------------------
# state factories

def make_w(n: int) -> PureState:
    """Equal-amplitude single-excitation state, 1/sqrt(n) on each weight-1 string."""
    if n < 2:
        raise ValueError("need n >= 2")
    v = np.zeros(1 << n, dtype=np.complex128)
    for k in range(1, n + 1):
        v[weight_one_index(n, k)] = 1.0 / math.sqrt(n)
    return PureState(n, v)


def make_gw(coeffs: GWCoefficients) -> PureState:
    """Generalized single-excitation state: c0 |0...0> + sum_k c_k |..1_k..>."""
    n = coeffs.n_qubits
    v = np.zeros(1 << n, dtype=np.complex128)
    v[0] = coeffs.c[0]
    for k in range(1, n + 1):
        v[weight_one_index(n, k)] = coeffs.c[k]
    return PureState(n, v)


def make_gghz(n: int, a: complex, b: complex) -> PureState:
    """a |0...0> + b |1...1>; the standard case is a = b = 1/sqrt(2)."""
    if n < 2:
        raise ValueError("need n >= 2")
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > 1e-9:
        raise ValueError("need |a|^2 + |b|^2 = 1")
    if abs(a) <= _ZERO or abs(b) <= _ZERO:
        raise ValueError("both amplitudes must be nonzero")
    v = np.zeros(1 << n, dtype=np.complex128)
    v[0] = a
    v[-1] = b
    return PureState(n, v)


def make_dicke(coeffs: DickeCoefficients) -> PureState:
    """Weighted superposition of all weight-ell basis strings."""
    v = np.zeros(1 << coeffs.n_qubits, dtype=np.complex128)
    for idx, amp in zip(coeffs.support, coeffs.c):
        v[idx] = amp
    return PureState(coeffs.n_qubits, v)


def uniform_dicke_coefficients(n: int, ell: int) -> DickeCoefficients:
    m = math.comb(n, ell)
    return DickeCoefficients(n, ell, np.full(m, 1.0 / math.sqrt(m)))


def make_g(n: int) -> PureState:
    """1/sqrt(2n) on every weight-1 and every weight-(n-1) string."""
    if n < 3:
        raise ValueError("need n >= 3")
    v = np.zeros(1 << n, dtype=np.complex128)
    amp = 1.0 / math.sqrt(2 * n)
    for k in range(1, n + 1):
        e = weight_one_index(n, k)
        v[e] = amp
        v[((1 << n) - 1) ^ e] = amp
    return PureState(n, v)


def make_gg(coeffs: GGCoefficients) -> PureState:
    """sum_K a_K |..1_K..> + b_K |complement of ..1_K..>."""
    n = coeffs.n_qubits
    v = np.zeros(1 << n, dtype=np.complex128)
    full = (1 << n) - 1
    for k in range(1, n + 1):
        e = weight_one_index(n, k)
        v[e] = coeffs.a[k - 1]
        v[full ^ e] = coeffs.b[k - 1]
    return PureState(n, v)


# ---------------------------------------------------------------------------
# local operations

@dataclass
class LocalOperator:
    """One invertible 2x2 factor per qubit, applied as a tensor product."""

    factors: list = field(default_factory=list)

    def __post_init__(self):
        fixed = []
        for k, f in enumerate(self.factors):
            f = np.asarray(f, dtype=np.complex128)
            if f.shape != (2, 2):
                raise ValueError(f"factor {k + 1} is not 2x2")
            if abs(np.linalg.det(f)) <= _ZERO:
                raise ValueError(f"factor {k + 1} is numerically singular")
            fixed.append(f)
        self.factors = fixed

    @property
    def n_qubits(self) -> int:
        return len(self.factors)

    def matrix(self) -> np.ndarray:
        from qmarg.linalg import kron_all

        return kron_all(self.factors)


def g_to_ghz_operator() -> LocalOperator:
    """Local operator carrying make_g(3) onto the standard GHZ state.

    Each factor is -3**(-1/6) * [[1, w], [1, w^2]] with w a primitive cube
    root of unity: the cube-root phases cancel every amplitude except the
    all-0 and all-1 ones, certifying the two states sit in the same
    invertible-local-operation class while no local unitary links them.
    """
    w = np.exp(2j * np.pi / 3)
    f = -(3.0 ** (-1.0 / 6.0)) * np.array([[1.0, w], [1.0, w * w]])
    return LocalOperator([f, f, f])


def apply_local(op: LocalOperator, state: PureState) -> tuple[PureState, float]:
    """Apply the tensor-product operator and renormalize.

    Returns the new state and the pre-normalization norm. Raises if the
    image is numerically null.
    """
    n = state.n_qubits
    if op.n_qubits != n:
        raise ValueError("operator/state qubit count mismatch")
    psi = state.amplitudes.reshape((2,) * n)
    for k, f in enumerate(op.factors):
        psi = np.moveaxis(np.tensordot(f, psi, axes=([1], [k])), 0, k)
    vec = np.ascontiguousarray(psi).reshape(-1)
    norm = float(np.linalg.norm(vec))
    if norm <= _ZERO:
        raise ValueError("operator image is numerically null")
    return PureState(n, vec / norm), norm


def canonicalize_w(op: LocalOperator) -> tuple[GWCoefficients, list[np.ndarray]]:
    """Canonical coefficients of a locally transformed single-excitation state.

    Given invertible factors A_k, writes (tensor A_k)|W_n> as a local-unitary
    image of the canonical form c0 |0...0> + sum c_k |..1_k..| with all c_k
    real >= 0. Per qubit, the images u_k = A_k|0> and v_k = A_k|1> are
    Gram-Schmidt split into p_k parallel to u_k and q_k orthogonal to it;
    leftover phases are absorbed into the returned basis unitaries.

    Returns (coefficients, unitaries U_k) with
    (tensor U_k)|canonical form> equal to the normalized image state.
    """
    n = op.n_qubits
    if n < 2:
        raise ValueError("need n >= 2")
    m = np.zeros(n)          # |u_k|
    s = np.zeros(n, dtype=np.complex128)   # <p_k, v_k>
    t = np.zeros(n)          # |v_k - s_k p_k|, real > 0 by construction
    p = []
    q = []
    for k, f in enumerate(op.factors):
        u = f[:, 0]
        v = f[:, 1]
        m[k] = float(np.linalg.norm(u))
        if m[k] <= _ZERO:
            raise ValueError(f"factor {k + 1} annihilates |0>")
        pk = u / m[k]
        sk = complex(np.vdot(pk, v))
        w = v - sk * pk
        tk = float(np.linalg.norm(w))
        if tk <= _ZERO:
            raise ValueError(f"factor {k + 1} is numerically singular")
        p.append(pk)
        q.append(w / tk)
        s[k] = sk
        t[k] = tk

    prod = np.prod(m)
    rest = prod / m          # prod of m_j over j != k
    z = np.empty(n + 1, dtype=np.complex128)
    z[0] = np.sum(s * rest) / math.sqrt(n)
    z[1:] = t * rest / math.sqrt(n)
    nu = float(np.linalg.norm(z))
    z /= nu

    theta = np.where(np.abs(z) > _ZERO, np.angle(z), 0.0)
    c = np.abs(z)
    us = []
    for k in range(n):
        mu = theta[0] if k == 0 else 0.0
        phi = theta[k + 1] if k == 0 else theta[k + 1] - theta[0]
        us.append(np.column_stack([np.exp(1j * mu) * p[k],
                                   np.exp(1j * phi) * q[k]]))
    return GWCoefficients(n, c), us


def dicke_slocc_sectors(op: LocalOperator, coeffs: DickeCoefficients) -> np.ndarray:
    """Hamming-weight sector masses of the transformed weight-ell state.

    Requires every factor upper-triangular (A_k|0> proportional to |0>), so
    no amplitude can climb above sector ell; mass in sectors > ell stays
    below 1e-12. Lower-triangular leakage raises with an explanation.
    """
    for k, f in enumerate(op.factors):
        if abs(f[1, 0]) > _ZERO:
            raise ValueError(
                f"factor {k + 1} has a |0> -> |1> component ({f[1, 0]}); "
                "only upper-triangular factors keep the excitation sectors "
                "bounded by ell")
    state, _ = apply_local(op, make_dicke(coeffs))
    n = coeffs.n_qubits
    masses = np.zeros(n + 1)
    for idx, amp in enumerate(state.amplitudes):
        masses[bin(idx).count("1")] += abs(amp) ** 2
    return masses


def dicke42_invariant(coeffs: DickeCoefficients) -> complex:
    """Degree-3 invariant a*f*(c*d - b*e) of the 4-qubit, two-excitation family.

    (a, b, c, d, e, f) are the amplitudes at basis indices
    (3, 5, 6, 9, 10, 12) in that order.
    """
    if coeffs.n_qubits != 4 or coeffs.ell != 2:
        raise ValueError("defined for n=4, ell=2")
    a, b, c, d, e, f = coeffs.c
    return complex(a * f * (c * d - b * e))


# ---------------------------------------------------------------------------
# seeded generic instances

MIN_MODULUS = 0.05


def _resampled(rng: np.random.Generator, size: int) -> np.ndarray:
    """Normalized complex Gaussian vector, resampled until no entry is tiny."""
    while True:
        v = rng.normal(size=size) + 1j * rng.normal(size=size)
        v /= np.linalg.norm(v)
        if np.min(np.abs(v)) >= MIN_MODULUS:
            return v


def random_gw_coefficients(n: int, rng: np.random.Generator) -> GWCoefficients:
    return GWCoefficients(n, _resampled(rng, n + 1))


def random_dicke_coefficients(n: int, ell: int,
                              rng: np.random.Generator) -> DickeCoefficients:
    return DickeCoefficients(n, ell, _resampled(rng, math.comb(n, ell)))


def random_gg_coefficients(n: int, rng: np.random.Generator) -> GGCoefficients:
    v = _resampled(rng, 2 * n)
    return GGCoefficients(n, v[:n], v[n:])


def random_gghz_amplitudes(rng: np.random.Generator) -> tuple[complex, complex]:
    v = _resampled(rng, 2)
    return complex(v[0]), complex(v[1])


def random_local_operator(n: int, rng: np.random.Generator,
                          kind: str = "invertible") -> LocalOperator:
    """Seeded local operator: 'invertible', 'unitary', or 'upper' factors."""
    factors = []
    for _ in range(n):
        while True:
            f = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            if kind == "unitary":
                f, _ = np.linalg.qr(f)
            elif kind == "upper":
                f[1, 0] = 0.0
            if abs(np.linalg.det(f)) > 0.05:
                break
        factors.append(f)
    return LocalOperator(factors)


__all__ = [
    "PureState", "GWCoefficients", "DickeCoefficients", "GGCoefficients",
    "LocalOperator", "basis_index", "weight_one_index", "weight_strings",
    "fidelity", "make_w", "make_gw", "make_gghz", "make_dicke",
    "uniform_dicke_coefficients", "make_g", "make_gg", "apply_local",
    "canonicalize_w", "dicke_slocc_sectors", "dicke42_invariant",
    "g_to_ghz_operator",
    "MIN_MODULUS", "random_gw_coefficients", "random_dicke_coefficients",
    "random_gg_coefficients", "random_gghz_amplitudes", "random_local_operator",
]
