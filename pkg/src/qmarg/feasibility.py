"""Constructive non-uniqueness search via Dykstra alternating projections.

Looks for a density matrix distinct from a reference state that shares a
prescribed set of marginals: alternate between the affine set of the
linear partial-trace constraints (projected through a precomputed
least-squares map) and the PSD cone, with Dykstra corrections so the
iterates converge to the intersection rather than a cycle. A returned
witness is a certificate of non-uniqueness; an empty list is only
evidence of uniqueness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qmarg import linalg
from qmarg.marginals import (DensityMatrix, MarginalSet, marginal_set,
                             marginals_match, ptrace_array)
from qmarg.policy import DEFAULT_POLICY, NumericPolicy
from qmarg.states import GGCoefficients, PureState, weight_one_index

MAX_CONSTRAINTS = 20_000
MOVE_TOL = 1e-10
DISTINCT_TOL = 1e-6
DEFAULT_EPSILON = 0.3
RANK_TOL = 1e-3
POLISH_STEPS = 40
POLISH_TARGET = 1e-12


class InfeasibleMarginalsError(Exception):
    """The linear constraint system admits no Hermitian solution at all."""


@dataclass
class FeasibilityWitness:
    """A state sharing the target marginals but distinct from the reference."""

    seed: int
    trace_distance: float
    residual: float
    state: DensityMatrix


class MarginalConstraintSystem:
    """Affine constraint map C(X) = b for a marginal set, with projector.

    C stacks the vectorized partial traces onto each subset plus the global
    trace; the adjoint lifts constraint-space vectors back by tensoring with
    identity on the traced qubits. The least-squares projection onto
    {X : C(X) = b} is X - C*(pinv(C C*)(C(X) - b)).
    """

    def __init__(self, ms: MarginalSet, policy: NumericPolicy = DEFAULT_POLICY):
        self.n = ms.n_qubits
        self.dim = 1 << self.n
        self.policy = policy
        self.subsets = list(ms.subsets)
        self._embed = []
        blocks = []
        for sub, red in zip(ms.subsets, ms.reduced):
            traced = [q for q in range(1, self.n + 1) if q not in sub]
            keep = np.array([_spread(a, sub, self.n) for a in range(1 << len(sub))])
            tr = np.array([_spread(t, traced, self.n)
                           for t in range(1 << len(traced))])
            self._embed.append(keep[:, None] | tr[None, :])
            blocks.append(np.asarray(red, dtype=complex).ravel())
        blocks.append(np.array([1.0 + 0j]))
        self.b = np.concatenate(blocks)
        self.m = self.b.size
        if self.m > MAX_CONSTRAINTS:
            raise ValueError(f"{self.m} scalar constraints exceed the "
                             f"{MAX_CONSTRAINTS} cap")
        gram = np.empty((self.m, self.m), dtype=complex)
        unit = np.zeros(self.m, dtype=complex)
        for k in range(self.m):
            unit[k] = 1.0
            gram[:, k] = self.apply(self.lift(unit))
            unit[k] = 0.0
        self.gram_pinv = np.linalg.pinv(gram)
        probe = linalg.hermitian_part(self.lift(self.gram_pinv @ self.b))
        if float(np.max(np.abs(self.apply(probe) - self.b))) > policy.feasibility:
            raise InfeasibleMarginalsError(
                "marginal constraints are mutually inconsistent")

    def apply(self, x: np.ndarray) -> np.ndarray:
        out = [ptrace_array(x, self.n, sub).ravel() for sub in self.subsets]
        out.append(np.array([np.trace(x)]))
        return np.concatenate(out)

    def lift(self, y: np.ndarray) -> np.ndarray:
        z = np.zeros((self.dim, self.dim), dtype=complex)
        pos = 0
        for emb in self._embed:
            ds = emb.shape[0]
            block = y[pos:pos + ds * ds].reshape(ds, ds)
            pos += ds * ds
            for t in range(emb.shape[1]):
                z[np.ix_(emb[:, t], emb[:, t])] += block
        z += y[pos] * np.eye(self.dim)
        return z

    def project(self, x: np.ndarray) -> np.ndarray:
        r = self.apply(x) - self.b
        return linalg.hermitian_part(x - self.lift(self.gram_pinv @ r))

    def residual(self, x: np.ndarray) -> float:
        return float(np.max(np.abs(self.apply(x) - self.b)))


def _spread(value: int, positions, n: int) -> int:
    idx = 0
    w = len(positions)
    for rank, q in enumerate(positions):
        bit = (value >> (w - 1 - rank)) & 1
        idx |= bit << (n - q)
    return idx


def _random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = linalg.hermitian_part(a)
    return h / np.linalg.norm(h)


def _factor_jacobian(system: MarginalConstraintSystem,
                     a: np.ndarray) -> np.ndarray:
    """Real Jacobian of theta -> C(A A*) at the factor A, theta = (Re A, Im A)."""
    d, r = a.shape
    cols = []
    ah = a.conj().T
    for part in (1.0, 1j):
        for i in range(d):
            for j in range(r):
                e = np.zeros((d, r), dtype=complex)
                e[i, j] = part
                m = e @ ah
                s = system.apply(m + m.conj().T)
                cols.append(np.concatenate([s.real, s.imag]))
    return np.array(cols).T


def _gauss_newton_factor(system: MarginalConstraintSystem,
                         a: np.ndarray) -> np.ndarray | None:
    """Drive C(A A*) = b to convergence by damped Gauss-Newton on A."""
    d, r = a.shape
    res = system.apply(a @ a.conj().T) - system.b
    fvec = np.concatenate([res.real, res.imag])
    for _ in range(POLISH_STEPS):
        if float(np.max(np.abs(res))) <= POLISH_TARGET:
            break
        jac = _factor_jacobian(system, a)
        step, *_ = np.linalg.lstsq(jac, -fvec, rcond=None)
        delta = step[:d * r].reshape(d, r) + 1j * step[d * r:].reshape(d, r)
        base = float(np.linalg.norm(fvec))
        alpha = 1.0
        for _ in range(25):
            cand = a + alpha * delta
            resc = system.apply(cand @ cand.conj().T) - system.b
            fc = np.concatenate([resc.real, resc.imag])
            if float(np.linalg.norm(fc)) < base:
                break
            alpha *= 0.5
        else:
            return None
        a, res, fvec = cand, resc, fc
    return a


def _refine_stalled(system: MarginalConstraintSystem, x: np.ndarray,
                    policy: NumericPolicy) -> np.ndarray | None:
    """Snap a stalled iterate onto the feasible set through its support.

    Alternating projections identify the support of a nearby feasible
    point long before the residual meets tolerance: rank-deficient faces
    of the cone are approached sublinearly, with the support subspace
    rotating into place at a vanishing rate. Factoring the iterate as
    A A* on its numerical support and finishing with Gauss-Newton on the
    factor closes those last orders of magnitude; the result is PSD by
    construction and is still validated against the original constraints
    by the caller.
    """
    spec = linalg.eigh(x)
    evals, vecs = spec.values, spec.vectors
    rank = max(int(np.sum(evals > RANK_TOL)), 1)
    for r in (rank, rank + 1):
        if r > system.dim:
            break
        cols = np.sqrt(np.clip(evals[:r], RANK_TOL ** 2, None))
        fac = _gauss_newton_factor(system, vecs[:, :r] * cols[None, :])
        if fac is None:
            continue
        cand = linalg.hermitian_part(fac @ fac.conj().T)
        if system.residual(cand) <= policy.feasibility:
            return cand
    return None


def search_witness(reference: DensityMatrix, descriptor: str, seeds: int = 64,
                   max_iters: int = 5000, epsilon: float = DEFAULT_EPSILON,
                   policy: NumericPolicy = DEFAULT_POLICY) -> list:
    """Seeded Dykstra searches for a distinct state with the same marginals.

    Each seed starts from psd_project(reference + epsilon * random
    Hermitian) and alternates affine and PSD projections with Dykstra
    corrections until the iterate moves less than 1e-10 in Frobenius norm
    or max_iters is hit. Endpoints still above tolerance get a support
    snap: a Gauss-Newton refinement of the low-rank factor the iteration
    stalled on. Points are kept when the marginal residual is at most the
    feasibility tolerance and the trace distance from the reference
    exceeds 1e-6. An empty list means no witness was found, which is
    evidence of uniqueness, not a proof.
    """
    if reference.n_qubits > 8:
        raise ValueError("witness search is capped at 8 qubits")
    if seeds < 1:
        raise ValueError("need at least one seed")
    ms = marginal_set(reference, descriptor)
    system = MarginalConstraintSystem(ms, policy)
    ref = reference.matrix
    found = []
    for k in range(seeds):
        rng = np.random.default_rng(k)
        x = linalg.psd_project(ref + epsilon * _random_hermitian(ref.shape[0], rng))
        p = np.zeros_like(x)
        q = np.zeros_like(x)
        for _ in range(max_iters):
            y = system.project(x + p)
            p = x + p - y
            z = linalg.psd_project(y + q)
            q = y + q - z
            move = float(np.linalg.norm(z - x))
            x = z
            if move < MOVE_TOL:
                break
        x = linalg.hermitian_part(x)
        tr = float(np.trace(x).real)
        if tr > 0.5:
            x = x / tr
        if system.residual(x) > policy.feasibility:
            refined = _refine_stalled(system, x, policy)
            if refined is None:
                continue
            x = refined
        resid = system.residual(x)
        td = linalg.trace_distance(x, ref)
        if (resid <= policy.feasibility and td > DISTINCT_TOL
                and abs(np.trace(x).real - 1.0) <= policy.psd_slack
                and linalg.is_psd(x, policy=policy)):
            found.append(FeasibilityWitness(k, td, resid,
                                            DensityMatrix(reference.n_qubits, x,
                                                          validate=False)))
    return found


@dataclass
class WitnessReport:
    """Marginal agreement between a reference and a hand-built candidate."""

    matches: bool
    max_deviation: float
    worst_subset: tuple | None
    trace_distance: float


def verify_analytic_witness(reference: DensityMatrix, witness: DensityMatrix,
                            descriptor: str, tol: float | None = None,
                            policy: NumericPolicy = DEFAULT_POLICY) -> WitnessReport:
    """Check a hand-built candidate against the reference's marginals."""
    report = marginals_match(reference, witness, descriptor, tol=tol,
                             policy=policy)
    td = linalg.trace_distance(reference.matrix, witness.matrix)
    return WitnessReport(report.matches, report.max_deviation,
                         report.worst_subset, td)


def sign_flipped_gg(coeffs: GGCoefficients) -> PureState:
    """The companion pure state with every top-weight amplitude negated.

    Shares all (N-3)-partite marginals with the original state.
    """
    from qmarg.states import make_gg

    flipped = GGCoefficients(coeffs.n_qubits, list(coeffs.a),
                             [-bk for bk in coeffs.b])
    return make_gg(flipped)


def w_pair_mixture(coeffs: GGCoefficients) -> DensityMatrix:
    """Classical mixture of the two excitation branches of a GG state.

    |W_a><W_a| + |Wbar_b><Wbar_b| built from the unnormalized branch
    vectors; their squared norms add to one, so the mixture has unit trace.
    It shares all (N-3)-partite marginals with the pure state.
    """
    n = coeffs.n_qubits
    dim = 1 << n
    low = np.zeros(dim, dtype=complex)
    high = np.zeros(dim, dtype=complex)
    for k in range(1, n + 1):
        idx = weight_one_index(n, k)
        low[idx] = coeffs.a[k - 1]
        high[(dim - 1) ^ idx] = coeffs.b[k - 1]
    mat = np.outer(low, low.conj()) + np.outer(high, high.conj())
    return DensityMatrix(n, mat, validate=False)


def gghz_classical_mixture(n_qubits: int, a: complex, b: complex) -> DensityMatrix:
    """Dephased two-branch mixture |a|^2 P(0..0) + |b|^2 P(1..1).

    Shares every proper marginal of the superposition a|0..0> + b|1..1>.
    """
    dim = 1 << n_qubits
    mat = np.zeros((dim, dim), dtype=complex)
    mat[0, 0] = abs(a) ** 2
    mat[dim - 1, dim - 1] = abs(b) ** 2
    return DensityMatrix(n_qubits, mat, validate=False)


__all__ = [
    "DEFAULT_EPSILON", "FeasibilityWitness", "InfeasibleMarginalsError",
    "MarginalConstraintSystem", "WitnessReport", "gghz_classical_mixture",
    "search_witness", "sign_flipped_gg", "verify_analytic_witness",
    "w_pair_mixture",
]
