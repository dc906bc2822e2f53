"""Partial traces, marginal-set descriptors, and marginal comparison."""

import itertools

import numpy as np
import pytest

from qmarg.linalg import eigvalsh, hermiticity_defect
from qmarg.marginals import (
    DensityMatrix,
    MarginalSet,
    marginal_set,
    marginals_match,
    parse_subsets,
    partial_trace,
    ptrace_array,
)
from qmarg.states import make_g, make_gghz, make_gw, make_w, random_gw_coefficients


def _slow_ptrace(mat, n, keep):
    """Independent loop-based partial trace used as an oracle."""
    keep = tuple(sorted(keep))
    traced = [q for q in range(1, n + 1) if q not in keep]
    dk = 2 ** len(keep)
    out = np.zeros((dk, dk), dtype=complex)

    def embed(bits_keep, bits_traced):
        idx = 0
        for q in range(1, n + 1):
            if q in keep:
                b = bits_keep[keep.index(q)]
            else:
                b = bits_traced[traced.index(q)]
            idx = (idx << 1) | b
        return idx

    for rk in itertools.product((0, 1), repeat=len(keep)):
        for ck in itertools.product((0, 1), repeat=len(keep)):
            r = int("".join(map(str, rk)), 2) if rk else 0
            c = int("".join(map(str, ck)), 2) if ck else 0
            for t in itertools.product((0, 1), repeat=len(traced)):
                out[r, c] += mat[embed(rk, t), embed(ck, t)]
    return out


@pytest.mark.parametrize("keep", [(1,), (2,), (1, 3), (2, 3), (1, 2, 4)])
def test_ptrace_matches_slow_oracle(keep):
    rng = np.random.default_rng(sum(keep))
    n = 4
    m = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    rho = m @ m.conj().T
    rho /= np.trace(rho).real
    got = ptrace_array(rho, n, keep)
    want = _slow_ptrace(rho, n, keep)
    assert np.max(np.abs(got - want)) <= 1e-12


def test_w3_two_qubit_marginal():
    rho = DensityMatrix.from_pure(make_w(3))
    red = partial_trace(rho, (1, 2)).matrix
    expect = np.zeros((4, 4), dtype=complex)
    expect[0, 0] = expect[1, 1] = expect[2, 2] = 1 / 3
    expect[1, 2] = expect[2, 1] = 1 / 3
    assert np.max(np.abs(red - expect)) <= 1e-12


def test_gw_pair_marginal_pattern():
    # two-qubit marginal on sites (1, k) of a generalized W state:
    # basis order |00>, |0 1_k>, |1_1 0>, |11>
    n, k = 5, 4
    rng = np.random.default_rng(2)
    c = random_gw_coefficients(n, rng)
    v = c.c
    rho = DensityMatrix.from_pure(make_gw(c))
    red = partial_trace(rho, (1, k)).matrix
    bulk = 1.0 - abs(v[1]) ** 2 - abs(v[k]) ** 2
    expect = np.array(
        [
            [bulk, v[0] * np.conj(v[k]), v[0] * np.conj(v[1]), 0],
            [v[k] * np.conj(v[0]), abs(v[k]) ** 2, v[k] * np.conj(v[1]), 0],
            [v[1] * np.conj(v[0]), v[1] * np.conj(v[k]), abs(v[1]) ** 2, 0],
            [0, 0, 0, 0],
        ],
        dtype=complex,
    )
    assert np.max(np.abs(red - expect)) <= 1e-12


def test_g6_bipartite_marginal_spectrum():
    rho = DensityMatrix.from_pure(make_g(6))
    red = partial_trace(rho, (2, 5)).matrix
    n = 6
    expect = np.array(
        [
            [n - 2, 0, 0, 0],
            [0, 2, 2, 0],
            [0, 2, 2, 0],
            [0, 0, 0, n - 2],
        ],
        dtype=complex,
    ) / (2 * n)
    assert np.max(np.abs(red - expect)) <= 1e-12
    assert np.max(np.abs(eigvalsh(red) - np.array([1 / 3, 1 / 3, 1 / 3, 0.0]))) <= 1e-12


def test_partial_trace_properties():
    rng = np.random.default_rng(8)
    m = rng.normal(size=(32, 32)) + 1j * rng.normal(size=(32, 32))
    rho = DensityMatrix(5, (m @ m.conj().T) / np.trace(m @ m.conj().T).real)
    red = partial_trace(rho, (2, 4))
    assert abs(np.trace(red.matrix) - 1.0) <= 1e-12
    assert hermiticity_defect(red.matrix) <= 1e-13
    # tracing in stages agrees with tracing at once
    two = partial_trace(partial_trace(rho, (1, 2, 4)), (1, 3)).matrix
    assert np.max(np.abs(two - partial_trace(rho, (1, 4)).matrix)) <= 1e-13


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(2, np.eye(4, dtype=complex))  # trace 4
    bad = np.eye(4, dtype=complex) / 4
    bad[0, 1] = 1j  # not hermitian
    with pytest.raises(ValueError):
        DensityMatrix(2, bad)
    neg = np.diag([0.6, 0.5, -0.1, 0.0]).astype(complex)
    with pytest.raises(ValueError):
        DensityMatrix(2, neg)


def test_parse_subsets():
    name, subs = parse_subsets("star", 4)
    assert name == "star" and subs == [(1, 2), (1, 3), (1, 4)]
    name, subs = parse_subsets("chain", 4)
    assert name == "chain" and subs == [(1, 2), (2, 3), (3, 4)]
    name, subs = parse_subsets("all-k:2", 4)
    assert len(subs) == 6 and (2, 4) in subs
    name, subs = parse_subsets("star-k:3", 5)
    assert all(s[0] == 1 and len(s) == 3 for s in subs)
    assert len(subs) == 6
    name, subs = parse_subsets("1,2,3;4,5,6", 6)
    assert name == "explicit" and subs == [(1, 2, 3), (4, 5, 6)]
    with pytest.raises(ValueError):
        parse_subsets("star-k:9", 4)
    with pytest.raises(ValueError):
        parse_subsets("1,2;2,7", 4)  # site out of range
    with pytest.raises(ValueError):
        parse_subsets("1,1,2", 4)  # repeated site


def test_marginal_set_and_covers():
    rho = DensityMatrix.from_pure(make_w(4))
    ms = marginal_set(rho, "star")
    assert ms.n_qubits == 4 and len(ms.reduced) == 3
    assert ms.covers_all()
    partial = marginal_set(rho, "1,2;1,3")
    assert not partial.covers_all()


def test_marginals_match():
    a = DensityMatrix.from_pure(make_w(4))
    report = marginals_match(a, a, "all-k:2")
    assert report.matches and report.max_deviation <= 1e-15

    b = DensityMatrix.from_pure(make_gw(random_gw_coefficients(4, np.random.default_rng(3))))
    report = marginals_match(a, b, "star")
    assert not report.matches
    assert report.worst_subset in (((1, 2)), ((1, 3)), ((1, 4)))


def test_gghz_mixture_matches_all_but_one():
    # the diagonal two-term mixture agrees with the generalized GHZ state on
    # every (n-1)-site marginal
    n = 4
    a, b = 0.6, 0.8
    psi = DensityMatrix.from_pure(make_gghz(n, a, b))
    mix = np.zeros((2**n, 2**n), dtype=complex)
    mix[0, 0] = a * a
    mix[-1, -1] = b * b
    sigma = DensityMatrix(n, mix)
    report = marginals_match(psi, sigma, f"all-k:{n - 1}", tol=1e-12)
    assert report.matches


def test_marginal_set_from_parts():
    rho = DensityMatrix.from_pure(make_w(3))
    red = [partial_trace(rho, (1, 2)).matrix, partial_trace(rho, (2, 3)).matrix]
    ms = MarginalSet(3, "chain", [(1, 2), (2, 3)], red)
    assert ms.subsets == [(1, 2), (2, 3)]
    with pytest.raises(ValueError):
        MarginalSet(3, "chain", [(1, 2)], [np.eye(8) / 8])  # wrong dim
