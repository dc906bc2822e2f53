"""Witness search: constraint system, reproducibility, analytic witnesses."""

import numpy as np
import pytest

from qmarg.feasibility import (
    InfeasibleMarginalsError,
    MarginalConstraintSystem,
    gghz_classical_mixture,
    search_witness,
    sign_flipped_gg,
    verify_analytic_witness,
    w_pair_mixture,
)
from qmarg.linalg import is_psd, trace_distance
from qmarg.marginals import DensityMatrix, MarginalSet, marginal_set, ptrace_array
from qmarg.states import (
    make_gg,
    make_gghz,
    make_gw,
    make_w,
    random_gg_coefficients,
    random_gw_coefficients,
)


def test_constraint_system_projects_onto_feasible_set():
    ref = DensityMatrix.from_pure(make_w(3))
    sys_ = MarginalConstraintSystem(marginal_set(ref, "1,2;1,3"))
    assert sys_.residual(ref.matrix) <= 1e-12
    rng = np.random.default_rng(0)
    m = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    x = sys_.project(m + m.conj().T)
    assert sys_.residual(x) <= 1e-9
    # projecting a feasible point is a no-op
    again = sys_.project(x)
    assert np.max(np.abs(again - x)) <= 1e-10


def test_infeasible_marginals_are_rejected():
    a = DensityMatrix.from_pure(make_w(3))
    b = DensityMatrix.from_pure(make_gghz(3, 0.6, 0.8))
    ms = MarginalSet(3, "explicit", [(1, 2), (1, 3)],
                     [ptrace_array(a.matrix, 3, (1, 2)),
                      ptrace_array(b.matrix, 3, (1, 3))])
    with pytest.raises(InfeasibleMarginalsError):
        MarginalConstraintSystem(ms)


def test_search_finds_witnesses_for_underdetermined_w4():
    ref = DensityMatrix.from_pure(make_w(4))
    found = search_witness(ref, "1,2;1,3", seeds=6, max_iters=1500)
    assert len(found) >= 1
    for w in found:
        assert w.residual <= 1e-8
        assert w.trace_distance > 1e-6
        assert is_psd(w.state.matrix)
        assert abs(np.trace(w.state.matrix) - 1.0) <= 1e-9
        for sub in [(1, 2), (1, 3)]:
            dev = np.max(np.abs(ptrace_array(w.state.matrix, 4, sub)
                                - ptrace_array(ref.matrix, 4, sub)))
            assert dev <= 1e-8


def test_search_is_reproducible_per_seed():
    ref = DensityMatrix.from_pure(make_w(4))
    a = search_witness(ref, "1,2;1,3", seeds=3, max_iters=1500)
    b = search_witness(ref, "1,2;1,3", seeds=3, max_iters=1500)
    assert [w.seed for w in a] == [w.seed for w in b]
    for wa, wb in zip(a, b):
        assert np.max(np.abs(wa.state.matrix - wb.state.matrix)) <= 1e-12
        assert abs(wa.trace_distance - wb.trace_distance) <= 1e-12


def test_search_returns_nothing_when_marginals_pin_the_state():
    rng = np.random.default_rng(4)
    ref = DensityMatrix.from_pure(make_gw(random_gw_coefficients(3, rng)))
    found = search_witness(ref, "star", seeds=8, max_iters=2000)
    assert found == []


def test_gw_star_witness_exists_without_site_one():
    # dropping the hub site from every pair leaves the state undetermined
    ref = DensityMatrix.from_pure(make_w(3))
    found = search_witness(ref, "2,3", seeds=4, max_iters=1500)
    assert len(found) >= 1


def test_sign_flip_witness_matches_small_marginals():
    rng = np.random.default_rng(11)
    coeffs = random_gg_coefficients(6, rng)
    ref = DensityMatrix.from_pure(make_gg(coeffs))
    flipped = DensityMatrix.from_pure(sign_flipped_gg(coeffs))
    report = verify_analytic_witness(ref, flipped, "all-k:3", tol=1e-10)
    assert report.matches
    assert report.trace_distance > 1e-4
    # but the two (N-2)-site marginals tell them apart
    bigger = verify_analytic_witness(ref, flipped, "1,2,3,4;3,4,5,6")
    assert not bigger.matches


def test_w_pair_mixture_witness():
    rng = np.random.default_rng(12)
    coeffs = random_gg_coefficients(6, rng)
    ref = DensityMatrix.from_pure(make_gg(coeffs))
    mix = w_pair_mixture(coeffs)
    assert is_psd(mix.matrix)
    report = verify_analytic_witness(ref, mix, "all-k:3", tol=1e-10)
    assert report.matches
    assert report.trace_distance > 1e-4


def test_gghz_mixture_trace_distance_closed_form():
    rng = np.random.default_rng(13)
    for n in (3, 4):
        for _ in range(3):
            v = rng.normal(size=2) + 1j * rng.normal(size=2)
            a, b = v / np.linalg.norm(v)
            psi = DensityMatrix.from_pure(make_gghz(n, a, b))
            mix = gghz_classical_mixture(n, a, b)
            report = verify_analytic_witness(psi, mix, f"all-k:{n - 1}",
                                             tol=1e-12)
            assert report.matches
            # the difference lives on the corner coherence, trace norm 2|ab|
            assert abs(trace_distance(psi.matrix, mix.matrix) - abs(a * b)) <= 1e-9


def test_search_caps_system_size():
    ref = DensityMatrix.from_pure(make_w(3))
    with pytest.raises(ValueError):
        search_witness(ref, "star", seeds=0)
