"""State factories, local operations, canonical forms, symmetric-sector tools."""

import numpy as np
import pytest

from qmarg.linalg import eigvalsh, kron_all
from qmarg.marginals import DensityMatrix, partial_trace
from qmarg.states import (
    DickeCoefficients,
    GGCoefficients,
    GWCoefficients,
    LocalOperator,
    apply_local,
    canonicalize_w,
    dicke42_invariant,
    dicke_slocc_sectors,
    fidelity,
    make_dicke,
    make_g,
    make_gg,
    make_gghz,
    make_gw,
    make_w,
    random_dicke_coefficients,
    random_gg_coefficients,
    random_gw_coefficients,
    random_local_operator,
    uniform_dicke_coefficients,
    weight_one_index,
)


def test_make_w_amplitudes():
    w3 = make_w(3)
    amp = w3.amplitudes
    # |100>, |010>, |001> sit at indices 4, 2, 1 (qubit 1 = most significant)
    for idx in (4, 2, 1):
        assert abs(amp[idx] - 1 / np.sqrt(3)) <= 1e-15
    assert abs(np.linalg.norm(amp) - 1.0) <= 1e-12


def test_weight_one_index():
    assert weight_one_index(3, 1) == 4
    assert weight_one_index(3, 3) == 1
    assert weight_one_index(5, 2) == 8


def test_make_gw():
    c = GWCoefficients(3, np.array([0.5, 0.5, 0.5, 0.5]))
    psi = make_gw(c)
    amp = psi.amplitudes
    assert abs(amp[0] - 0.5) <= 1e-15
    for k in (1, 2, 3):
        assert abs(amp[weight_one_index(3, k)] - 0.5) <= 1e-15
    # everything else zero
    assert abs(amp[3]) == 0 and abs(amp[5]) == 0 and abs(amp[6]) == 0 and abs(amp[7]) == 0


def test_gw_coefficient_validation():
    with pytest.raises(ValueError):
        GWCoefficients(2, np.array([1.0, 0.0, 0.0]))  # first site amplitude zero
    with pytest.raises(ValueError):
        GWCoefficients(2, np.array([0.5, 0.5, 0.5]))  # not normalized
    with pytest.warns(UserWarning):
        GWCoefficients(2, np.array([0.0, 1.0, 0.0]))  # too sparse


def test_make_gghz():
    psi = make_gghz(3, 1 / np.sqrt(2), 1 / np.sqrt(2))
    assert abs(psi.amplitudes[0] - 1 / np.sqrt(2)) <= 1e-15
    assert abs(psi.amplitudes[7] - 1 / np.sqrt(2)) <= 1e-15
    with pytest.raises(ValueError):
        make_gghz(3, 1.0, 0.0)  # degenerate: product state, not GHZ-class
    with pytest.raises(ValueError):
        make_gghz(3, 0.8, 0.8)  # not normalized


def test_make_dicke_uniform():
    psi = make_dicke(uniform_dicke_coefficients(4, 2))
    amp = psi.amplitudes
    nz = np.flatnonzero(np.abs(amp) > 1e-15)
    assert len(nz) == 6
    for idx in nz:
        assert bin(idx).count("1") == 2
        assert abs(amp[idx] - 1 / np.sqrt(6)) <= 1e-15


def test_dicke_coefficient_validation():
    with pytest.raises(ValueError):
        DickeCoefficients(4, 3, np.ones(4) / 2.0)  # ell > n // 2
    with pytest.raises(ValueError):
        DickeCoefficients(4, 2, np.ones(5) / np.sqrt(5))  # wrong count
    with pytest.warns(UserWarning):
        v = np.zeros(6, dtype=complex)
        v[0] = 1.0
        DickeCoefficients(4, 2, v)  # zero entries: degenerate family member


def test_make_g_is_w_plus_wbar():
    g = make_g(3)
    amp = g.amplitudes
    for idx in (1, 2, 4, 3, 5, 6):  # weight 1 and weight 2 strings
        assert abs(amp[idx] - 1 / np.sqrt(6)) <= 1e-15
    assert abs(amp[0]) == 0 and abs(amp[7]) == 0


def test_make_gg_reduces_to_g():
    n = 5
    s = 1 / np.sqrt(2 * n)
    coeff = GGCoefficients(n, np.full(n, s), np.full(n, s))
    assert fidelity(make_gg(coeff), make_g(n)) >= 1 - 1e-12


def test_gg_validation():
    with pytest.raises(ValueError):
        GGCoefficients(4, np.ones(4) * 0.35, np.ones(4) * 0.35)  # needs n >= 5
    a = np.full(5, np.sqrt(0.1))
    b = np.full(5, np.sqrt(0.125), dtype=complex)
    b[-1] = 0.0  # joint norm is 1 but one product a_K * b_K vanishes
    with pytest.raises(ValueError):
        GGCoefficients(5, a, b)


def test_state_phase_convention():
    psi = make_w(3)
    scaled = type(psi)(3, np.exp(1j * 0.7) * psi.amplitudes)
    assert np.max(np.abs(scaled.amplitudes - psi.amplitudes)) <= 1e-12


def test_apply_local_diag_restores_uniform_w():
    # site-wise diagonal maps carry a weighted W to the uniform W
    n = 3
    w = np.array([0.5, 1.0, 2.0])
    amp = np.zeros(8, dtype=complex)
    for k in range(1, n + 1):
        amp[weight_one_index(n, k)] = w[k - 1]
    amp /= np.linalg.norm(amp)
    psi = type(make_w(n))(n, amp)
    factors = [np.diag([1.0, 1.0 / w[k - 1]]).astype(complex) for k in range(1, n + 1)]
    op = LocalOperator(factors)
    out, prenorm = apply_local(op, psi)
    assert fidelity(out, make_w(n)) >= 1 - 1e-12
    assert prenorm > 0


def test_apply_local_unitary_preserves_norm():
    rng = np.random.default_rng(11)
    op = random_local_operator(4, rng, kind="unitary")
    out, prenorm = apply_local(op, make_w(4))
    assert abs(prenorm - 1.0) <= 1e-12
    assert abs(np.linalg.norm(out.amplitudes) - 1.0) <= 1e-12


def test_local_operator_rejects_singular_factor():
    with pytest.raises(ValueError):
        LocalOperator([np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)])


def test_canonicalize_w_roundtrip():
    # (tensor U_k) GW(c) must equal the normalized image A|W> exactly
    rng = np.random.default_rng(21)
    for n in (3, 4, 5):
        op = random_local_operator(n, rng, kind="invertible")
        image, _ = apply_local(op, make_w(n))
        coeff, unitaries = canonicalize_w(op)
        assert np.all(coeff.c.real >= 0) and np.max(np.abs(coeff.c.imag)) == 0
        assert abs(np.linalg.norm(coeff.c) - 1.0) <= 1e-10
        rebuilt, _ = apply_local(LocalOperator(unitaries), make_gw(coeff))
        assert fidelity(rebuilt, image) >= 1 - 1e-9


def test_canonicalize_w_diagonal_case():
    # diagonal invertible factors: no |0...0> component, weights proportional
    # to the per-site diagonal ratios
    n = 3
    d = np.array([1.0, np.sqrt(3.0), 2.0])
    factors = [np.diag([1.0, d[k]]).astype(complex) for k in range(n)]
    coeff, _ = canonicalize_w(LocalOperator(factors))
    assert abs(coeff.c[0]) <= 1e-12
    expect = d / np.linalg.norm(d)
    assert np.max(np.abs(coeff.c[1:] - expect)) <= 1e-12


def test_dicke_sectors_against_kron_oracle():
    rng = np.random.default_rng(31)
    n, ell = 4, 2
    coeff = random_dicke_coefficients(n, ell, rng)
    psi = make_dicke(coeff)
    factors = []
    for _ in range(n):
        m = np.array(
            [[1.0, rng.normal() + 1j * rng.normal()], [0.0, 1.0 + rng.normal() * 0.3]],
            dtype=complex,
        )
        factors.append(m)
    masses = dicke_slocc_sectors(LocalOperator(factors), coeff)
    # oracle: build the image with a dense kron product, renormalize, bin by weight
    image = kron_all(factors) @ psi.amplitudes
    image = image / np.linalg.norm(image)
    expect = np.zeros(n + 1)
    for idx, a in enumerate(image):
        expect[bin(idx).count("1")] += abs(a) ** 2
    assert np.max(np.abs(masses - expect)) <= 1e-12
    # upper-triangular factors never raise the excitation number
    assert np.all(masses[ell + 1 :] <= 1e-14)


def test_dicke_sectors_rejects_lower_triangular():
    n = 4
    bad = [np.eye(2, dtype=complex) for _ in range(n)]
    bad[1] = np.array([[1.0, 0.0], [0.5, 1.0]], dtype=complex)
    with pytest.raises(ValueError):
        dicke_slocc_sectors(LocalOperator(bad), uniform_dicke_coefficients(4, 2))


def test_dicke42_invariant_values():
    # uniform coefficients: the invariant vanishes
    assert abs(dicke42_invariant(uniform_dicke_coefficients(4, 2))) <= 1e-15
    # hand value: (1,1,1,1,2,1)/3 gives a*f*(c*d - b*e) = (1/9)*(2/9 - 1/9)
    v = np.array([1.0, 1, 1, 1, 2, 1]) / 3.0
    assert abs(dicke42_invariant(DickeCoefficients(4, 2, v)) - (-1 / 81)) <= 1e-15


def test_dicke42_invariant_zero_coefficient():
    with pytest.warns(UserWarning):
        v = np.zeros(6, dtype=complex)
        v[1:] = 1 / np.sqrt(5)
        coeff = DickeCoefficients(4, 2, v)
    assert dicke42_invariant(coeff) == 0


def test_bipartite_spectrum_local_unitary_invariant():
    rng = np.random.default_rng(41)
    psi = make_gw(random_gw_coefficients(4, rng))
    op = random_local_operator(4, rng, kind="unitary")
    out, _ = apply_local(op, psi)
    for keep in [(1, 2), (1, 3), (2, 4)]:
        w0 = eigvalsh(partial_trace(DensityMatrix.from_pure(psi), keep).matrix)
        w1 = eigvalsh(partial_trace(DensityMatrix.from_pure(out), keep).matrix)
        assert np.max(np.abs(w0 - w1)) <= 1e-10


def test_random_instances_are_generic_and_seeded():
    rng = np.random.default_rng(5)
    c = random_gw_coefficients(6, rng)
    assert np.min(np.abs(c.c)) >= 0.05
    c2 = random_gw_coefficients(6, np.random.default_rng(5))
    assert np.max(np.abs(c.c - c2.c)) == 0
    g = random_gg_coefficients(6, np.random.default_rng(6))
    assert np.min(np.abs(np.concatenate([g.a, g.b]))) >= 0.05
