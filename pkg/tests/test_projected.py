import math
from itertools import chain, combinations

import numpy as np
import pytest
import scipy.linalg as la

from etachain.fock import vacuum_state
from etachain.model_ops import build_model_operators, clean_model, dark_state
from etachain.projected import (
    ID2,
    SY,
    PseudospinSpace,
    build_effective_generator,
    dissipative_gap,
    effective_spectrum,
    reference_toy_liouvillian,
    rotated_lowering,
    toy_qubit_suite,
    verify_triangular,
    x_rotation,
)
from etachain.superop import DensityState, steady_state, vectorize


def subsets(n):
    return list(chain.from_iterable(combinations(range(1, n + 1), k) for k in range(1, n + 1)))


def test_rotation_identity():
    # e^{-i pi/2 sx} sz e^{i pi/2 sx} = -sy as a 2x2 identity
    sz = 0.5 * np.diag([1.0, -1.0]).astype(complex)
    lhs = x_rotation(-math.pi / 2) @ sz @ x_rotation(math.pi / 2)
    assert np.allclose(lhs, -SY, atol=1e-15)


def test_compact_dissipator_identity():
    # L^dag L = gamma/2 - gamma s^y on the doublet
    gamma = 1.7
    K = math.sqrt(gamma) * rotated_lowering(math.pi / 2)
    assert np.allclose(K.conj().T @ K, gamma * (0.5 * ID2 - SY), atol=1e-15)


def test_local_k_matrix_in_y_basis():
    # first column vanishes; explicit form [[0, -i sqrt2/2], [0, i sqrt2/2]]
    from etachain.projected import V_Y

    K = rotated_lowering(math.pi / 2)
    Ky = V_Y.conj().T @ K @ V_Y
    expected = np.array([[0, -1j * math.sqrt(2) / 2], [0, 1j * math.sqrt(2) / 2]])
    assert np.allclose(Ky, expected, atol=1e-15)


def test_single_site_diagonal_contribution():
    # anticommutator part alone carries the multiset {0, -g/2, -g/2, -g}
    from etachain.projected import _diagonal_part

    space = PseudospinSpace(1)
    D = _diagonal_part(space, (1,), 1.0)
    W = space.y_transform()
    Dy = (W.conj().T @ D @ W).toarray()
    assert np.allclose(Dy, np.diag(Dy.diagonal()), atol=1e-15)
    assert np.allclose(np.sort(Dy.diagonal().real), [-1.0, -0.5, -0.5, 0.0], atol=1e-14)


def test_generator_matches_single_site_microscopics():
    # for one pseudospin the projected generator is the toy-qubit Liouvillian
    L = build_effective_generator(1, (1,), 1.0, representation="z").toarray()
    assert np.max(np.abs(L - reference_toy_liouvillian(1.0))) < 1e-14


def test_generator_annihilates_product_dark_state():
    vplus = (np.array([1.0, 1j]) / math.sqrt(2)).astype(complex)
    for n, js in ((1, (1,)), (2, (1,)), (3, (1, 3)), (3, (2,))):
        L = build_effective_generator(n, js, 1.0, representation="z")
        # interleaved vec of the product |+y><+y| state: ket v+, bra conj(v+)
        vec = np.array([1.0], dtype=complex)
        for _ in range(n):
            vec = np.kron(vec, np.kron(vplus, vplus.conj()))
        assert np.linalg.norm(L @ vec) < 1e-14


@pytest.mark.parametrize("n", [1, 2, 3])
def test_triangularity_all_driven_sets(n):
    for js in subsets(n):
        Ly = build_effective_generator(n, js, 1.0, representation="y")
        report = verify_triangular(Ly)
        assert report.is_strictly_triangular_below_diagonal
        assert report.max_violation <= 1e-14


def test_triangularity_negative_controls():
    # non-conjugated bra basis: the recycling term has sub-diagonal weight
    Lnaive = build_effective_generator(2, (1,), 1.0, representation="y_naive")
    assert not verify_triangular(Lnaive).is_strictly_triangular_below_diagonal
    # permuted ordering (minus before plus): fails as well
    space = PseudospinSpace(2)
    W = space.y_transform(descending=False)
    Lz = build_effective_generator(2, (1,), 1.0, representation="z")
    Lperm = (W.conj().T @ Lz @ W).toarray()
    assert not verify_triangular(Lperm).is_strictly_triangular_below_diagonal


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_spectrum_closed_form_and_gap(n):
    for js in subsets(n):
        spec = effective_spectrum(n, js, 1.0)  # verify=True cross-checks Schur
        assert abs(spec[0]) < 1e-14
        # multiplicity of -k/2 is C(|J|,k) 3^k 4^(N-|J|)
        from math import comb

        j = len(js)
        for k in range(j + 1):
            count = int(np.sum(np.isclose(spec.real, -0.5 * k, atol=1e-12)))
            assert count == comb(j, k) * 3 ** k * 4 ** (n - j)
        assert dissipative_gap(n, js, 1.0) == pytest.approx(0.5)


def test_spectrum_scales_with_gamma():
    spec = effective_spectrum(2, (1, 2), gamma=3.0, verify=True)
    assert dissipative_gap(2, (1, 2), gamma=3.0) == pytest.approx(1.5)
    assert spec.min() == pytest.approx(-3.0)


def test_zero_mode_multiplicity_counts_undriven_sites():
    spec = effective_spectrum(3, (1,), 1.0, verify=False)
    assert int(np.sum(np.abs(spec) < 1e-12)) == 4 ** 2


def test_empty_driven_set_rejected():
    with pytest.raises(ValueError):
        build_effective_generator(3, (), 1.0)
    with pytest.raises(ValueError):
        effective_spectrum(3, (), 1.0)


def test_toy_qubit_dark_state_geometry():
    for theta in (0.0, math.pi / 4, math.pi / 2, math.pi):
        suite = toy_qubit_suite(theta, 1.0)
        expected = np.outer(suite.dark_state, suite.dark_state.conj())
        assert np.max(np.abs(suite.steady_rho - expected)) < 1e-10
        # dark state is annihilated by the jump for every theta
        K = rotated_lowering(theta)
        assert np.linalg.norm(K @ suite.dark_state) < 1e-14


def test_toy_qubit_half_pi_values():
    suite = toy_qubit_suite(math.pi / 2, 1.0)
    assert np.max(np.abs(suite.liouvillian - reference_toy_liouvillian(1.0))) <= 1e-14
    psi = (np.array([-1j, 1.0]) / math.sqrt(2)).astype(complex)  # (|dn> - i|up>)/sqrt2
    fidelity = np.real(np.vdot(psi, suite.steady_rho @ psi))
    assert fidelity >= 1 - 1e-12
    splus = np.array([[0, 1], [0, 0]], dtype=complex)
    assert np.trace(suite.steady_rho @ splus) == pytest.approx(0.5j, abs=1e-12)
    assert not suite.degenerate
    assert np.allclose(np.sort(suite.spectrum.real), [-0.5, -0.5, -0.5, 0.0], atol=1e-12)


def test_toy_qubit_limits_degenerate():
    # theta = 0 (amplitude damping) has spectrum {0,-1/2,-1/2,-1}; theta = pi
    # is the dephasing limit with a doubly degenerate kernel
    s0 = toy_qubit_suite(0.0, 1.0)
    assert np.allclose(np.sort(s0.spectrum.real), [-1.0, -0.5, -0.5, 0.0], atol=1e-12)
    spi = toy_qubit_suite(math.pi, 1.0)
    assert spi.degenerate
    assert np.allclose(spi.steady_rho, np.diag([1.0, 0.0]), atol=1e-10)


def test_full_model_consistency_with_projected_prediction():
    # microscopic steady state from the vacuum = product +y dark state, N = 2, 3
    for n, t_max in ((2, 800.0), (3, 2000.0)):
        model = clean_model(n, "obc", 1.0, 8.0, (1,))
        basis, H, jumps = build_model_operators(model)
        L = vectorize(H, jumps)
        res = steady_state(L, rho0=DensityState.pure(vacuum_state(basis)),
                           method="evolve", t_max=t_max, check_uniqueness=False)
        dvec = dark_state(basis)
        fidelity = float(np.real(np.vdot(dvec, res.state.rho() @ dvec)))
        assert fidelity >= 1 - 1e-6
