import numpy as np
import pytest

from etachain.fock import LatticeSpec, build_basis, vacuum_state
from etachain.model_ops import build_multiplet_state, dark_state
from etachain.observables import (
    EnsembleEstimate,
    check_bounds,
    corr_profile,
    corr_r,
    disorder_estimators,
    estimate_from_sums,
    expectation,
    hd_weighted_identity,
    pair_amplitude,
    pair_correlator,
    structure_factor,
)
from etachain.superop import DensityState


@pytest.fixture(scope="module")
def basis4():
    return build_basis(LatticeSpec(4, "pbc"))


def random_density(basis, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(basis.dim, basis.dim)) + 1j * rng.normal(size=(basis.dim, basis.dim))
    rho = a @ a.conj().T
    rho /= rho.trace()
    return DensityState.from_rho(rho)


def test_vacuum_has_no_coherence(basis4):
    vac = DensityState.pure(vacuum_state(basis4))
    phis, phi = pair_amplitude(vac.vec, basis4)
    assert np.allclose(phis, 0.0)
    assert phi == 0.0
    assert pair_correlator(vac.vec, basis4, 1, 2) == 0.0
    assert structure_factor(vac.vec, basis4) == 0.0


def test_dark_state_values(basis4):
    rho = DensityState.pure(dark_state(basis4))
    phis, phi = pair_amplitude(rho.vec, basis4)
    assert np.allclose(np.abs(phis), 0.5, atol=1e-12)
    assert abs(phi) == pytest.approx(0.5, abs=1e-12)
    for i in range(1, 5):
        for j in range(1, 5):
            if i != j:
                c = pair_correlator(rho.vec, basis4, i, j)
                assert abs(c) == pytest.approx(0.25, abs=1e-12)
    for r in (1, 2, 3):
        assert abs(corr_r(rho.vec, basis4, r)) == pytest.approx(0.25, abs=1e-12)
    assert abs(structure_factor(rho.vec, basis4)) == pytest.approx(0.25, abs=1e-12)


def test_multiplet_states_have_zero_amplitude():
    basis = build_basis(LatticeSpec(3))
    for m in (1, 2):
        rho = DensityState.pure(build_multiplet_state(basis, m))
        phis, _ = pair_amplitude(rho.vec, basis)
        assert np.allclose(np.abs(phis), 0.0, atol=1e-12)


def test_diagonal_correlator_identity():
    # C_ii equals Tr(rho (1/2 + eta_i^z) P_HD,i) on any state
    basis = build_basis(LatticeSpec(2))
    rho = random_density(basis, seed=3)
    for i in (1, 2):
        direct = pair_correlator(rho.vec, basis, i, i)
        via_identity = expectation(rho.vec, hd_weighted_identity(basis, i), basis.dim)
        assert direct == pytest.approx(via_identity, abs=1e-12)


def test_hermiticity_pairing():
    basis = build_basis(LatticeSpec(3))
    rho = random_density(basis, seed=8)
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            cij = pair_correlator(rho.vec, basis, i, j)
            cji = pair_correlator(rho.vec, basis, j, i)
            assert cij == pytest.approx(np.conj(cji), abs=1e-12)


def test_bounds_hold_on_physical_states(basis4):
    for seed in range(3):
        rho = random_density(basis4, seed=seed)
        phis, _ = pair_amplitude(rho.vec, basis4)
        corrs = {(1, j): pair_correlator(rho.vec, basis4, 1, j) for j in (2, 3, 4)}
        check_bounds(phis, corrs)  # raises on violation


def test_bounds_raise_on_violation():
    with pytest.raises(AssertionError):
        check_bounds(np.array([0.6]))


def test_corr_profile_obc():
    basis = build_basis(LatticeSpec(3))
    rho = DensityState.pure(dark_state(basis))
    prof = corr_profile(rho.vec, basis, i0=1)
    assert set(prof) == {1, 2}
    assert abs(prof[2]) == pytest.approx(0.25, abs=1e-12)


def test_corr_r_range_errors(basis4):
    rho = DensityState.pure(vacuum_state(basis4))
    with pytest.raises(ValueError):
        corr_r(rho.vec, basis4, 0)
    with pytest.raises(ValueError):
        corr_r(rho.vec, basis4, 4)


def test_structure_factor_needs_two_sites():
    basis = build_basis(LatticeSpec(1))
    rho = DensityState.pure(vacuum_state(basis))
    with pytest.raises(ValueError):
        structure_factor(rho.vec, basis)


def test_disorder_estimators_identical_ensemble(basis4):
    rho = DensityState.pure(dark_state(basis4))
    phi_est, corr_est = disorder_estimators([rho, rho, rho], basis4, r=2)
    assert phi_est.mean == pytest.approx(0.5, abs=1e-12)
    assert corr_est.mean == pytest.approx(0.25, abs=1e-12)
    assert phi_est.se == 0.0 and corr_est.se == 0.0
    assert phi_est.n == 3


def test_disorder_estimators_empty_rejected(basis4):
    with pytest.raises(ValueError):
        disorder_estimators([], basis4, r=2)


def test_estimate_from_sums_se():
    est = estimate_from_sums(np.array([4.0, 2.0]), n_sites=4)
    assert isinstance(est, EnsembleEstimate)
    assert est.mean == pytest.approx(0.75)
    # sample std of (1.0, 0.5) over sqrt(2)
    assert est.se == pytest.approx(np.std([1.0, 0.5], ddof=1) / np.sqrt(2))
