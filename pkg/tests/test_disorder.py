import math

import numpy as np
import pytest

from etachain.disorder import (
    KINDS,
    DisorderSpec,
    realization_seed,
    run_sweep,
    sample_realization,
)
from etachain.fock import build_basis
from etachain.model_ops import build_eta, build_hubbard, clean_model, interaction_term
from etachain.model_ops import hd_projector


@pytest.fixture(scope="module")
def base():
    return clean_model(4, "pbc", 1.0, 8.0, (1,))


def test_zero_width_returns_base(base):
    spec = DisorderSpec(kind="interaction_WU", width=0.0, n_realizations=5, seed=1)
    for k in range(5):
        assert sample_realization(spec, base, k) == base


def test_determinism_bit_identical(base):
    spec = DisorderSpec(kind="potential_Wmu", width=1.5, n_realizations=10, seed=77)
    a = sample_realization(spec, base, 3)
    b = sample_realization(spec, base, 3)
    assert a == b
    c = sample_realization(spec, base, 4)
    assert a != c
    # different master seed, different draw
    spec2 = DisorderSpec(kind="potential_Wmu", width=1.5, n_realizations=10, seed=78)
    assert sample_realization(spec2, base, 3) != a


def test_interaction_draw_range(base):
    w = 4.0
    spec = DisorderSpec(kind="interaction_WU", width=w, n_realizations=20, seed=3)
    for k in range(20):
        u = np.array(sample_realization(spec, base, k).params.u_site)
        assert np.all(u >= 8.0 - w) and np.all(u <= 8.0 + w)


def test_angle_draw_range(base):
    w = 0.3 * math.pi
    spec = DisorderSpec(kind="angle_Wtheta", width=w, n_realizations=30, seed=9)
    for k in range(30):
        model = sample_realization(spec, base, k)
        for ch in model.channels:
            assert math.pi / 2 - w <= ch.angle <= math.pi / 2 + w


def test_gamma_draw_clipped_nonnegative(base):
    spec = DisorderSpec(kind="gamma_Wgamma", width=3.0, n_realizations=40, seed=2)
    rates = [sample_realization(spec, base, k).channels[0].rate for k in range(40)]
    assert min(rates) >= 0.0
    assert max(rates) <= 4.0


def test_zeeman_realization_commutes_with_eta(base):
    spec = DisorderSpec(kind="zeeman_WZ", width=2.0, n_realizations=5, seed=5)
    model = sample_realization(spec, base, 0)
    basis = build_basis(model.lattice)
    H = build_hubbard(basis, model.lattice, model.params)
    Hc = build_hubbard(basis, base.lattice, base.params)
    hz = (H - Hc).tocsr()  # the Zeeman part alone
    for j in (1, 2):
        for comp in ("plus", "y", "z"):
            e = build_eta(basis, j, comp)
            c = (hz @ e - e @ hz).tocsr()
            assert (np.abs(c.data).max() if c.nnz else 0.0) < 1e-12


def test_interaction_realization_hd_constant(base):
    spec = DisorderSpec(kind="interaction_WU", width=4.0, n_realizations=5, seed=6)
    model = sample_realization(spec, base, 2)
    basis = build_basis(model.lattice)
    u_site = np.array(model.params.u_site)
    hu = interaction_term(basis, u_site)
    phd = None
    for i in range(1, 5):
        p = hd_projector(basis, i)
        phd = p if phd is None else (phd @ p).tocsr()
    resid = (phd @ hu @ phd - (u_site.sum() / 4.0) * phd).tocsr()
    assert (np.abs(resid.data).max() if resid.nnz else 0.0) < 1e-12


def test_loss_kind_adds_channels_everywhere(base):
    spec = DisorderSpec(kind="loss_kappa", width=0.5, n_realizations=100, seed=1)
    assert spec.realizations_for(0.5) == 1  # deterministic addition, no draws
    model = sample_realization(spec, base, 0)
    loss = [ch for ch in model.channels if ch.kind == "particle_loss"]
    assert len(loss) == 2 * 4  # every (site, spin)
    assert all(ch.rate == 0.5 for ch in loss)
    assert {(ch.site, ch.spin) for ch in loss} == {
        (i, s) for i in range(1, 5) for s in ("up", "down")
    }


def test_dephasing_kind(base):
    spec = DisorderSpec(kind="dephasing_kappa_phi", width=0.25, n_realizations=3, seed=1)
    model = sample_realization(spec, base, 0)
    deph = [ch for ch in model.channels if ch.kind == "dephasing"]
    assert len(deph) == 8 and all(ch.rate == 0.25 for ch in deph)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError, match="kind"):
        DisorderSpec(kind="gravity", width=1.0)


def test_seed_key_structure():
    spec = DisorderSpec(kind="bond_Wt", width=0.5, n_realizations=2, seed=11)
    key = realization_seed(spec, 0.5, 1)
    assert key[0] == 11
    assert key[1] == KINDS.index("bond_Wt")
    assert key[3] == 1


def test_run_sweep_aggregation_and_failures(base):
    spec = DisorderSpec(kind="interaction_WU", n_realizations=4, seed=13,
                        sweep_grid=(0.0, 2.0))

    def fake_pipeline(model):
        u = np.array(model.params.resolved(model.lattice)["u_site"])
        if u[0] > 9.5:  # inject a failure for one realization class
            raise RuntimeError("solver blew up")
        return {"phi_sum": 2.0 + 0j, "corr_sum": 1.0 + 0j, "converged": True}

    result = run_sweep(spec, base, fake_pipeline, workers=1)
    assert [row.width for row in result.rows] == [0.0, 2.0]
    clean_row = result.rows[0]
    assert clean_row.n_ok == 1 and clean_row.n_failed == 0  # W=0 collapses to one run
    assert clean_row.phi_mean == pytest.approx(0.5)
    assert clean_row.corr_mean == pytest.approx(0.25)
    noisy_row = result.rows[1]
    assert noisy_row.n_ok + noisy_row.n_failed == 4
    failed = [rec for rec in result.records if rec.failed]
    assert all(rec.error and "solver blew up" in rec.error for rec in failed)
    assert result.r_half == 2


def _mu_sum_pipeline(model):
    # module-level so the worker pool can pickle it
    mu = model.params.resolved(model.lattice)["mu_site"]
    return {"phi_sum": complex(np.sum(mu)), "corr_sum": 0.5 + 0j, "converged": True}


def test_run_sweep_worker_count_invariance(base):
    spec = DisorderSpec(kind="potential_Wmu", n_realizations=3, seed=21,
                        sweep_grid=(1.0,))
    seq = run_sweep(spec, base, _mu_sum_pipeline, workers=1)
    par = run_sweep(spec, base, _mu_sum_pipeline, workers=2)
    assert [r.phi_mean for r in seq.rows] == [r.phi_mean for r in par.rows]
