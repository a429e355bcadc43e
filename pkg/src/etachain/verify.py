"""Verification suites behind `etachain verify`: each check returns
(max violation, tolerance) so the CLI can print one line per check."""

from __future__ import annotations

import math
from itertools import chain, combinations

import numpy as np

from .experiments import run_symmetry_suite
from .fock import vacuum_state
from .model_ops import build_model_operators, clean_model, dark_state
from .projected import (
    build_effective_generator,
    effective_spectrum,
    reference_toy_liouvillian,
    toy_qubit_suite,
    verify_triangular,
)
from .superop import DensityState, steady_state, vectorize

EXACT = 1e-12
TIGHT = 1e-10


def _nonempty_subsets(n: int):
    sites = range(1, n + 1)
    return chain.from_iterable(combinations(sites, k) for k in range(1, n + 1))


def suite_algebra(n_max: int = 4) -> dict:
    checks = run_symmetry_suite(n_max=n_max)
    out = {}
    for name, violation in checks.items():
        if name.endswith("_measured"):
            # reported, not asserted (frustrated odd-N PBC wrap bond)
            out[name] = (violation, math.inf)
        elif "multiplet" in name or "dark_state" in name:
            out[name] = (violation, TIGHT)
        else:
            out[name] = (violation, EXACT)
    return out


def suite_appendix_a(**_kw) -> dict:
    suite = toy_qubit_suite(math.pi / 2, 1.0)
    ref = reference_toy_liouvillian(1.0)
    dev_matrix = float(np.max(np.abs(suite.liouvillian - ref)))
    rho_ref = 0.5 * np.array([[1, -1j], [1j, 1]], dtype=complex)
    dev_ss = float(np.max(np.abs(suite.steady_rho - rho_ref)))
    coh = complex(np.trace(suite.steady_rho @ np.array([[0, 1], [0, 0]])))
    dev_coh = abs(coh - 0.5j)
    n_zero = int(np.sum(np.abs(suite.spectrum) < 1e-9))
    re_rest = float(max(suite.spectrum.real[1:]))  # after descending sort
    return {
        "liouvillian_matches_reference": (dev_matrix, 1e-14),
        "steady_state_matrix": (dev_ss, 1e-10),
        "transverse_coherence_i_over_2": (dev_coh, 1e-10),
        "unique_zero_mode": (float(n_zero - 1), 0.5),
        "all_other_modes_decay": (re_rest + 0.5, 1e-9),  # Re lambda = -gamma/2
    }


def suite_appendix_c(n_max: int = 4, **_kw) -> dict:
    out = {}
    for n in range(1, n_max + 1):
        worst_tri = 0.0
        worst_spec = 0.0
        worst_gap = 0.0
        for js in _nonempty_subsets(n):
            Ly = build_effective_generator(n, js, 1.0, representation="y")
            tri = verify_triangular(Ly)
            worst_tri = max(worst_tri, tri.max_violation)
            spec = effective_spectrum(n, js, 1.0, verify=False)
            diag = np.sort(Ly.diagonal().real)[::-1]
            worst_spec = max(worst_spec, float(np.max(np.abs(diag - spec.real))))
            nonzero = np.abs(spec.real[np.abs(spec.real) > 1e-12])
            worst_gap = max(worst_gap, abs(float(nonzero.min()) - 0.5))
        out[f"N{n}:triangularity"] = (worst_tri, 1e-14)
        out[f"N{n}:spectrum_closed_form"] = (worst_spec, TIGHT)
        out[f"N{n}:gap_half_gamma"] = (worst_gap, TIGHT)
    return out


def suite_consistency(n_max: int = 3, **_kw) -> dict:
    """Full microscopic steady state vs the projected product dark state
    (the regime where projected and microscopic fixed points coincide; N <= 3)."""
    out = {}
    for n in range(2, min(n_max, 3) + 1):
        model = clean_model(n, "obc", 1.0, 8.0, (1,))
        basis, H, jumps = build_model_operators(model)
        L = vectorize(H, jumps)
        rho0 = DensityState.pure(vacuum_state(basis))
        # detuned coherences decay at ~6e-3 gamma; the 1e-6 fidelity window
        # needs a few thousand gamma^-1 of propagation at N = 3
        res = steady_state(L, rho0=rho0, method="evolve", t_max=2000.0,
                           check_uniqueness=False)
        dvec = dark_state(basis)
        fidelity = float(np.real(np.vdot(dvec, res.state.rho() @ dvec)))
        out[f"N{n}:steady_vs_projected_infidelity"] = (1.0 - fidelity, 1e-6)
        out[f"N{n}:dark_state_residual"] = (
            float(np.linalg.norm(L.matrix @ DensityState.pure(dvec).vec)),
            1e-9,
        )
    return out


SUITES = {
    "algebra": suite_algebra,
    "appendixA": suite_appendix_a,
    "appendixC": suite_appendix_c,
    "consistency": suite_consistency,
}


def run_suite(name: str, n_max: int = 4) -> dict:
    if name not in SUITES:
        raise ValueError(f"unknown verify suite {name!r}; known: {tuple(SUITES)}")
    return SUITES[name](n_max=n_max)
