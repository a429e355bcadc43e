"""Pairing diagnostics: on-site amplitude, pair correlators, structure factor,
and the disorder-averaged steady-state estimators.

All expectation values are sparse contractions against vec(rho):
Tr(rho A) = sum over nonzeros A[b, a] * rho[a, b].
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .fock import FockBasis
from .model_ops import build_eta, hd_projector

PHI_BOUND = 0.5  # pseudospin length
CORR_BOUND = 0.25  # product of two spin-1/2 ladder norms


def expectation(rho_vec: np.ndarray, op: sp.spmatrix, dim: int) -> complex:
    """Tr(rho A) evaluated against the vectorized density matrix."""
    coo = op.tocoo()
    rho = rho_vec.reshape(dim, dim)
    return complex(np.sum(coo.data * rho[coo.col, coo.row]))


def pair_amplitude(rho_vec: np.ndarray, basis: FockBasis):
    """Per-site Phi_i = Tr(rho eta_i^+) and global Phi = mean_i Phi_i."""
    n = basis.n_sites
    phis = np.array(
        [expectation(rho_vec, build_eta(basis, i, "plus"), basis.dim) for i in range(1, n + 1)]
    )
    return phis, phis.mean()


def _pair_op(basis: FockBasis, i: int, j: int) -> sp.csr_matrix:
    def build():
        return (build_eta(basis, i, "plus") @ build_eta(basis, j, "minus")).tocsr()

    return basis._cached(("eta+eta-", i, j), build)


def pair_correlator(rho_vec: np.ndarray, basis: FockBasis, i: int, j: int) -> complex:
    """C_ij = Tr(rho eta_i^+ eta_j^-); C_ii reduces to the HD-projected 1/2 - eta_i^z."""
    n = basis.n_sites
    if not (1 <= i <= n and 1 <= j <= n):
        raise ValueError(f"sites ({i},{j}) out of range 1..{n}")
    return expectation(rho_vec, _pair_op(basis, i, j), basis.dim)


def corr_r(rho_vec: np.ndarray, basis: FockBasis, r: int) -> complex:
    """Translational average C(r) = (1/N) sum_i C_{i, i+r} with PBC wraparound."""
    n = basis.n_sites
    if not 1 <= r <= n - 1:
        raise ValueError(f"separation r={r} out of range 1..{n - 1}")
    total = 0.0 + 0.0j
    for i in range(1, n + 1):
        j = (i - 1 + r) % n + 1
        total += pair_correlator(rho_vec, basis, i, j)
    return total / n


def corr_profile(rho_vec: np.ndarray, basis: FockBasis, i0: int = 1) -> dict[int, complex]:
    """Fixed-origin profile C_{i0, i0+r} for open chains."""
    return {
        r: pair_correlator(rho_vec, basis, i0, i0 + r)
        for r in range(1, basis.n_sites - i0 + 1)
    }


def structure_factor(rho_vec: np.ndarray, basis: FockBasis) -> complex:
    """S_eta = 2/(N(N-1)) sum_{i<j} C_ij."""
    n = basis.n_sites
    if n < 2:
        raise ValueError("structure factor needs N >= 2")
    total = 0.0 + 0.0j
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            total += pair_correlator(rho_vec, basis, i, j)
    return 2.0 * total / (n * (n - 1))


def check_bounds(phis: np.ndarray, corrs: dict | None = None, slack: float = 1e-7) -> None:
    """|Phi_i| <= 1/2 and |C_ij| <= 1/4 (i != j) for every physical state."""
    if np.any(np.abs(phis) > PHI_BOUND + slack):
        raise AssertionError(f"pair amplitude bound violated: max |Phi_i| = {np.abs(phis).max()}")
    if corrs:
        worst = max(abs(v) for v in corrs.values())
        if worst > CORR_BOUND + slack:
            raise AssertionError(f"pair correlator bound violated: max |C| = {worst}")


def hd_weighted_identity(basis: FockBasis, i: int) -> sp.csr_matrix:
    """(1/2 + eta_i^z) P_HD,i; equals eta_i^+ eta_i^- as an operator identity
    (the doublon projector: s^+ s^- = 1/2 + s^z on the local doublet)."""
    half = 0.5 * basis.identity()
    return ((half + build_eta(basis, i, "z")) @ hd_projector(basis, i)).tocsr()


@dataclass
class ObservableSeries:
    """Time-stamped pairing diagnostics for one run."""

    times: np.ndarray
    data: dict[str, np.ndarray]  # name -> complex array over times
    provenance: dict = field(default_factory=dict)

    def rows(self):
        """(time, index, observable, value) rows; index 0 marks global scalars.

        Series names look like "Phi[3]:J1-4": the bracketed site/separation
        index moves to the index column, any ":variant" tag stays in the name.
        """
        pattern = re.compile(r"^(?P<base>[^\[\]:]+)(?:\[(?P<idx>\d+)\])?(?P<var>:.*)?$")
        for name, values in sorted(self.data.items()):
            m = pattern.match(name)
            if m is None:
                raise ValueError(f"malformed series name {name!r}")
            index = int(m.group("idx")) if m.group("idx") else 0
            label = m.group("base") + (m.group("var") or "")
            for t, v in zip(self.times, values):
                yield t, index, label, complex(v)


# ---------------------------------------------------------------------------
# disorder-averaged estimators
# ---------------------------------------------------------------------------

@dataclass
class EnsembleEstimate:
    mean: float
    se: float
    n: int


def estimate_from_sums(sums: np.ndarray, n_sites: int) -> EnsembleEstimate:
    """(1/N) E|sum_i Tr(rho ...)| with SE = sample std / sqrt(N_dis)."""
    vals = np.abs(np.asarray(sums)) / n_sites
    n = len(vals)
    se = float(vals.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return EnsembleEstimate(mean=float(vals.mean()), se=se, n=n)


def disorder_estimators(ensemble, basis: FockBasis, r: int):
    """|Phi_m|_ss and |C_m(r)|_ss with standard errors over an ensemble of
    steady states (vectorized rho arrays or DensityState-likes)."""
    phi_sums, corr_sums = [], []
    n = basis.n_sites
    for state in ensemble:
        vec = getattr(state, "vec", state)
        phis, _ = pair_amplitude(vec, basis)
        phi_sums.append(phis.sum())
        total = 0.0 + 0.0j
        for i in range(1, n + 1):
            j = (i - 1 + r) % n + 1
            total += pair_correlator(vec, basis, i, j)
        corr_sums.append(total)
    if not phi_sums:
        raise ValueError("ensemble is empty")
    return estimate_from_sums(np.array(phi_sums), n), estimate_from_sums(np.array(corr_sums), n)
