"""Fermionic Fock space of the chain: basis encoding and Jordan-Wigner operators.

Conventions (fixed once here, verified algebraically by the test suite):

* sites are labelled ``i = 1..N``; each carries an up and a down mode,
  ``mode(i, up) = 2(i-1)``, ``mode(i, down) = 2(i-1) + 1`` (site-major, up first),
* a basis state is the occupation bitmask over modes, and the basis index *is*
  the bitmask (identity encoding), so ``dim = 2^(2N) = 4^N``,
* the canonical state ``|b>`` applies creation operators in ascending mode
  order to the vacuum,
* ``c_m |b> = 0`` if mode ``m`` is empty in ``b``, otherwise
  ``(-1)^(number of occupied modes below m) |b & ~bit(m)>``.

The sublattice sign ``s_i = (-1)^i`` (site indices starting at 1) lives on the
lattice description; all staggered pair operators take it from there.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

MAX_SITES_DEFAULT = 8

SPIN_UP = "up"
SPIN_DOWN = "down"
_SPINS = (SPIN_UP, SPIN_DOWN)


@dataclass(frozen=True)
class LatticeSpec:
    """Chain geometry: site count, boundary condition, sublattice signs."""

    n_sites: int
    boundary: str = "obc"  # "obc" | "pbc"

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError(f"n_sites must be >= 1, got {self.n_sites}")
        if self.boundary not in ("obc", "pbc"):
            raise ValueError(f"boundary must be 'obc' or 'pbc', got {self.boundary!r}")

    @property
    def sublattice_parity(self) -> tuple[int, ...]:
        """Signs s_i = (-1)^i for i = 1..N."""
        return tuple((-1) ** i for i in range(1, self.n_sites + 1))

    @property
    def bipartite_frustrated(self) -> bool:
        """True when the PBC wrap bond connects same-parity sites (odd N)."""
        return self.boundary == "pbc" and self.n_sites % 2 == 1

    def bonds(self) -> list[tuple[int, int]]:
        """Nearest-neighbour bonds; N-1 for OBC, N for PBC (wrap last)."""
        out = [(i, i + 1) for i in range(1, self.n_sites)]
        if self.boundary == "pbc" and self.n_sites > 1:
            out.append((self.n_sites, 1))
        return out

    @property
    def n_bonds(self) -> int:
        return len(self.bonds())


@dataclass
class FockBasis:
    """4^N-dimensional occupation-bitmask basis with cached bit tables."""

    n_sites: int
    n_modes: int = field(init=False)
    dim: int = field(init=False)

    def __post_init__(self):
        self.n_modes = 2 * self.n_sites
        self.dim = 1 << self.n_modes
        b = np.arange(self.dim, dtype=np.int64)
        # bits[k, m] = occupation of mode m in basis state k
        self._bits = ((b[:, None] >> np.arange(self.n_modes)) & 1).astype(np.int8)
        # prefix[k, m] = number of occupied modes below m in state k (JW string)
        self._prefix = np.concatenate(
            [np.zeros((self.dim, 1), np.int64), np.cumsum(self._bits, axis=1)], axis=1
        )
        self._cache: dict[tuple, sp.csr_matrix] = {}

    def mode_index(self, site: int, spin: str) -> int:
        if not 1 <= site <= self.n_sites:
            raise ValueError(f"site {site} out of range 1..{self.n_sites}")
        if spin not in _SPINS:
            raise ValueError(f"spin must be 'up' or 'down', got {spin!r}")
        return 2 * (site - 1) + (0 if spin == SPIN_UP else 1)

    def occupations(self, mode: int) -> np.ndarray:
        return self._bits[:, mode]

    def jw_sign(self, mode: int) -> np.ndarray:
        """(-1)^(occupied modes below `mode`) for every basis state."""
        return 1.0 - 2.0 * (self._prefix[:, mode] % 2)

    def identity(self) -> sp.csr_matrix:
        return self._cached(("identity",), lambda: sp.identity(self.dim, format="csr", dtype=complex))

    def _cached(self, key: tuple, builder) -> sp.csr_matrix:
        op = self._cache.get(key)
        if op is None:
            op = builder()
            self._cache[key] = op
        return op


def build_basis(lattice: LatticeSpec, max_sites: int = MAX_SITES_DEFAULT) -> FockBasis:
    """Basis for the lattice; refuses N > max_sites (4^N state blowup)."""
    if lattice.n_sites > max_sites:
        raise ValueError(
            f"N={lattice.n_sites} exceeds the configured maximum {max_sites} "
            f"(dim would be 4^{lattice.n_sites})"
        )
    return FockBasis(lattice.n_sites)


def _mode_annihilator(basis: FockBasis, mode: int) -> sp.csr_matrix:
    def build():
        occ = basis.occupations(mode) == 1
        cols = np.nonzero(occ)[0]
        rows = cols & ~(1 << mode)
        vals = basis.jw_sign(mode)[cols].astype(complex)
        return sp.csr_matrix((vals, (rows, cols)), shape=(basis.dim, basis.dim), dtype=complex)

    return basis._cached(("c", mode), build)


def _mode_creator(basis: FockBasis, mode: int) -> sp.csr_matrix:
    def build():
        emp = basis.occupations(mode) == 0
        cols = np.nonzero(emp)[0]
        rows = cols | (1 << mode)
        vals = basis.jw_sign(mode)[cols].astype(complex)
        return sp.csr_matrix((vals, (rows, cols)), shape=(basis.dim, basis.dim), dtype=complex)

    return basis._cached(("cdag", mode), build)


def annihilator(basis: FockBasis, site: int, spin: str) -> sp.csr_matrix:
    """c_{i,sigma} in the Jordan-Wigner convention above."""
    return _mode_annihilator(basis, basis.mode_index(site, spin))


def creator(basis: FockBasis, site: int, spin: str) -> sp.csr_matrix:
    """c^dagger_{i,sigma}; equals annihilator(...).conj().T entrywise."""
    return _mode_creator(basis, basis.mode_index(site, spin))


def number_op(basis: FockBasis, site: int, spin: str) -> sp.csr_matrix:
    """n_{i,sigma} = c^dag c; diagonal with entries in {0, 1}."""
    mode = basis.mode_index(site, spin)

    def build():
        return sp.diags(basis.occupations(mode).astype(complex), format="csr")

    return basis._cached(("n", mode), build)


def vacuum_state(basis: FockBasis) -> np.ndarray:
    vac = np.zeros(basis.dim, dtype=complex)
    vac[0] = 1.0
    return vac
