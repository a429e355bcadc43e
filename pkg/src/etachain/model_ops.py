"""Hamiltonian, pseudospin/spin operators and jump operators on the Fock space.

The Hubbard interaction is kept in the particle-hole symmetric, zero-vacuum-
energy convention: each site contributes ``U_i [(n_up - 1/2)(n_dn - 1/2) - 1/4]``,
so the clean Hamiltonian annihilates the vacuum and the whole pair multiplet.
The unshifted interaction term (whose holon-doublon diagonal is ``sum_i U_i/4``)
is available separately as :func:`interaction_term`.

Staggered pair operators use the lattice sign convention ``s_i = (-1)^i``:
``eta_i^+ = (-1)^i c^dag_{i,up} c^dag_{i,dn}``, ``eta_i^z = (n_i,up + n_i,dn - 1)/2``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .fock import (
    FockBasis,
    LatticeSpec,
    annihilator,
    creator,
    number_op,
    vacuum_state,
)

ETA_COMPONENTS = ("plus", "minus", "x", "y", "z")
SPIN_COMPONENTS = ("x", "z")
JUMP_KINDS = ("rotated_eta", "particle_loss", "dephasing")


def _as_array(value, n: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValueError(f"{name} must have length {n}, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class HamiltonianParams:
    """Couplings in units of the pump rate gamma.

    Scalars ``t``/``u`` are the clean values; the per-bond / per-site arrays
    override them when set (disorder realizations fill these in).
    """

    t: float = 1.0
    u: float = 8.0
    t_bonds: tuple[float, ...] | None = None
    u_site: tuple[float, ...] | None = None
    mu_site: tuple[float, ...] | None = None
    b_z: tuple[float, ...] | None = None
    b_x: tuple[float, ...] | None = None
    h_x: tuple[float, ...] | None = None
    h_y: tuple[float, ...] | None = None

    def resolved(self, lattice: LatticeSpec) -> dict[str, np.ndarray]:
        n, nb = lattice.n_sites, lattice.n_bonds
        return {
            "t_bonds": _as_array(self.t_bonds if self.t_bonds is not None else self.t, nb, "t_bonds"),
            "u_site": _as_array(self.u_site if self.u_site is not None else self.u, n, "u_site"),
            "mu_site": _as_array(self.mu_site if self.mu_site is not None else 0.0, n, "mu_site"),
            "b_z": _as_array(self.b_z if self.b_z is not None else 0.0, n, "b_z"),
            "b_x": _as_array(self.b_x if self.b_x is not None else 0.0, n, "b_x"),
            "h_x": _as_array(self.h_x if self.h_x is not None else 0.0, n, "h_x"),
            "h_y": _as_array(self.h_y if self.h_y is not None else 0.0, n, "h_y"),
        }


@dataclass(frozen=True)
class JumpChannel:
    """One dissipative channel.

    kind "rotated_eta": L = sqrt(rate) * eta_site^- exp(i angle eta_site^x)
    kind "particle_loss": L = sqrt(rate) * c_{site,spin}
    kind "dephasing":     L = sqrt(rate) * n_{site,spin}
    """

    kind: str
    site: int
    rate: float
    angle: float | None = None
    spin: str | None = None

    def __post_init__(self):
        if self.kind not in JUMP_KINDS:
            raise ValueError(f"unknown jump kind {self.kind!r}")
        if self.rate < 0:
            raise ValueError(f"jump rate must be >= 0, got {self.rate}")
        if self.kind == "rotated_eta":
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError("rotated_eta channel needs a finite angle")
        else:
            if self.spin not in ("up", "down"):
                raise ValueError(f"{self.kind} channel needs spin 'up' or 'down'")


@dataclass(frozen=True)
class ModelSpec:
    """One concrete realization: geometry + couplings + jump channels."""

    lattice: LatticeSpec
    params: HamiltonianParams
    channels: tuple[JumpChannel, ...]

    def __post_init__(self):
        for ch in self.channels:
            if not 1 <= ch.site <= self.lattice.n_sites:
                raise ValueError(f"channel site {ch.site} out of range 1..{self.lattice.n_sites}")

    def content_hash(self) -> str:
        text = repr((self.lattice, self.params, self.channels))
        return hashlib.sha1(text.encode()).hexdigest()[:16]

    def with_params(self, **kwargs) -> "ModelSpec":
        return replace(self, params=replace(self.params, **kwargs))


def clean_model(
    n_sites: int,
    boundary: str = "obc",
    t: float = 1.0,
    u: float = 8.0,
    driven_sites: tuple[int, ...] = (1,),
    theta: float = math.pi / 2,
    gamma: float = 1.0,
) -> ModelSpec:
    """The clean rotated-jump model at the usual figure parameters."""
    channels = tuple(
        JumpChannel(kind="rotated_eta", site=j, rate=gamma, angle=theta) for j in driven_sites
    )
    return ModelSpec(LatticeSpec(n_sites, boundary), HamiltonianParams(t=t, u=u), channels)


# ---------------------------------------------------------------------------
# elementary site operators
# ---------------------------------------------------------------------------

def hd_projector(basis: FockBasis, site: int) -> sp.csr_matrix:
    """Projector onto the local holon-doublon doublet: 1 - (n_up - n_dn)^2."""
    def build():
        nu = number_op(basis, site, "up")
        nd = number_op(basis, site, "down")
        eye = basis.identity()
        d = nu - nd
        return (eye - d @ d).tocsr()

    return basis._cached(("hd_proj", site), build)


def build_eta(basis: FockBasis, site: int, component: str) -> sp.csr_matrix:
    """Staggered pair pseudospin operators eta_i^{+,-,x,y,z}."""
    if component not in ETA_COMPONENTS:
        raise ValueError(f"component must be one of {ETA_COMPONENTS}, got {component!r}")

    def build_plus():
        sign = (-1) ** site
        return (sign * (creator(basis, site, "up") @ creator(basis, site, "down"))).tocsr()

    plus = basis._cached(("eta+", site), build_plus)
    if component == "plus":
        return plus
    if component == "minus":
        return basis._cached(("eta-", site), lambda: plus.conj().T.tocsr())
    if component == "x":
        return basis._cached(("etax", site), lambda: (0.5 * (plus + plus.conj().T)).tocsr())
    if component == "y":
        return basis._cached(("etay", site), lambda: ((plus - plus.conj().T) / 2j).tocsr())
    # z component carries no stagger
    def build_z():
        nu = number_op(basis, site, "up")
        nd = number_op(basis, site, "down")
        return (0.5 * (nu + nd - basis.identity())).tocsr()

    return basis._cached(("etaz", site), build_z)


def total_eta(basis: FockBasis, component: str) -> sp.csr_matrix:
    out = sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
    for i in range(1, basis.n_sites + 1):
        out = out + build_eta(basis, i, component)
    return out.tocsr()


def build_spin(basis: FockBasis, site: int, component: str) -> sp.csr_matrix:
    """Magnetic spin operators S_i^x, S_i^z (commute with every eta)."""
    if component not in SPIN_COMPONENTS:
        raise ValueError(f"component must be one of {SPIN_COMPONENTS}, got {component!r}")
    if component == "z":
        def build_z():
            nu = number_op(basis, site, "up")
            nd = number_op(basis, site, "down")
            return (0.5 * (nu - nd)).tocsr()

        return basis._cached(("Sz", site), build_z)

    def build_x():
        cu, cd = annihilator(basis, site, "up"), annihilator(basis, site, "down")
        return (0.5 * (cu.conj().T @ cd + cd.conj().T @ cu)).tocsr()

    return basis._cached(("Sx", site), build_x)


def eta_rotation(basis: FockBasis, site: int, theta: float) -> sp.csr_matrix:
    """exp(i theta eta_site^x), exact on the 4-dim site space.

    eta^x is spin-1/2 on the holon-doublon doublet and zero on singlons, so
    exp(i theta eta^x) = I + (cos(theta/2) - 1) P_HD + 2i sin(theta/2) eta^x.
    """
    ex = build_eta(basis, site, "x")
    phd = hd_projector(basis, site)
    eye = basis.identity()
    return (eye + (math.cos(theta / 2) - 1.0) * phd + 2j * math.sin(theta / 2) * ex).tocsr()


# ---------------------------------------------------------------------------
# Hamiltonian
# ---------------------------------------------------------------------------

def hopping_term(basis: FockBasis, lattice: LatticeSpec, t_bonds) -> sp.csr_matrix:
    t_arr = _as_array(t_bonds, lattice.n_bonds, "t_bonds")
    H = sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
    for (i, j), tb in zip(lattice.bonds(), t_arr):
        for spin in ("up", "down"):
            ci, cj = annihilator(basis, i, spin), annihilator(basis, j, spin)
            H = H - tb * (ci.conj().T @ cj + cj.conj().T @ ci)
    return H.tocsr()


def interaction_term(basis: FockBasis, u_site) -> sp.csr_matrix:
    """Unshifted sum_i U_i (n_up - 1/2)(n_dn - 1/2); HD diagonal = sum U_i / 4."""
    u_arr = _as_array(u_site, basis.n_sites, "u_site")
    eye = basis.identity()
    H = sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
    for i in range(1, basis.n_sites + 1):
        nu = number_op(basis, i, "up")
        nd = number_op(basis, i, "down")
        H = H + u_arr[i - 1] * ((nu - 0.5 * eye) @ (nd - 0.5 * eye))
    return H.tocsr()


def build_hubbard(basis: FockBasis, lattice: LatticeSpec, params: HamiltonianParams) -> sp.csr_matrix:
    """Full Hamiltonian: hopping + PH-symmetric interaction (zero vacuum energy)
    + scalar potential + Zeeman fields + transverse pseudospin fields."""
    if basis.n_sites != lattice.n_sites:
        raise ValueError("basis / lattice size mismatch")
    p = params.resolved(lattice)
    eye = basis.identity()

    H = hopping_term(basis, lattice, p["t_bonds"])
    H = H + interaction_term(basis, p["u_site"]) - (p["u_site"].sum() / 4.0) * eye
    for i in range(1, basis.n_sites + 1):
        mu = p["mu_site"][i - 1]
        if mu != 0.0:
            nu = number_op(basis, i, "up")
            nd = number_op(basis, i, "down")
            H = H + mu * (nu + nd - eye)
        bz, bx = p["b_z"][i - 1], p["b_x"][i - 1]
        if bz != 0.0:
            H = H + bz * build_spin(basis, i, "z")
        if bx != 0.0:
            H = H + bx * build_spin(basis, i, "x")
        hx, hy = p["h_x"][i - 1], p["h_y"][i - 1]
        if hx != 0.0:
            H = H + hx * build_eta(basis, i, "x")
        if hy != 0.0:
            H = H + hy * build_eta(basis, i, "y")
    H = H.tocsr()
    H.eliminate_zeros()
    return H


def build_jump(basis: FockBasis, channel: JumpChannel) -> sp.csr_matrix:
    """Sparse jump operator for one channel (see JumpChannel docstring)."""
    if channel.kind == "rotated_eta":
        em = build_eta(basis, channel.site, "minus")
        rot = eta_rotation(basis, channel.site, channel.angle)
        L = math.sqrt(channel.rate) * (em @ rot)
    elif channel.kind == "particle_loss":
        L = math.sqrt(channel.rate) * annihilator(basis, channel.site, channel.spin)
    else:  # dephasing
        L = math.sqrt(channel.rate) * number_op(basis, channel.site, channel.spin)
    L = L.tocsr()
    L.eliminate_zeros()
    return L


def build_model_operators(model: ModelSpec, basis: FockBasis | None = None):
    """(basis, H, [jump operators]) for one realization."""
    from .fock import build_basis

    if basis is None:
        basis = build_basis(model.lattice)
    H = build_hubbard(basis, model.lattice, model.params)
    jumps = [build_jump(basis, ch) for ch in model.channels]
    return basis, H, jumps


# ---------------------------------------------------------------------------
# reference states
# ---------------------------------------------------------------------------

def build_multiplet_state(basis: FockBasis, m_pairs: int) -> np.ndarray:
    """Normalized (eta^+)^M |vac>; unnormalized norm^2 is (M!)^2 C(N, M)."""
    if not 0 <= m_pairs <= basis.n_sites:
        raise ValueError(f"M must be in 0..{basis.n_sites}, got {m_pairs}")
    psi = vacuum_state(basis)
    if m_pairs:
        etp = total_eta(basis, "plus")
        for _ in range(m_pairs):
            psi = etp @ psi
    return psi / np.linalg.norm(psi)


def dark_state(basis: FockBasis) -> np.ndarray:
    """Product of local eta^y = +1/2 states: exp(-i pi/2 sum_j eta_j^x)|vac>."""
    psi = vacuum_state(basis)
    for j in range(1, basis.n_sites + 1):
        psi = eta_rotation(basis, j, -math.pi / 2) @ psi
    return psi / np.linalg.norm(psi)
