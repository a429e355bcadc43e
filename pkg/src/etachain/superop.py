"""Vectorized Lindblad generator, steady states and spectra.

Vectorization is row-major: ``vec(rho)`` stacks rows, so
``vec(A rho B) = (A kron B^T) vec(rho)`` and the single-qubit Liouvillian
reproduces the reference 4x4 matrix entrywise in the ordering
(rho_uu, rho_ud, rho_du, rho_dd).

"Steady state" here means the attractor reached from a given initial state.
The full chain model has strong spin symmetries (every S_i^alpha commutes with
H and with all eta jumps), so the global kernel of the generator is degenerate
-- e.g. all-singlon ferromagnetic states are exactly steady -- and a plain
null-space solve is ill-posed. The solvers therefore project the initial state
onto the kernel (dense path) or integrate to long times (sparse path), and
report kernel degeneracy when asked.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

DENSE_EIG_MAX = 4096  # no dense diagonalization above this superoperator size
KERNEL_TOL = 1e-10


def _hash_sparse(A: sp.spmatrix) -> str:
    csr = A.tocsr()
    csr.sort_indices()
    h = hashlib.sha1()
    h.update(csr.indptr.tobytes())
    h.update(csr.indices.tobytes())
    h.update(np.round(csr.data, 12).tobytes())
    return h.hexdigest()[:16]


@dataclass
class Superoperator:
    """Sparse matrix representation of the Lindblad generator on vec(rho)."""

    matrix: sp.csr_matrix
    dim_hilbert: int
    metadata: dict = field(default_factory=dict)

    @property
    def dim_super(self) -> int:
        return self.dim_hilbert ** 2

    def trace_residual(self) -> float:
        """max |(vec I)^dagger L|; zero for a trace-preserving generator."""
        vec_id = np.eye(self.dim_hilbert, dtype=complex).ravel()
        return float(np.max(np.abs(vec_id @ self.matrix)))


@dataclass
class DensityState:
    """Row-major vectorized density matrix with physicality bookkeeping."""

    vec: np.ndarray
    dim: int

    @classmethod
    def from_rho(cls, rho: np.ndarray) -> "DensityState":
        rho = np.asarray(rho, dtype=complex)
        d = rho.shape[0]
        return cls(vec=rho.reshape(d * d).copy(), dim=d)

    @classmethod
    def pure(cls, psi: np.ndarray) -> "DensityState":
        psi = np.asarray(psi, dtype=complex)
        return cls.from_rho(np.outer(psi, psi.conj()))

    def rho(self) -> np.ndarray:
        return self.vec.reshape(self.dim, self.dim)

    def trace(self) -> complex:
        return self.rho().trace()

    def normalized(self) -> "DensityState":
        return DensityState(self.vec / self.trace(), self.dim)

    def hermiticity_deviation(self) -> float:
        r = self.rho()
        return float(np.max(np.abs(r - r.conj().T)))

    def min_eigenvalue(self, max_dense_dim: int = 256, n_probes: int = 6, seed: int = 0) -> float:
        """Smallest eigenvalue of rho; exact for dim <= max_dense_dim, else a
        lower estimate from random-vector Rayleigh quotients plus Lanczos."""
        r = self.rho()
        h = 0.5 * (r + r.conj().T)
        if self.dim <= max_dense_dim:
            return float(la.eigvalsh(h)[0])
        try:
            w = spla.eigsh(h, k=1, which="SA", maxiter=2000, tol=1e-8,
                           return_eigenvectors=False)
            return float(w[0])
        except Exception:
            rng = np.random.default_rng(seed)
            best = np.inf
            for _ in range(n_probes):
                v = rng.normal(size=self.dim) + 1j * rng.normal(size=self.dim)
                v /= np.linalg.norm(v)
                best = min(best, float(np.real(np.vdot(v, h @ v))))
            return best


def vectorize(H: sp.spmatrix | np.ndarray, jumps: list, metadata: dict | None = None) -> Superoperator:
    """L = -i(H x I - I x H^T) + sum_j [L_j x L_j* - (L_j^dag L_j x I + I x (L_j^dag L_j)^T)/2]."""
    H = sp.csr_matrix(H, dtype=complex)
    d = H.shape[0]
    if H.shape != (d, d):
        raise ValueError("H must be square")
    eye = sp.identity(d, format="csr", dtype=complex)
    L = -1j * (sp.kron(H, eye, format="csr") - sp.kron(eye, H.T, format="csr"))
    for Lj in jumps:
        Lj = sp.csr_matrix(Lj, dtype=complex)
        if Lj.shape != (d, d):
            raise ValueError("jump operator dimension mismatch")
        LdL = (Lj.conj().T @ Lj).tocsr()
        L = (
            L
            + sp.kron(Lj, Lj.conj(), format="csr")
            - 0.5 * sp.kron(LdL, eye, format="csr")
            - 0.5 * sp.kron(eye, LdL.T, format="csr")
        )
    L = L.tocsr()
    L.eliminate_zeros()
    meta = dict(metadata or {})
    meta.setdefault("hamiltonian_hash", _hash_sparse(H))
    meta.setdefault("n_channels", len(jumps))
    return Superoperator(matrix=L, dim_hilbert=d, metadata=meta)


def lindblad_action(H: sp.spmatrix, jumps: list):
    """Matrix-free RHS rho -> -i[H, rho] + dissipators, acting on d x d arrays.

    Used for sizes where the d^2 x d^2 superoperator does not fit (N = 5).
    """
    H = sp.csr_matrix(H, dtype=complex)
    jumps = [sp.csr_matrix(L, dtype=complex) for L in jumps]
    heff = (H - 0.5j * sum((L.conj().T @ L for L in jumps),
                           sp.csr_matrix(H.shape, dtype=complex))).tocsr()
    jump_pairs = [(L, L.conj().T.tocsr()) for L in jumps]

    def rhs(rho: np.ndarray) -> np.ndarray:
        # -i(Heff rho - rho Heff^dag) + sum L rho L^dag ; valid for any rho
        a = heff @ rho
        b = (heff @ rho.conj().T).conj().T
        out = -1j * (a - b)
        for L, Ld in jump_pairs:
            out += L @ (rho @ Ld)
        return out

    return rhs


# ---------------------------------------------------------------------------
# steady states
# ---------------------------------------------------------------------------

@dataclass
class SteadyStateResult:
    state: DensityState
    residual: float
    converged: bool
    degenerate: bool | None
    method: str
    info: dict = field(default_factory=dict)


def _dense_kernel(Ldense: np.ndarray, tol: float):
    """Right/left kernel vectors of a dense generator (zero is semisimple)."""
    w, vl, vr = la.eig(Ldense, left=True, right=True)
    idx = np.where(np.abs(w) < tol)[0]
    return w, vr[:, idx], vl[:, idx]


def steady_state(
    L: Superoperator,
    rho0: DensityState | None = None,
    method: str = "auto",
    tol: float = 1e-10,
    check_uniqueness: bool | None = None,
    t_max: float = 400.0,
    t_chunk: float = 10.0,
) -> SteadyStateResult:
    """Stationary state of L; the attractor of rho0 when the kernel is degenerate.

    Methods: "dense" (eigendecomposition + spectral projection of rho0),
    "evolve" (long-time propagation of rho0 until ||L v|| <= tol),
    "eigs" (shift-inverted Arnoldi; only safe for simple kernels),
    "auto" picks dense for dim_super <= DENSE_EIG_MAX, else evolve.
    """
    d, ds = L.dim_hilbert, L.dim_super
    if method == "auto":
        method = "dense" if ds <= DENSE_EIG_MAX else "evolve"
    if check_uniqueness is None:
        check_uniqueness = ds <= DENSE_EIG_MAX

    # residual target scales with the Frobenius norm of the generator
    scale = max(1.0, float(np.sqrt(np.sum(np.abs(L.matrix.data) ** 2))) if L.matrix.nnz else 1.0)
    info: dict = {}
    degenerate: bool | None = None

    if method == "dense":
        Ld = L.matrix.toarray()
        w, vr, vlft = _dense_kernel(Ld, tol * scale)
        n_zero = vr.shape[1]
        info["n_zero_modes"] = n_zero
        degenerate = n_zero > 1
        if n_zero == 0:
            raise RuntimeError("no kernel vector found; generator is not trace preserving?")
        if n_zero == 1 or rho0 is None:
            v = vr[:, 0]
            if degenerate and rho0 is None:
                info["warning"] = "kernel degenerate and no rho0 given; returned an arbitrary kernel vector"
        else:
            # attractor of rho0: spectral projection P0 = VR (VL^H VR)^-1 VL^H
            overlap = vlft.conj().T @ vr
            coeff = la.solve(overlap, vlft.conj().T @ rho0.vec)
            v = vr @ coeff
        rho = DensityState(v, d).normalized()
        residual = float(np.linalg.norm(L.matrix @ rho.vec))
        return SteadyStateResult(rho, residual, residual <= math.sqrt(tol) * scale,
                                 degenerate, "dense", info)

    if method == "eigs":
        sigma = -0.05 * scale / max(1.0, scale)  # small negative real shift
        w, v = spla.eigs(L.matrix.tocsc(), k=2, sigma=sigma, which="LM")
        order = np.argsort(np.abs(w))
        w, v = w[order], v[:, order]
        degenerate = bool(np.abs(w[1]) < KERNEL_TOL * scale) if len(w) > 1 else None
        rho = DensityState(v[:, 0], d).normalized()
        residual = float(np.linalg.norm(L.matrix @ rho.vec))
        info["eigenvalues"] = w.tolist()
        return SteadyStateResult(rho, residual, residual <= 1e-8 * scale, degenerate, "eigs", info)

    if method == "evolve":
        if rho0 is None:
            raise ValueError("method 'evolve' needs an initial state rho0")
        v = rho0.vec.astype(complex)
        tau = 0.0
        residual = float(np.linalg.norm(L.matrix @ v))
        while tau < t_max and residual > tol * scale:
            v = spla.expm_multiply(L.matrix, v, start=0.0, stop=t_chunk, num=2, endpoint=True)[-1]
            tau += t_chunk
            residual = float(np.linalg.norm(L.matrix @ v))
        info["t_evolved"] = tau
        if check_uniqueness:
            try:
                ev = liouvillian_spectrum(L, k=2)
                degenerate = bool(len(ev) > 1 and abs(ev[1]) < KERNEL_TOL * scale)
            except Exception as exc:  # diagnostic only
                info["uniqueness_check_error"] = str(exc)
        rho = DensityState(v, d).normalized()
        return SteadyStateResult(rho, residual, residual <= tol * scale, degenerate, "evolve", info)

    raise ValueError(f"unknown steady-state method {method!r}")


def liouvillian_spectrum(L: Superoperator, k: int = 6) -> np.ndarray:
    """k eigenvalues of largest real part, sorted by descending real part."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ds = L.dim_super
    if ds <= DENSE_EIG_MAX:
        w = la.eigvals(L.matrix.toarray())
    else:
        kk = min(k, ds - 2)
        try:
            w = spla.eigs(L.matrix, k=kk, which="LR", ncv=min(ds, max(4 * kk + 1, 40)),
                          maxiter=5000, return_eigenvectors=False)
        except spla.ArpackNoConvergence as exc:
            if exc.eigenvalues is not None and len(exc.eigenvalues):
                w = exc.eigenvalues
            else:
                # largest-real targeting failed; fall back to shift-invert near 0
                w = spla.eigs(L.matrix.tocsc(), k=kk, sigma=-0.05, which="LM",
                              return_eigenvectors=False)
    order = np.argsort(-w.real)
    return w[order][:k]
