"""Time evolution: master-equation integration and quantum-trajectory unraveling.

Master runs integrate segment by segment between output times (constant
memory; required at N = 5 where vec(rho) has ~10^6 entries), evaluating
requested observables on the fly. Trace drift is monitored at every output
time; the state is renormalized (and the event logged) whenever the drift
exceeds the configured threshold.

The trajectory unraveling uses the norm-threshold method: deterministic
evolution under H_eff = H - (i/2) sum L^dag L until the squared norm crosses a
uniform random target (the norm is monotone decreasing, so the crossing cannot
be missed), then a jump with channel probabilities ~ ||L_k psi||^2.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .observables import expectation
from .superop import DensityState, Superoperator, lindblad_action


@dataclass
class EvolutionConfig:
    t_final: float
    n_out: int = 61
    t_eval: tuple[float, ...] | None = None  # overrides n_out when set
    rtol: float = 1e-8
    atol: float = 1e-10
    method: str = "adaptive_rk"  # or "krylov_expm"
    renorm_threshold: float = 1e-10
    plateau_window: float = 0.2
    plateau_tol: float = 1e-3
    store_states: bool | None = None  # None: decide from memory footprint

    def __post_init__(self):
        if self.t_final <= 0:
            raise ValueError("t_final must be > 0")
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be > 0")
        if self.method not in ("adaptive_rk", "krylov_expm"):
            raise ValueError(f"unknown method {self.method!r}")

    def grid(self) -> np.ndarray:
        if self.t_eval is not None:
            ts = np.asarray(self.t_eval, dtype=float)
            if ts.ndim != 1 or ts[0] < 0 or np.any(np.diff(ts) <= 0):
                raise ValueError("t_eval must be strictly increasing and nonnegative")
            return ts
        return np.linspace(0.0, self.t_final, self.n_out)


@dataclass
class MasterResult:
    times: np.ndarray
    series: dict[str, np.ndarray]
    snapshots: list[DensityState] | None
    final_state: DensityState
    trace_drift_max: float
    hermiticity_dev_max: float
    renorm_events: list[tuple[float, float]]
    info: dict = field(default_factory=dict)


@dataclass
class PlateauResult:
    value: float
    converged: bool
    window: tuple[float, float]


def plateau(times: np.ndarray, values: np.ndarray, window_frac: float = 0.2,
            tol: float = 1e-3) -> PlateauResult:
    """Steady value = mean over the final window; converged if the window is flat."""
    times = np.asarray(times, float)
    vals = np.abs(np.asarray(values))
    t0 = times[-1] - window_frac * (times[-1] - times[0])
    mask = times >= t0
    window_vals = vals[mask]
    mean = float(window_vals.mean())
    converged = bool(np.max(np.abs(window_vals - mean)) < tol)
    return PlateauResult(mean, converged, (float(t0), float(times[-1])))


def _segment_rk(rhs_vec, v: np.ndarray, t0: float, t1: float, rtol: float, atol: float) -> np.ndarray:
    sol = solve_ivp(rhs_vec, (t0, t1), v, method="RK45", rtol=rtol, atol=atol,
                    t_eval=[t1], dense_output=False)
    if not sol.success:
        raise RuntimeError(f"integrator failed on [{t0}, {t1}]: {sol.message}")
    return sol.y[:, -1]


def evolve_master(
    generator: Superoperator | tuple,
    rho0: DensityState,
    cfg: EvolutionConfig,
    observable_ops: dict[str, sp.spmatrix] | None = None,
) -> MasterResult:
    """Propagate vec(rho) under the Lindblad generator.

    `generator` is either an assembled Superoperator (method "krylov_expm"
    needs this) or an (H, jumps) pair, in which case the RHS is applied
    matrix-free in the d x d density-matrix form.
    """
    times = cfg.grid()
    if isinstance(generator, Superoperator):
        d = generator.dim_hilbert
        mat = generator.matrix

        def rhs_vec(_t, y):
            return mat @ y

        action = None
    else:
        H, jumps = generator
        d = H.shape[0]
        action = lindblad_action(H, jumps)
        mat = None

        def rhs_vec(_t, y):
            return action(y.reshape(d, d)).ravel()

    if rho0.dim != d:
        raise ValueError("initial state dimension mismatch")
    if cfg.method == "krylov_expm" and mat is None:
        raise ValueError("krylov_expm needs an assembled Superoperator")

    store = cfg.store_states
    if store is None:
        store = d * d * len(times) * 16 <= 256 * 2 ** 20

    obs = observable_ops or {}
    series: dict[str, list] = {name: [] for name in obs}
    snapshots: list[DensityState] | None = [] if store else None
    renorm_events: list[tuple[float, float]] = []
    drift_max = 0.0
    herm_max = 0.0

    v = rho0.vec.astype(complex).copy()
    t_prev = float(times[0])
    if times[0] != 0.0:
        raise ValueError("output grid must start at t = 0")

    for k, t in enumerate(times):
        if k > 0:
            if cfg.method == "krylov_expm":
                v = spla.expm_multiply(mat, v, start=0.0, stop=float(t - t_prev), num=2,
                                       endpoint=True)[-1]
            else:
                v = _segment_rk(rhs_vec, v, t_prev, float(t), cfg.rtol, cfg.atol)
            t_prev = float(t)
        state = DensityState(v, d)
        drift = abs(state.trace() - 1.0)
        drift_max = max(drift_max, drift)
        if drift > cfg.renorm_threshold:
            renorm_events.append((float(t), float(drift)))
            v = v / state.trace()
            state = DensityState(v, d)
        herm_max = max(herm_max, state.hermiticity_deviation())
        for name, op in obs.items():
            series[name].append(expectation(v, op, d))
        if snapshots is not None:
            snapshots.append(DensityState(v.copy(), d))

    return MasterResult(
        times=times,
        series={k: np.array(vals) for k, vals in series.items()},
        snapshots=snapshots,
        final_state=DensityState(v, d),
        trace_drift_max=float(drift_max),
        hermiticity_dev_max=float(herm_max),
        renorm_events=renorm_events,
        info={"method": cfg.method, "dim": d},
    )


# ---------------------------------------------------------------------------
# quantum trajectories
# ---------------------------------------------------------------------------

@dataclass
class TrajectoryConfig:
    n_trajectories: int
    seed: int = 0
    # tighter than the master default: jump states come from the dense-output
    # interpolant, whose error scales like step^4 and biases the ensemble mean
    rtol: float = 1e-9
    atol: float = 1e-12
    norm_floor: float = 1e-300  # abort threshold for pathological norm collapse
    workers: int = 1

    def __post_init__(self):
        if self.n_trajectories < 1:
            raise ValueError("need at least one trajectory")


@dataclass
class TrajectoryResult:
    times: np.ndarray
    mean: dict[str, np.ndarray]
    se: dict[str, np.ndarray]
    n_trajectories: int


def _run_one_trajectory(heff, jumps, psi0, times, obs_items, rng, rtol, atol, norm_floor):
    records = np.empty((len(obs_items), len(times)), dtype=complex)
    psi = psi0.astype(complex).copy()
    target = rng.random()

    def deriv(_t, y):
        return -1j * (heff @ y)

    def record(idx, y):
        nrm2 = float(np.real(np.vdot(y, y)))
        if nrm2 < norm_floor:
            raise RuntimeError("state norm collapsed below resolution")
        for q, (_name, op) in enumerate(obs_items):
            records[q, idx] = np.vdot(y, op @ y) / nrm2

    record(0, psi)
    # sample times are segment boundaries: recorded states are exact RK
    # endpoints, never dense-output interpolants (those bias the mean ~h^4)
    for idx in range(1, len(times)):
        t_cur, t_stop = float(times[idx - 1]), float(times[idx])
        while t_cur < t_stop:
            def norm_event(_t, y, target=target):
                return float(np.real(np.vdot(y, y))) - target

            norm_event.terminal = True
            norm_event.direction = -1
            sol = solve_ivp(deriv, (t_cur, t_stop), psi, method="RK45", rtol=rtol,
                            atol=atol, dense_output=True, events=norm_event)
            if not sol.success:
                raise RuntimeError(f"trajectory integration failed: {sol.message}")
            if sol.status == 1:  # norm hit the target: jump
                t_cur = float(sol.t_events[0][0])
                psi = sol.y_events[0][0]
                weights = np.array([np.real(np.vdot(Lp @ psi, Lp @ psi)) for Lp in jumps])
                total = weights.sum()
                if total <= 0:
                    # exactly dark: the norm cannot cross any lower target
                    target = 0.0
                    continue
                k = rng.choice(len(jumps), p=weights / total)
                psi = jumps[k] @ psi
                psi = psi / np.linalg.norm(psi)
                target = rng.random()
            else:
                t_cur = t_stop
                psi = sol.y[:, -1]
        record(idx, psi)
    return records


def _trajectory_batch(args):
    heff, jumps, psi0, times, obs_items, cfg, indices = args
    out = []
    for k in indices:
        rng = np.random.default_rng(np.random.SeedSequence(entropy=(cfg.seed, k)))
        out.append(
            _run_one_trajectory(heff, jumps, psi0, times, obs_items, rng,
                                cfg.rtol, cfg.atol, cfg.norm_floor)
        )
    return out


def evolve_trajectories(
    H: sp.spmatrix,
    jumps: list,
    psi0: np.ndarray,
    cfg: TrajectoryConfig,
    times,
    observable_ops: dict[str, sp.spmatrix],
) -> TrajectoryResult:
    """Ensemble-averaged observables from the Monte Carlo wavefunction method.

    Per-trajectory streams are derived from (seed, trajectory index), so the
    result is independent of scheduling and worker count.
    """
    times = np.asarray(times, dtype=float)
    psi0 = np.asarray(psi0, dtype=complex)
    nrm = np.linalg.norm(psi0)
    if abs(nrm - 1.0) > 1e-10:
        raise ValueError("psi0 must be normalized")
    H = sp.csr_matrix(H, dtype=complex)
    jumps = [sp.csr_matrix(L, dtype=complex) for L in jumps if sp.csr_matrix(L).nnz > 0]
    heff = H - 0.5j * sum(
        (L.conj().T @ L for L in jumps), sp.csr_matrix(H.shape, dtype=complex)
    )
    heff = heff.tocsr()
    obs_items = sorted(observable_ops.items())

    all_records = np.empty((cfg.n_trajectories, len(obs_items), len(times)), dtype=complex)
    indices = list(range(cfg.n_trajectories))
    if cfg.workers > 1:
        chunks = [indices[i :: cfg.workers] for i in range(cfg.workers)]
        payload = [(heff, jumps, psi0, times, obs_items, cfg, ch) for ch in chunks if ch]
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for chunk, recs in zip([c for c in chunks if c], pool.map(_trajectory_batch, payload)):
                for k, rec in zip(chunk, recs):
                    all_records[k] = rec
    else:
        for k in indices:
            rng = np.random.default_rng(np.random.SeedSequence(entropy=(cfg.seed, k)))
            all_records[k] = _run_one_trajectory(heff, jumps, psi0, times, obs_items, rng,
                                                 cfg.rtol, cfg.atol, cfg.norm_floor)

    mean, se = {}, {}
    m = cfg.n_trajectories
    for q, (name, _op) in enumerate(obs_items):
        vals = all_records[:, q, :]
        mean[name] = vals.mean(axis=0)
        if m > 1:
            var = vals.real.var(axis=0, ddof=1) + vals.imag.var(axis=0, ddof=1)
            se[name] = np.sqrt(var / m)
        else:
            se[name] = np.zeros(len(times))
    return TrajectoryResult(times=times, mean=mean, se=se, n_trajectories=m)
