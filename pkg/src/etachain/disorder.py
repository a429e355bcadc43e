"""Quenched-disorder ensembles: realization sampling, sweeps, aggregation.

Every realization draws from a generator seeded by
SeedSequence((master_seed, kind_id, float64-bits(width), realization_index)),
so results are reproducible and independent of scheduling order. Draw order
within a realization is fixed per kind (documented in _sample_params).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .model_ops import JumpChannel, ModelSpec

KINDS = (
    "interaction_WU",
    "gamma_Wgamma",
    "zeeman_WZ",
    "bond_Wt",
    "potential_Wmu",
    "transverse_Wperp",
    "angle_Wtheta",
    "loss_kappa",
    "dephasing_kappa_phi",
)

# loss / dephasing add deterministic channels, not random draws
DETERMINISTIC_KINDS = ("loss_kappa", "dephasing_kappa_phi")


@dataclass(frozen=True)
class DisorderSpec:
    kind: str
    width: float = 0.0
    n_realizations: int = 100
    seed: int = 0
    sweep_grid: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown disorder kind {self.kind!r}; known: {KINDS}")
        if self.width < 0:
            raise ValueError("width must be >= 0")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")
        if self.sweep_grid is not None and any(w < 0 for w in self.sweep_grid):
            raise ValueError("sweep widths must be >= 0")

    def grid(self) -> tuple[float, ...]:
        return self.sweep_grid if self.sweep_grid is not None else (self.width,)

    def realizations_for(self, width: float) -> int:
        if self.kind in DETERMINISTIC_KINDS or width == 0.0:
            return 1
        return self.n_realizations


def realization_seed(spec: DisorderSpec, width: float, index: int) -> tuple[int, ...]:
    width_bits = int(np.float64(width).view(np.uint64))
    return (spec.seed, KINDS.index(spec.kind), width_bits, index)


def _rng(spec: DisorderSpec, width: float, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=realization_seed(spec, width, index)))


def _sample_params(kind: str, width: float, base: ModelSpec, rng: np.random.Generator) -> ModelSpec:
    n = base.lattice.n_sites
    nb = base.lattice.n_bonds
    p = base.params
    if kind == "interaction_WU":
        # total on-site interaction uniform in [U - W, U + W]
        return base.with_params(u_site=tuple(rng.uniform(p.u - width, p.u + width, n)))
    if kind == "bond_Wt":
        return base.with_params(t_bonds=tuple(rng.uniform(p.t - width, p.t + width, nb)))
    if kind == "potential_Wmu":
        return base.with_params(mu_site=tuple(rng.uniform(-width, width, n)))
    if kind == "zeeman_WZ":
        # draw order: all B_z, then all B_x
        bz = tuple(rng.uniform(-width, width, n))
        bx = tuple(rng.uniform(-width, width, n))
        return base.with_params(b_z=bz, b_x=bx)
    if kind == "transverse_Wperp":
        hx = tuple(rng.uniform(-width, width, n))
        hy = tuple(rng.uniform(-width, width, n))
        return base.with_params(h_x=hx, h_y=hy)
    if kind == "gamma_Wgamma":
        channels = []
        for ch in base.channels:
            if ch.kind == "rotated_eta":
                rate = max(0.0, float(rng.uniform(ch.rate - width, ch.rate + width)))
                channels.append(replace(ch, rate=rate))
            else:
                channels.append(ch)
        return replace(base, channels=tuple(channels))
    if kind == "angle_Wtheta":
        channels = []
        for ch in base.channels:
            if ch.kind == "rotated_eta":
                channels.append(replace(ch, angle=ch.angle + float(rng.uniform(-width, width))))
            else:
                channels.append(ch)
        return replace(base, channels=tuple(channels))
    if kind == "loss_kappa":
        extra = tuple(
            JumpChannel(kind="particle_loss", site=i, rate=width, spin=s)
            for i in range(1, n + 1)
            for s in ("up", "down")
            if width > 0
        )
        return replace(base, channels=base.channels + extra)
    if kind == "dephasing_kappa_phi":
        extra = tuple(
            JumpChannel(kind="dephasing", site=i, rate=width, spin=s)
            for i in range(1, n + 1)
            for s in ("up", "down")
            if width > 0
        )
        return replace(base, channels=base.channels + extra)
    raise ValueError(f"unknown disorder kind {kind!r}")


def sample_realization(spec: DisorderSpec, base: ModelSpec, index: int,
                       width: float | None = None) -> ModelSpec:
    """Model for one realization; width defaults to spec.width."""
    w = spec.width if width is None else width
    if index >= max(spec.n_realizations, 1):
        raise ValueError(f"index {index} >= n_realizations {spec.n_realizations}")
    if w == 0.0 and spec.kind not in DETERMINISTIC_KINDS:
        return base
    return _sample_params(spec.kind, w, base, _rng(spec, w, index))


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

@dataclass
class RealizationRecord:
    width: float
    index: int
    seed_key: tuple[int, ...]
    phi_sum: complex
    corr_sum: complex
    converged: bool
    failed: bool
    error: str | None = None
    info: dict = field(default_factory=dict)


@dataclass
class SweepRow:
    width: float
    phi_mean: float
    phi_se: float
    corr_mean: float
    corr_se: float
    n_ok: int
    n_failed: int


@dataclass
class SweepResult:
    rows: list[SweepRow]
    records: list[RealizationRecord]
    r_half: int
    n_sites: int


def _default_estimates(records, n_sites: int):
    from .observables import estimate_from_sums

    ok = [rec for rec in records if not rec.failed]
    if not ok:
        return (math.nan, 0.0, math.nan, 0.0)
    phi = estimate_from_sums(np.array([rec.phi_sum for rec in ok]), n_sites)
    corr = estimate_from_sums(np.array([rec.corr_sum for rec in ok]), n_sites)
    return (phi.mean, phi.se, corr.mean, corr.se)


def _run_one(args):
    pipeline, spec, base, width, index = args
    seed_key = realization_seed(spec, width, index)
    try:
        model = sample_realization(spec, base, index, width=width)
        outcome = pipeline(model)
        return RealizationRecord(
            width=width,
            index=index,
            seed_key=seed_key,
            phi_sum=outcome["phi_sum"],
            corr_sum=outcome["corr_sum"],
            converged=bool(outcome.get("converged", True)),
            failed=not bool(outcome.get("converged", True)),
            info={k: v for k, v in outcome.items() if k not in ("phi_sum", "corr_sum")},
        )
    except Exception as exc:  # flagged, not fatal: failures become a column
        return RealizationRecord(
            width=width, index=index, seed_key=seed_key, phi_sum=0.0, corr_sum=0.0,
            converged=False, failed=True, error=f"{type(exc).__name__}: {exc}",
        )


def run_sweep(spec: DisorderSpec, base: ModelSpec, pipeline, workers: int = 1) -> SweepResult:
    """One row per width on the grid; `pipeline(model) -> dict` must return
    phi_sum = sum_i Tr(rho_ss eta_i^+), corr_sum = sum_i Tr(rho_ss eta_i^+ eta_{i+r}^-)
    and a converged flag. Failures are flagged rows excluded from the means.
    """
    n = base.lattice.n_sites
    r_half = max(1, n // 2)
    tasks = []
    for width in spec.grid():
        for index in range(spec.realizations_for(width)):
            tasks.append((pipeline, spec, base, float(width), index))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_one, tasks))
    else:
        records = [_run_one(t) for t in tasks]

    rows = []
    for width in spec.grid():
        here = [rec for rec in records if rec.width == float(width)]
        phi_mean, phi_se, corr_mean, corr_se = _default_estimates(here, n)
        n_failed = sum(rec.failed for rec in here)
        rows.append(
            SweepRow(
                width=float(width),
                phi_mean=phi_mean,
                phi_se=phi_se,
                corr_mean=corr_mean,
                corr_se=corr_se,
                n_ok=len(here) - n_failed,
                n_failed=n_failed,
            )
        )
    return SweepResult(rows=rows, records=records, r_half=r_half, n_sites=n)
