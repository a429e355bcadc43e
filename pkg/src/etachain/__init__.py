"""Lindblad simulator for locally pumped eta-pairing in the particle-hole
symmetric Hubbard chain: operator construction, superoperator solvers, time
evolution (master equation and trajectories), pairing diagnostics, quenched
disorder sweeps, and a reproducible batch CLI."""

__version__ = "0.1.0"

from .fock import FockBasis, LatticeSpec, build_basis
from .model_ops import (
    HamiltonianParams,
    JumpChannel,
    ModelSpec,
    build_eta,
    build_hubbard,
    build_jump,
    build_multiplet_state,
    build_spin,
    clean_model,
    dark_state,
)
from .superop import DensityState, Superoperator, liouvillian_spectrum, steady_state, vectorize
from .evolve import EvolutionConfig, TrajectoryConfig, evolve_master, evolve_trajectories
from .observables import (
    ObservableSeries,
    corr_r,
    disorder_estimators,
    pair_amplitude,
    pair_correlator,
    structure_factor,
)
from .projected import (
    PseudospinSpace,
    build_effective_generator,
    effective_spectrum,
    toy_qubit_suite,
    verify_triangular,
)
from .disorder import DisorderSpec, run_sweep, sample_realization

__all__ = [
    "FockBasis",
    "LatticeSpec",
    "build_basis",
    "HamiltonianParams",
    "JumpChannel",
    "ModelSpec",
    "build_eta",
    "build_hubbard",
    "build_jump",
    "build_multiplet_state",
    "build_spin",
    "clean_model",
    "dark_state",
    "DensityState",
    "Superoperator",
    "liouvillian_spectrum",
    "steady_state",
    "vectorize",
    "EvolutionConfig",
    "TrajectoryConfig",
    "evolve_master",
    "evolve_trajectories",
    "ObservableSeries",
    "corr_r",
    "disorder_estimators",
    "pair_amplitude",
    "pair_correlator",
    "structure_factor",
    "PseudospinSpace",
    "build_effective_generator",
    "effective_spectrum",
    "toy_qubit_suite",
    "verify_triangular",
    "DisorderSpec",
    "run_sweep",
    "sample_realization",
]
