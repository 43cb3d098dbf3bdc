"""Noise-assisted transport of transverse phonons in inhomogeneous ion chains."""

__version__ = "0.1.0"

from .analysis import RateFit, correlation_stats, fit_equilibration_rate, rate_sweep
from .chain import ChainModel, ChainSpec, build_model, equilibrium_positions, length_scale
from .config import RunConfig, load_preset, parse_config
from .fock import evolve_master, truncation_leak
from .laser import LaserParams, cancellation_detuning, raman_shift_amplitude, validity_report
from .noise import NoiseSpec, make_process, sample_shifts, trajectory_rng
from .propagators import (
    BathSpec,
    GaussianState,
    Initial,
    TimeSeries,
    ensemble_run,
    run_gaussian_trajectory,
    run_single_excitation_trajectory,
    step_unitary,
)
from .readout import (
    displace,
    filtered_transport_signal,
    measure_first_moment,
    occupation_after_displacement,
    reconstruct_first_moment,
)

__all__ = [
    "BathSpec",
    "ChainModel",
    "ChainSpec",
    "GaussianState",
    "Initial",
    "LaserParams",
    "NoiseSpec",
    "RateFit",
    "RunConfig",
    "TimeSeries",
    "build_model",
    "cancellation_detuning",
    "correlation_stats",
    "displace",
    "ensemble_run",
    "equilibrium_positions",
    "evolve_master",
    "filtered_transport_signal",
    "fit_equilibration_rate",
    "length_scale",
    "load_preset",
    "make_process",
    "measure_first_moment",
    "occupation_after_displacement",
    "parse_config",
    "raman_shift_amplitude",
    "rate_sweep",
    "reconstruct_first_moment",
    "run_gaussian_trajectory",
    "run_single_excitation_trajectory",
    "sample_shifts",
    "step_unitary",
    "trajectory_rng",
    "truncation_leak",
    "validity_report",
]
