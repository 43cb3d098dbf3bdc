"""Cross-check of the Gaussian moment engine against the Fock-space oracle."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .chain import build_model
from .fock import coherent_amplitudes, evolve_master, fock_amplitudes, product_state
from .noise import make_process, trajectory_rng
from .propagators import BathSpec, GaussianState, run_gaussian_trajectory

# thermal bath rescaled so that 2 kappa nbar stays at 0.15 phonons/ms while
# nbar is small enough for a truncated Fock space
ORACLE_NBAR = 0.3
ORACLE_HEATING = 150.0  # phonons/s
ORACLE_CUTOFFS = {1: 12, 2: 10, 3: 8}
ORACLE_HORIZON = 0.4e-3  # s
ORACLE_TOLERANCE = 1e-6


def oracle_bath():
    return BathSpec(kappa=ORACLE_HEATING / (2 * ORACLE_NBAR), nbar=ORACLE_NBAR)


@dataclass(frozen=True)
class OracleComparison:
    n_sites: int
    cutoff: int
    occupation_error: float
    moment_error: float
    trace_error: float
    hermiticity_error: float
    max_leak: float

    @property
    def passed(self):
        return max(self.occupation_error, self.moment_error) <= ORACLE_TOLERANCE


def compare_with_oracle(model, noise_spec, bath, alpha=0.5, cutoff=None, t_grid=None, index=0):
    """Run both engines along one recorded noise realization and report the worst deviations.

    The coherent amplitude ``alpha`` starts on the first site over a thermal
    background of ``bath.init_occupation`` (which must be zero for the pure
    product state used by the oracle).
    """
    if bath.init_occupation:
        raise ValueError("the oracle comparison starts from a pure coherent state")
    n = model.n_ions
    cutoff = ORACLE_CUTOFFS[n] if cutoff is None else cutoff
    if t_grid is None:
        t_grid = np.linspace(0.0, ORACLE_HORIZON, 21)
    t_grid = np.asarray(t_grid, dtype=float)
    process = make_process(noise_spec, model.positions, t_grid[-1], trajectory_rng(noise_spec.seed, index))

    state0 = GaussianState.coherent(n, 0, alpha)
    gauss = run_gaussian_trajectory(model, process, bath, state0, t_grid)

    vectors = [coherent_amplitudes(alpha, cutoff)] + [fock_amplitudes(0, cutoff)] * (n - 1)
    ref = evolve_master(model, process, bath, product_state(vectors, cutoff), cutoff, t_grid)
    return OracleComparison(
        n_sites=n,
        cutoff=cutoff,
        occupation_error=float(np.max(np.abs(gauss.populations - ref.occupations))),
        moment_error=float(np.max(np.abs(gauss.mu - ref.first_moments))),
        trace_error=ref.trace_error,
        hermiticity_error=ref.hermiticity_error,
        max_leak=ref.max_leak,
    )


def sub_chain(spec, n_sites):
    """The first ``n_sites`` ions of an explicit-frequency chain, rebuilt as a chain of their own."""
    if spec.mode != "explicit":
        raise ValueError("oracle sub-chains need explicit local frequencies")
    return replace(
        spec,
        n_ions=n_sites,
        masses=list(spec.masses)[:n_sites],
        local_frequencies=list(spec.local_frequencies)[:n_sites],
    )


def oracle_suite(spec, noise_spec, sizes=(2, 3)):
    """Comparisons on chains of each size in ``sizes`` built from ``spec``."""
    bath = oracle_bath()
    return [compare_with_oracle(build_model(sub_chain(spec, k)), noise_spec, bath) for k in sizes]
