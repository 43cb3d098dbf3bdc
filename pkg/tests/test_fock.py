from types import SimpleNamespace

import numpy as np
import pytest
from scipy import stats

from iontransport.chain import build_model
from iontransport.constants import TWO_PI
from iontransport.fock import (
    FockDensityMatrix,
    TruncationError,
    coherent_amplitudes,
    evolve_master,
    fock_amplitudes,
    ladder_operators,
    product_state,
    thermal_state,
    truncation_leak,
)
from iontransport.noise import NoiseSpec, make_process
from iontransport.propagators import BathSpec, run_single_excitation_trajectory


def _toy(hopping):
    hopping = np.atleast_2d(np.asarray(hopping, dtype=float))
    n = hopping.shape[0]
    return SimpleNamespace(hopping=hopping, n_ions=n, positions=np.linspace(-1, 1, n) * 4e-5)


def test_resonant_pair_analytic():
    c = TWO_PI * 1.5e3
    model = _toy([[TWO_PI * 440e3, c], [c, TWO_PI * 440e3]])
    times = np.linspace(0, 0.4e-3, 21)
    proc = make_process(NoiseSpec("none"), model.positions, times[-1])
    rho0 = product_state([fock_amplitudes(1, 2), fock_amplitudes(0, 2)], 2)
    out = evolve_master(model, proc, BathSpec(), rho0, 2, times)
    assert out.occupations[:, 1] == pytest.approx(np.sin(c * times) ** 2, abs=1e-8)


def test_single_mode_thermal_relaxation():
    kappa, nbar = 2e3, 0.5
    model = _toy([[TWO_PI * 100e3]])
    times = np.linspace(0, 1e-3, 11)
    proc = make_process(NoiseSpec("none", dwell=1e-4), model.positions, times[-1])
    rho0 = product_state([fock_amplitudes(0, 30)], 30)
    out = evolve_master(model, proc, BathSpec(kappa, nbar), rho0, 30, times)
    assert out.occupations[:, 0] == pytest.approx(nbar * (1 - np.exp(-2 * kappa * times)), abs=1e-6)
    assert out.trace_error < 1e-8
    assert out.hermiticity_error < 1e-10


def test_single_excitation_agrees_with_wavefunction_engine(reference_spec):
    model = build_model(reference_spec)
    proc = make_process(NoiseSpec("standing-wave", TWO_PI * 3e3, seed=4), model.positions, 0.4e-3)
    times = np.linspace(0, 0.4e-3, 21)
    rho0 = product_state([fock_amplitudes(1, 2), fock_amplitudes(0, 2), fock_amplitudes(0, 2)], 2)
    out = evolve_master(model, proc, BathSpec(), rho0, 2, times)
    ref = run_single_excitation_trajectory(model, proc, times, [1, 0, 0])
    assert out.occupations == pytest.approx(ref.populations, abs=1e-8)
    assert out.trace_error < 1e-8


def test_coherent_first_moment_rotates():
    w = TWO_PI * 50e3
    model = _toy([[w]])
    times = np.linspace(0, 20e-6, 5)
    proc = make_process(NoiseSpec("none", dwell=20e-6), model.positions, times[-1])
    rho0 = product_state([coherent_amplitudes(0.5, 10)], 10)
    out = evolve_master(model, proc, BathSpec(), rho0, 10, times)
    assert out.first_moments[:, 0] == pytest.approx(0.5 * np.exp(-1j * w * times), abs=1e-8)


def test_leak_of_vacuum_is_zero():
    assert truncation_leak(product_state([fock_amplitudes(0, 4)] * 2, 4)) == 0.0


def test_leak_is_poisson_tail():
    cutoff, alpha = 6, 0.5
    rho = product_state([coherent_amplitudes(alpha, cutoff)], cutoff)
    tail = stats.poisson.pmf(cutoff, alpha**2) / stats.poisson.cdf(cutoff, alpha**2)
    assert truncation_leak(rho) == pytest.approx(tail, rel=1e-10)
    assert truncation_leak(rho) < 1e-6


def test_leak_of_saturated_state():
    rho = product_state([fock_amplitudes(3, 3), fock_amplitudes(0, 3)], 3)
    assert truncation_leak(rho) == pytest.approx(1.0)
    mixed = 0.3 * rho.rho + 0.7 * product_state([fock_amplitudes(0, 3)] * 2, 3).rho
    assert truncation_leak(mixed, 3, 2) == pytest.approx(0.3)


def test_excessive_leak_aborts():
    model = _toy([[TWO_PI * 100e3]])
    proc = make_process(NoiseSpec("none"), model.positions, 1e-4)
    rho0 = product_state([coherent_amplitudes(1.5, 4)], 4)
    with pytest.raises(TruncationError, match="cutoff"):
        evolve_master(model, proc, BathSpec(), rho0, 4, [0, 1e-4])


def test_dimension_cap_and_size_limits():
    proc = make_process(NoiseSpec("none"), [0.0, 1.0, 2.0], 1e-4)
    model = _toy(np.eye(3))
    with pytest.raises(ValueError, match="cap"):
        evolve_master(model, proc, BathSpec(), np.eye(17**3), 16, [0, 1e-4])
    with pytest.raises(ValueError, match="at most 3"):
        evolve_master(_toy(np.eye(4)), proc, BathSpec(), np.eye(16), 1, [0, 1e-4])


def test_states_are_normalized():
    th = thermal_state(2, 5, 0.3)
    assert th.trace() == pytest.approx(1.0)
    assert isinstance(th, FockDensityMatrix)
    assert th.dim == 36
    v = coherent_amplitudes(0.5, 12)
    assert np.vdot(v, v).real == pytest.approx(1.0, abs=1e-9)


def test_ladder_operators_commute_across_sites():
    a = ladder_operators(2, 3)
    comm = (a[0] @ a[1] - a[1] @ a[0]).toarray()
    assert np.allclose(comm, 0)
    n0 = (a[0].conj().T @ a[0]).toarray()
    assert np.allclose(np.diag(n0), np.repeat(np.arange(4), 4))
