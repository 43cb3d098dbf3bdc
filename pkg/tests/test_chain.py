import warnings

import numpy as np
import pytest
import scipy.constants as sc
from hypothesis import given, settings
from hypothesis import strategies as st

from iontransport.chain import (
    ChainModelError,
    ChainSpec,
    build_model,
    equilibrium_positions,
    length_scale,
)
from iontransport.constants import TWO_PI, ion_mass


def _force(u):
    diff = u[:, None] - u[None, :]
    np.fill_diagonal(diff, np.inf)
    return u - np.sum(np.sign(diff) / diff**2, axis=1)


def test_length_scale_against_scipy_constants():
    m = ion_mass("Ca40")
    w = TWO_PI * 40e3
    expected = (sc.e**2 / (4 * np.pi * sc.epsilon_0 * m * w**2)) ** (1 / 3)
    assert length_scale(m, w) == pytest.approx(expected, rel=1e-8)
    assert length_scale(m, w) == pytest.approx(38.0e-6, abs=0.1e-6)


def test_length_scale_power_laws():
    m, w = ion_mass("Ca40"), TWO_PI * 40e3
    base = length_scale(m, w)
    assert length_scale(8 * m, w) == pytest.approx(base / 2, rel=1e-12)
    assert length_scale(m, w * 2 * np.sqrt(2)) == pytest.approx(base / 2, rel=1e-12)


@pytest.mark.parametrize("m, w", [(0.0, 1.0), (1e-25, 0.0), (-1e-25, 1.0)])
def test_length_scale_rejects_non_positive(m, w):
    with pytest.raises(ValueError):
        length_scale(m, w)


def test_equilibrium_closed_forms():
    assert equilibrium_positions(1) == pytest.approx([0.0])
    assert equilibrium_positions(2) == pytest.approx([-(0.25 ** (1 / 3)), 0.25 ** (1 / 3)], abs=1e-12)
    u3 = equilibrium_positions(3)
    assert u3 == pytest.approx([-(1.25 ** (1 / 3)), 0.0, 1.25 ** (1 / 3)], abs=1e-12)
    assert u3[2] == pytest.approx(1.0772, abs=1e-4)


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=2, max_value=25))
def test_equilibrium_force_balance_and_symmetry(n):
    u = equilibrium_positions(n)
    assert np.all(np.diff(u) > 0)
    assert np.max(np.abs(_force(u))) < 1e-12
    assert u == pytest.approx(-u[::-1], abs=1e-14)


def test_equilibrium_rejects_empty_chain():
    with pytest.raises(ValueError):
        equilibrium_positions(0)


def test_reference_couplings(reference_spec):
    model = build_model(reference_spec)
    l = model.length_scale
    d = l * 1.25 ** (1 / 3)
    w = np.array(reference_spec.local_frequencies)
    wz = reference_spec.omega_z
    c12 = 0.5 * wz**2 / np.sqrt(w[0] * w[1]) * (l / d) ** 3
    c13 = 0.5 * wz**2 / np.sqrt(w[0] * w[2]) * (l / (2 * d)) ** 3
    assert model.couplings[0, 1] == pytest.approx(c12, rel=1e-10)
    assert model.couplings[0, 2] == pytest.approx(c13, rel=1e-10)
    khz = model.couplings / (TWO_PI * 1e3)
    assert khz[0, 1] == pytest.approx(1.454, abs=0.015)
    assert khz[1, 2] == pytest.approx(1.454, abs=0.015)
    assert khz[0, 2] == pytest.approx(0.182, abs=0.002)
    assert model.spacing == pytest.approx(41e-6, abs=0.5e-6)


def test_hopping_structure(reference_spec):
    model = build_model(reference_spec)
    h = model.hopping
    assert np.array_equal(h, h.T)
    assert np.all(np.diag(model.couplings) == 0)
    assert np.diag(h) == pytest.approx(model.local_frequencies, rel=0)
    eig = np.linalg.eigvals(h)
    assert np.max(np.abs(eig.imag)) <= 1e-12 * np.max(np.abs(eig))


def test_couplings_decrease_with_separation():
    spec = ChainSpec(
        n_ions=5,
        omega_z=TWO_PI * 40e3,
        masses=[ion_mass("Ca40")] * 5,
        local_frequencies=[TWO_PI * 440e3] * 5,
        frequencies_are_renormalized=True,
    )
    c = build_model(spec).couplings
    for j in range(5):
        row = [c[j, k] for k in range(j + 1, 5)]
        assert all(x > 0 for x in row)
        assert all(a > b for a, b in zip(row, row[1:]))


def test_reference_localization(reference_spec):
    model = build_model(reference_spec)
    gaps = np.abs(np.diff(model.local_frequencies))
    assert np.max(model.couplings) / np.min(gaps) == pytest.approx(1.4637 / 4.5, abs=0.01)
    # weight of eigenvectors outside their dominant site; the middle mode
    # hybridizes noticeably with both neighbours
    assert model.localization() == pytest.approx(0.147, abs=0.002)


def test_homogeneous_chain_has_constant_diagonal():
    spec = ChainSpec(
        n_ions=4,
        omega_z=TWO_PI * 40e3,
        masses=[ion_mass("Ca40")] * 4,
        local_frequencies=[TWO_PI * 500e3] * 4,
        frequencies_are_renormalized=True,
    )
    h = build_model(spec).hopping
    assert np.all(np.diag(h) == h[0, 0])


def test_renormalization_lowers_frequencies():
    spec = ChainSpec(
        n_ions=3,
        omega_z=TWO_PI * 40e3,
        masses=[ion_mass("Ca40")] * 3,
        local_frequencies=[TWO_PI * 440e3] * 3,
    )
    model = build_model(spec)
    inv = np.array([1 / 1.25 + 1 / 10.0, 2 / 1.25, 1 / 1.25 + 1 / 10.0])
    expected = np.sqrt((TWO_PI * 440e3) ** 2 - (TWO_PI * 40e3) ** 2 * inv)
    assert model.local_frequencies == pytest.approx(expected, rel=1e-12)


def test_over_renormalization_names_the_ion():
    spec = ChainSpec(
        n_ions=3,
        omega_z=TWO_PI * 40e3,
        masses=[ion_mass("Ca40")] * 3,
        local_frequencies=[TWO_PI * 200e3, TWO_PI * 50e3, TWO_PI * 200e3],
    )
    with pytest.raises(ChainModelError, match="ion 2"):
        build_model(spec)


def test_strong_coupling_warns():
    spec = ChainSpec(
        n_ions=2,
        omega_z=TWO_PI * 40e3,
        masses=[ion_mass("Ca40")] * 2,
        local_frequencies=[TWO_PI * 60e3] * 2,
        frequencies_are_renormalized=True,
    )
    with pytest.warns(UserWarning, match="not small"):
        build_model(spec)


def test_multi_isotope_frequency_difference():
    m170, m172 = ion_mass("Yb170"), ion_mass("Yb172")
    spec = ChainSpec(
        n_ions=2,
        omega_z=TWO_PI * 40e3,
        masses=[m170, m172],
        mode="multi-isotope",
        reference_mass=m170,
        omega_x0=TWO_PI * 500e3,
    )
    model = build_model(spec)
    diff_khz = (model.bare_frequencies[0] - model.bare_frequencies[1]) / (TWO_PI * 1e3)
    assert diff_khz == pytest.approx(500 * (1 - m170 / m172), rel=1e-12)
    assert 5.7 < diff_khz < 5.9
    assert 3 < diff_khz < 6
    c = model.couplings[0, 1]
    w = model.local_frequencies
    l = model.length_scale
    expected = 0.5 * spec.omega_z**2 / np.sqrt(w[0] * w[1]) * m170 / np.sqrt(m170 * m172) * (l / model.distances[0, 1]) ** 3
    assert c == pytest.approx(expected, rel=1e-12)


def test_angle_trap_gradient():
    spec = ChainSpec(
        n_ions=3,
        omega_z=TWO_PI * 40e3,
        masses=[ion_mass("Ca40")] * 3,
        mode="angle-trap",
        omega_x0=TWO_PI * 440e3,
        frequencies_are_renormalized=True,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        model = build_model(spec)
    z = model.positions
    assert model.local_frequencies == pytest.approx(TWO_PI * 440e3 * (1 + 400.0 * z), rel=1e-12)
    assert np.all(np.diff(model.local_frequencies) > 0)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n_ions=0, masses=[]),
        dict(masses=[1e-25, 1e-25]),
        dict(local_frequencies=[1.0, 2.0]),
        dict(mode="bogus"),
        dict(masses=[1e-25, 1e-25, -1e-25]),
    ],
)
def test_spec_validation(kwargs):
    base = dict(n_ions=3, omega_z=1.0, masses=[1e-25] * 3, local_frequencies=[1.0, 2.0, 3.0])
    base.update(kwargs)
    with pytest.raises(ValueError):
        ChainSpec(**base)
