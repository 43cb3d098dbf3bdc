import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iontransport.constants import TWO_PI
from iontransport.laser import (
    LaserParams,
    cancellation_detuning,
    raman_shift_amplitude,
    static_light_shift_factor,
    validity_report,
)

MHZ = TWO_PI * 1e6


def params(**kw):
    base = dict(Delta=TWO_PI * 100e9, Omega1=200 * MHZ, Omega2=TWO_PI * 2e9, deltaL_prime=10 * MHZ,
                eta_x=0.3, omega_x=0.4 * MHZ)
    base.update(kw)
    return LaserParams(**base)


def test_shift_amplitude_direct_evaluation():
    p = params()
    g = (200e6 * 2e9 / (4 * 100e9)) ** 2  # (Hz)^2, ordinary frequency
    expected = -g * 0.09 * (1 / (10e6 + 0.4e6) + 1 / (10e6 - 0.4e6))
    shift = raman_shift_amplitude(p) / TWO_PI
    assert shift == pytest.approx(expected, rel=1e-12)
    assert abs(shift) == pytest.approx(18.03e3, rel=1e-3)


def test_shift_scaling():
    p = params()
    assert raman_shift_amplitude(params(Omega1=0.0)) == 0.0
    assert raman_shift_amplitude(params(Omega1=400 * MHZ)) == pytest.approx(4 * raman_shift_amplitude(p))
    assert raman_shift_amplitude(p, 0.25) == pytest.approx(0.25 * raman_shift_amplitude(p))


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1))
def test_shift_monotone_in_intensity(a, b):
    lo, hi = sorted((a, b))
    p = params()
    assert abs(raman_shift_amplitude(p, lo)) <= abs(raman_shift_amplitude(p, hi))


def test_shift_pole_guard():
    with pytest.raises(ValueError, match="resonance"):
        raman_shift_amplitude(params(deltaL_prime=0.4 * MHZ + 100.0))
    with pytest.raises(ValueError):
        raman_shift_amplitude(params(), 1.5)


def test_cancellation_detuning():
    delta = cancellation_detuning(TWO_PI * 2e9, 10 * MHZ, 0.3, 0.4 * MHZ)
    leading = (TWO_PI * 2e9) ** 2 / (4 * 10 * MHZ)
    assert leading == pytest.approx(TWO_PI * 100e9, rel=1e-12)
    expected = leading * (1 + 0.09 * 10 / 10.4)
    assert delta == pytest.approx(expected, rel=1e-12)
    assert abs(delta / leading - 1) < 0.10
    assert cancellation_detuning(TWO_PI * 2e9, 10 * MHZ, 0.0, 0.4 * MHZ) == leading
    assert cancellation_detuning(TWO_PI * 2e9, -10 * MHZ, 0.0, 0.4 * MHZ) < 0
    with pytest.raises(ValueError):
        cancellation_detuning(TWO_PI * 2e9, 0.0, 0.3, 0.4 * MHZ)


@settings(max_examples=50, deadline=None)
@given(
    st.floats(0.1, 10.0),
    st.floats(1.0, 100.0),
    st.floats(0.0, 0.9),
    st.floats(0.05, 0.9),
)
def test_cancellation_nulls_static_term(omega2_ghz, deltal_mhz, eta, omega_x_mhz):
    delta = cancellation_detuning(TWO_PI * omega2_ghz * 1e9, deltal_mhz * MHZ, eta, omega_x_mhz * MHZ)
    p = LaserParams(delta, MHZ, TWO_PI * omega2_ghz * 1e9, deltal_mhz * MHZ, max(eta, 1e-3), omega_x_mhz * MHZ)
    if eta >= 1e-3:
        assert abs(static_light_shift_factor(p)) < 1e-12


def test_bare_detuning_adds_level_two_shift():
    p = params()
    assert p.deltaL == pytest.approx(p.deltaL_prime + p.Omega2**2 / (4 * p.Delta))
    assert p.raman_coupling == pytest.approx(1 * MHZ)


def test_validity_report_for_quoted_parameters():
    report = validity_report(params(), [0.4 * MHZ])
    r = report.ratios
    assert r["|Omega2| / |Omega1|"] == pytest.approx(10.0)
    assert r["|deltaL'| / g_R"] == pytest.approx(10.0)
    assert r["|Delta| / Gamma"] == pytest.approx(5000.0)
    # detuning from the red sideband of a 400 kHz mode is 9.6 MHz, so that
    # margin is 9.6 rather than 10
    assert r["|deltaL' - w1| / g_R"] == pytest.approx(9.6)
    assert set(report.failures) == {"|deltaL' - w1| / g_R"}
    assert not report.passed
    assert "FAIL" in report.table()


def test_validity_report_passes_with_wider_margin_room():
    report = validity_report(params(), [0.4 * MHZ], required_margin=9.5)
    assert report.passed
    assert all(v >= 0 for v in report.ratios.values())


def test_large_linewidth_breaks_detuning_condition():
    p = params(Gamma=2 * TWO_PI * 100e9)
    assert "|Delta| / Gamma" in validity_report(p, [0.4 * MHZ]).failures


def test_validity_needs_modes():
    with pytest.raises(ValueError):
        validity_report(params(), [])


def test_params_validation():
    with pytest.raises(ValueError):
        params(eta_x=1.2)
    with pytest.raises(ValueError):
        params(omega_x=-1.0)
