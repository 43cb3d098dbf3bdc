"""Two-photon (Lambda-system) design of the engineered frequency shifts.

All rates are angular frequencies in rad/s. The ion stays in its lower
level; eliminating the excited level and then the Raman-coupled second
level leaves a shift of the transverse frequency proportional to the local
intensity ``|f_z(z)|^2`` of the first beam. Choosing the single-photon
detuning with :func:`cancellation_detuning` removes the phonon-independent
light shift.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Sequence

import numpy as np

POLE_GUARD = 1e3  # rad/s


@dataclass(frozen=True)
class LaserParams:
    Delta: float
    Omega1: float
    Omega2: float
    deltaL_prime: float
    eta_x: float
    omega_x: float
    Gamma: float = 2 * np.pi * 20e6  # typical dipole linewidth, not a measured value

    def __post_init__(self):
        if not 0 < self.eta_x < 1:
            raise ValueError(f"eta_x must lie in (0, 1), got {self.eta_x!r}")
        if self.omega_x < 0 or self.Gamma < 0:
            raise ValueError("omega_x and Gamma must be non-negative")

    @property
    def raman_coupling(self):
        """Two-photon Rabi frequency |Omega1 Omega2| / (4 |Delta|)."""
        return abs(self.Omega1 * self.Omega2) / (4 * abs(self.Delta))

    @property
    def stark_shift_2(self):
        """Light shift of the second lower level, |Omega2|^2 / (4 Delta)."""
        return abs(self.Omega2) ** 2 / (4 * self.Delta)

    @property
    def deltaL(self):
        """Bare Raman detuning before absorbing the level-2 light shift."""
        return self.deltaL_prime + self.stark_shift_2


def _guard(value, what):
    if abs(value) < POLE_GUARD:
        raise ValueError(f"{what} = {value:.3e} rad/s is too close to a resonance")


def raman_shift_amplitude(p: LaserParams, fz_sq=1.0):
    """Shift of the transverse frequency per phonon at local intensity ``fz_sq``."""
    if not 0 <= fz_sq <= 1:
        raise ValueError(f"fz_sq must lie in [0, 1], got {fz_sq!r}")
    _guard(p.deltaL_prime + p.omega_x, "deltaL' + omega_x")
    _guard(p.deltaL_prime - p.omega_x, "deltaL' - omega_x")
    resonance = 1 / (p.deltaL_prime + p.omega_x) + 1 / (p.deltaL_prime - p.omega_x)
    return -abs(p.Omega1 * p.Omega2 / (4 * p.Delta)) ** 2 * fz_sq * p.eta_x**2 * resonance


def cancellation_detuning(Omega2, deltaL_prime, eta_x, omega_x):
    """Single-photon detuning that nulls the phonon-independent light shift."""
    _guard(deltaL_prime, "deltaL'")
    _guard(deltaL_prime + omega_x, "deltaL' + omega_x")
    return abs(Omega2) ** 2 * (1 / deltaL_prime + eta_x**2 / (deltaL_prime + omega_x)) / 4


def static_light_shift_factor(p: LaserParams):
    """Bracket multiplying the phonon-independent term; zero when the light shift cancels."""
    return 1 - abs(p.Omega2) ** 2 / (4 * p.Delta) * (
        1 / p.deltaL_prime + p.eta_x**2 / (p.deltaL_prime + p.omega_x)
    )


@dataclass
class ValidityReport:
    """Ratios ``large / small`` for every separation-of-scales condition."""

    ratios: Dict[str, float] = field(default_factory=dict)
    required_margin: float = 10.0
    rtol: float = 1e-9

    @property
    def failures(self):
        floor = self.required_margin * (1 - self.rtol)
        return {k: v for k, v in self.ratios.items() if not v >= floor}

    @property
    def passed(self):
        return not self.failures

    def table(self):
        width = max(len(k) for k in self.ratios)
        lines = [f"{'condition':<{width}}  {'ratio':>12}  status"]
        for name, value in self.ratios.items():
            status = "ok" if name not in self.failures else "FAIL"
            lines.append(f"{name:<{width}}  {value:12.4g}  {status}")
        lines.append(f"required margin {self.required_margin:g}: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _ratio(big, small):
    return float("inf") if small == 0 else abs(big) / abs(small)


def validity_report(p: LaserParams, mode_frequencies: Sequence[float], required_margin=10.0):
    """Check the adiabatic-elimination and dispersive-Raman conditions.

    ``mode_frequencies`` are the motional mode frequencies (rad/s) that the
    Raman detunings must stay away from.
    """
    modes = list(mode_frequencies)
    if not modes:
        raise ValueError("need at least one mode frequency")
    r = {}
    D = p.Delta
    r["|Delta| / |Omega1|"] = _ratio(D, p.Omega1)
    r["|Delta| / |Omega2|"] = _ratio(D, p.Omega2)
    r["|Delta| / Gamma"] = _ratio(D, p.Gamma)
    r["|Delta| / |deltaL|"] = _ratio(D, p.deltaL)
    for k, w in enumerate(modes, 1):
        r[f"|Delta| / |deltaL + w{k}|"] = _ratio(D, p.deltaL + w)
        r[f"|Delta| / |deltaL - w{k}|"] = _ratio(D, p.deltaL - w)
    r["|Omega2| / |Omega1|"] = _ratio(p.Omega2, p.Omega1)
    g = p.raman_coupling
    r["|deltaL'| / g_R"] = _ratio(p.deltaL_prime, g)
    for k, w in enumerate(modes, 1):
        r[f"|deltaL' + w{k}| / g_R"] = _ratio(p.deltaL_prime + w, g)
        r[f"|deltaL' - w{k}| / g_R"] = _ratio(p.deltaL_prime - w, g)
    return ValidityReport(r, required_margin)
