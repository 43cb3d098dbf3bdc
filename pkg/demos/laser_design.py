"""
Designing the frequency shifts with a two-photon drive
========================================================

A far-detuned Raman pair shifts the transverse frequency in proportion to
the local intensity of the first beam. Choosing the single-photon detuning
well cancels the phonon-independent light shift.
"""

import numpy as np

from iontransport import LaserParams, cancellation_detuning, raman_shift_amplitude, validity_report

TWO_PI = 2 * np.pi
p = LaserParams(
    Delta=TWO_PI * 100e9,
    Omega1=TWO_PI * 200e6,
    Omega2=TWO_PI * 2e9,
    deltaL_prime=TWO_PI * 10e6,
    eta_x=0.3,
    omega_x=TWO_PI * 400e3,
)

print(f"largest shift: {raman_shift_amplitude(p) / (TWO_PI * 1e3):.2f} kHz")
delta = cancellation_detuning(p.Omega2, p.deltaL_prime, p.eta_x, p.omega_x)
print(f"detuning that cancels the static light shift: {delta / (TWO_PI * 1e9):.2f} GHz")

# how close each approximation is to its limit
print(validity_report(p, [p.omega_x]).table())

# the shift scales with the square of the first Rabi frequency
for scale in (0.5, 1.0, 1.5):
    q = LaserParams(p.Delta, scale * p.Omega1, p.Omega2, p.deltaL_prime, p.eta_x, p.omega_x)
    print(f"Omega1 x {scale}: {raman_shift_amplitude(q) / (TWO_PI * 1e3):8.2f} kHz")
