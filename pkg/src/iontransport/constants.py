"""Physical constants (CODATA 2018) and a small table of isotope masses."""

import math

ELEMENTARY_CHARGE = 1.602176634e-19  # C, exact
VACUUM_PERMITTIVITY = 8.8541878128e-12  # F/m
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg
ELECTRON_MASS_U = 5.48579909065e-4  # u
COULOMB_CONSTANT = ELEMENTARY_CHARGE**2 / (4.0 * math.pi * VACUUM_PERMITTIVITY)

TWO_PI = 2.0 * math.pi

# neutral atomic masses in u (AME 2020)
ATOMIC_MASSES_U = {
    "Ca40": 39.962590863,
    "Ca42": 41.95861783,
    "Ca43": 42.95876644,
    "Ca44": 43.95548156,
    "Ca48": 47.95252276,
    "Yb168": 167.9338896,
    "Yb170": 169.9347664,
    "Yb171": 170.9363302,
    "Yb172": 171.9363859,
    "Yb173": 172.9382151,
    "Yb174": 173.9388664,
    "Yb176": 175.9425717,
}


def ion_mass(species, overrides=None):
    """Mass in kg of the singly charged ion of ``species`` (e.g. ``"Yb172"``)."""
    table = dict(ATOMIC_MASSES_U)
    if overrides:
        table.update(overrides)
    try:
        atomic = table[species]
    except KeyError:
        raise ValueError(f"unknown species {species!r}; known: {sorted(table)}") from None
    return (atomic - ELECTRON_MASS_U) * ATOMIC_MASS_UNIT


def khz(f):
    """Ordinary frequency in kHz -> angular frequency in rad/s."""
    return TWO_PI * 1e3 * f
