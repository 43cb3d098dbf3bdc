"""Linear ion chains with site-dependent transverse confinement.

The transverse motion of each ion is treated as a local oscillator. Coulomb
repulsion renormalizes the local frequencies and couples neighbouring
oscillators through a number-conserving hopping term, so the single-phonon
dynamics is governed by a real symmetric ``hopping`` matrix with the local
frequencies on the diagonal and the couplings off it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .constants import COULOMB_CONSTANT

MODES = ("explicit", "angle-trap", "multi-isotope")

# 10 % change of the transverse frequency over 250 um of axial displacement
DEFAULT_RELATIVE_GRADIENT = 0.10 / 250e-6  # 1/m


class ChainModelError(ValueError):
    """Raised when the requested chain has no stable transverse configuration."""


class ConvergenceError(RuntimeError):
    """Raised when the equilibrium solver fails to reach its residual target."""


def length_scale(mass, omega_z):
    """Characteristic inter-ion distance ``(e^2 / (4 pi eps0 m omega_z^2))**(1/3)`` in m."""
    if not mass > 0 or not omega_z > 0:
        raise ValueError(f"mass and omega_z must be positive, got {mass!r}, {omega_z!r}")
    return (COULOMB_CONSTANT / (mass * omega_z**2)) ** (1.0 / 3.0)


def _axial_force(u):
    diff = u[:, None] - u[None, :]
    np.fill_diagonal(diff, np.inf)
    return u - np.sum(np.sign(diff) / diff**2, axis=1)


def _axial_energy(u):
    diff = np.abs(u[:, None] - u[None, :])
    iu = np.triu_indices(len(u), 1)
    return 0.5 * np.sum(u**2) + np.sum(1.0 / diff[iu])


def equilibrium_positions(n_ions, tol=1e-12, max_iter=200):
    """Dimensionless equilibrium positions of ``n_ions`` in a harmonic axial well.

    Solves the force balance ``u_j = sum_k sign(u_j - u_k) / (u_j - u_k)**2``
    by damped Newton iteration. Multiply by :func:`length_scale` to obtain
    positions in metres.

    Raises:
        ConvergenceError: if the residual is still above ``tol`` after
            ``max_iter`` iterations.
    """
    n = int(n_ions)
    if n < 1:
        raise ValueError(f"n_ions must be >= 1, got {n_ions!r}")
    if n == 1:
        return np.zeros(1)

    # spacing estimate 2.018 / n**0.559 for the central ions
    u = np.linspace(-1.0, 1.0, n) * 0.5 * (n - 1) * 2.018 / n**0.559
    residual = np.inf
    for _ in range(max_iter):
        f = _axial_force(u)
        residual = np.max(np.abs(f))
        if residual < tol:
            break
        diff = u[:, None] - u[None, :]
        np.fill_diagonal(diff, np.inf)
        k = 2.0 / np.abs(diff) ** 3
        jac = -k
        np.fill_diagonal(jac, 1.0 + k.sum(axis=1))
        step = np.linalg.solve(jac, f)
        e0 = _axial_energy(u)
        damping = 1.0
        while damping > 1e-6:
            trial = u - damping * step
            if np.all(np.diff(trial) > 0) and _axial_energy(trial) <= e0 + 1e-14:
                break
            damping *= 0.5
        u = trial
    # the equilibrium is mirror symmetric; remove rounding asymmetry
    u = 0.5 * (u - u[::-1])
    residual = np.max(np.abs(_axial_force(u)))
    if residual >= tol:
        raise ConvergenceError(
            f"equilibrium solve for {n} ions stalled at residual {residual:.3e}"
        )
    return u


@dataclass(frozen=True)
class ChainSpec:
    """Input description of a chain.

    ``local_frequencies`` (rad/s) is used by the ``explicit`` mode. The
    ``angle-trap`` mode derives bare transverse frequencies from
    ``omega_x0`` at the trap centre and ``relative_gradient`` (1/m), and the
    ``multi-isotope`` mode scales ``omega_x0`` (defined for
    ``reference_mass``) by the inverse ion mass.
    """

    n_ions: int
    omega_z: float
    masses: Sequence[float]
    mode: str = "explicit"
    local_frequencies: Optional[Sequence[float]] = None
    reference_mass: Optional[float] = None
    frequencies_are_renormalized: bool = False
    omega_x0: Optional[float] = None
    relative_gradient: float = DEFAULT_RELATIVE_GRADIENT

    def __post_init__(self):
        if self.n_ions < 1:
            raise ValueError("n_ions must be >= 1")
        if not self.omega_z > 0:
            raise ValueError("omega_z must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if len(self.masses) != self.n_ions:
            raise ValueError(f"expected {self.n_ions} masses, got {len(self.masses)}")
        if any(not m > 0 for m in self.masses):
            raise ValueError("all masses must be positive")
        if self.reference_mass is not None and not self.reference_mass > 0:
            raise ValueError("reference_mass must be positive")
        if self.mode == "explicit":
            if self.local_frequencies is None or len(self.local_frequencies) != self.n_ions:
                raise ValueError("explicit mode needs one local frequency per ion")
        elif self.omega_x0 is None or not self.omega_x0 > 0:
            raise ValueError(f"{self.mode} mode needs a positive omega_x0")


@dataclass(frozen=True)
class ChainModel:
    positions: np.ndarray
    length_scale: float
    distances: np.ndarray
    bare_frequencies: np.ndarray
    local_frequencies: np.ndarray
    couplings: np.ndarray
    hopping: np.ndarray
    masses: np.ndarray = field(repr=False)
    omega_z: float = 0.0

    @property
    def n_ions(self):
        return len(self.positions)

    @property
    def spacing(self):
        """Mean nearest-neighbour distance (m); nan for a single ion."""
        if self.n_ions < 2:
            return float("nan")
        return float(np.mean(np.diff(self.positions)))

    def coupling_ratio(self):
        """max |c_jk| / min omega_j, which must stay small for the hopping picture."""
        return float(np.max(np.abs(self.couplings)) / np.min(self.local_frequencies))

    def localization(self):
        """Largest weight any normal mode carries outside its dominant site."""
        _, vecs = np.linalg.eigh(self.hopping)
        weights = np.abs(vecs) ** 2
        return float(np.max(1.0 - weights.max(axis=0)))


def _bare_frequencies(spec, positions, masses, m0):
    if spec.mode == "explicit":
        return np.asarray(spec.local_frequencies, dtype=float)
    if spec.mode == "angle-trap":
        return spec.omega_x0 * (1.0 + spec.relative_gradient * positions)
    return (m0 / masses) * spec.omega_x0


def build_model(spec: ChainSpec) -> ChainModel:
    """Assemble positions, renormalized local frequencies and couplings for ``spec``.

    Raises:
        ChainModelError: if renormalization drives some omega_j**2 to zero or below.
    """
    masses = np.asarray(spec.masses, dtype=float)
    m0 = float(spec.reference_mass) if spec.reference_mass is not None else float(masses[0])
    scale = length_scale(m0, spec.omega_z)
    positions = scale * equilibrium_positions(spec.n_ions)

    distances = np.abs(positions[:, None] - positions[None, :])
    with np.errstate(divide="ignore"):
        inv_cube = np.where(distances > 0, (scale / np.where(distances > 0, distances, 1.0)) ** 3, 0.0)

    bare = _bare_frequencies(spec, positions, masses, m0)
    if spec.frequencies_are_renormalized:
        local = bare.copy()
    else:
        omega_sq = bare**2 - spec.omega_z**2 * (m0 / masses) * inv_cube.sum(axis=1)
        bad = np.flatnonzero(omega_sq <= 0)
        if bad.size:
            j = int(bad[0])
            raise ChainModelError(
                f"ion {j + 1}: renormalized omega^2 = {omega_sq[j]:.4g} rad^2/s^2 <= 0 "
                "(transverse confinement too weak for a linear chain)"
            )
        local = np.sqrt(omega_sq)
    if np.any(local <= 0):
        raise ChainModelError(f"local frequencies must be positive, got {local}")

    couplings = (
        0.5
        * spec.omega_z**2
        / np.sqrt(np.outer(local, local))
        * m0
        / np.sqrt(np.outer(masses, masses))
        * inv_cube
    )
    couplings = 0.5 * (couplings + couplings.T)
    hopping = couplings + np.diag(local)

    model = ChainModel(
        positions=positions,
        length_scale=scale,
        distances=distances,
        bare_frequencies=bare,
        local_frequencies=local,
        couplings=couplings,
        hopping=hopping,
        masses=masses,
        omega_z=float(spec.omega_z),
    )
    if spec.n_ions > 1 and model.coupling_ratio() > 0.1:
        warnings.warn(
            f"couplings are not small compared with the local frequencies "
            f"(ratio {model.coupling_ratio():.3f}); the hopping picture is unreliable",
            stacklevel=2,
        )
    return model
