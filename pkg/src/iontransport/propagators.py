"""Time evolution of the chain under hopping plus piecewise-constant shifts.

Two engines share one core. The single-excitation engine propagates a
wavefunction over sites. The Gaussian engine propagates first moments
``mu_j = <a_j>`` and central second moments ``V_jk = <a_j^dag a_k> - mu_j^* mu_k``
under a thermal bath with damping ``kappa`` and occupation ``nbar``:

    d mu / dt = (-i H - kappa) mu
    d V / dt  = i [H, V] + 2 kappa (nbar - V)

Within a dwell interval ``H`` is constant, so both are integrated exactly with
the eigendecomposition of ``H``. The only time discretization is the dwell
itself.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .noise import make_process, trajectory_rng

ENGINES = ("single_excitation", "gaussian")
CHUNK_SIZE = 50  # trajectories per work unit; fixed so results never depend on threading


class NumericalError(RuntimeError):
    pass


@dataclass(frozen=True)
class BathSpec:
    kappa: float = 0.0  # 1/s
    nbar: float = 0.0
    init_occupation: float = 0.0

    def __post_init__(self):
        for name in ("kappa", "nbar", "init_occupation"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"bath {name} must be >= 0, got {getattr(self, name)!r}")


@dataclass
class GaussianState:
    """First moments and central second moments of a number-conserving Gaussian state."""

    mu: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=complex)
        self.V = np.asarray(self.V, dtype=complex)
        n = self.mu.shape[0]
        if self.V.shape != (n, n):
            raise ValueError(f"V must be {n}x{n}, got {self.V.shape}")
        if not np.allclose(self.V, self.V.conj().T, rtol=0, atol=1e-12):
            raise ValueError("V must be Hermitian")
        if np.linalg.eigvalsh(self.V).min() < -1e-10 * max(1.0, np.abs(self.V).max()):
            raise ValueError("V must be positive semidefinite")

    @classmethod
    def vacuum(cls, n):
        return cls(np.zeros(n), np.zeros((n, n)))

    @classmethod
    def thermal(cls, n, nbar):
        return cls(np.zeros(n), nbar * np.eye(n))

    @classmethod
    def coherent(cls, n, site, alpha=1.0, occupation=0.0):
        """Coherent amplitude ``alpha`` on ``site`` (0-based) over thermal occupation."""
        mu = np.zeros(n, dtype=complex)
        mu[site] = alpha
        return cls(mu, occupation * np.eye(n))

    @property
    def n_sites(self):
        return self.mu.shape[0]

    def occupations(self):
        return np.real(np.diag(self.V)) + np.abs(self.mu) ** 2


@dataclass
class TimeSeries:
    """Site-resolved observables on a time grid (seconds).

    ``populations`` holds P_j(t) for the single-excitation engine and the
    mean occupations n_j(t) for the Gaussian engine. ``filtered`` is the
    realization average of |<a_j>|^2 and ``mu`` the first moments of a single
    trajectory, when available.
    """

    times: np.ndarray
    populations: np.ndarray
    filtered: Optional[np.ndarray] = None
    mu: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n_sites(self):
        return self.populations.shape[1]

    def totals(self):
        return self.populations.sum(axis=1)


def _check_symmetric(h):
    h = np.asarray(h)
    if h.ndim < 2 or h.shape[-1] != h.shape[-2]:
        raise ValueError(f"hopping matrix must be square, got shape {h.shape}")
    if np.iscomplexobj(h) or not np.array_equal(h, np.swapaxes(h, -1, -2)):
        raise ValueError("effective hopping matrix must be real symmetric")
    return h


def _propagators(energies, vectors, tau):
    """exp(-i H tau) for a stack of diagonalized real symmetric H."""
    phase = np.exp(-1j * energies * tau)
    return (vectors * phase[..., None, :]) @ np.swapaxes(vectors, -1, -2)


def step_unitary(h_eff, psi, dt):
    """Advance a single-excitation state by ``dt`` under constant ``h_eff`` (rad/s)."""
    h_eff = _check_symmetric(h_eff)
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    energies, vectors = np.linalg.eigh(h_eff)
    return _propagators(energies, vectors, dt) @ np.asarray(psi, dtype=complex)


def _evolve_batch(hopping, shifts, edges, times, mu0, V0=None, kappa=0.0, nbar=0.0):
    """Propagate a batch of trajectories through their shift tables.

    ``shifts`` has shape (batch, intervals, sites) and ``edges`` the interval
    boundaries. Returns first moments at ``times`` and, when ``V0`` is given,
    occupations ``V_jj + |mu_j|^2``.
    """
    batch, n_int, n = shifts.shape
    n_out = len(times)
    mu = np.broadcast_to(np.asarray(mu0, dtype=complex), (batch, n)).copy()
    V = None if V0 is None else np.broadcast_to(np.asarray(V0, dtype=complex), (batch, n, n)).copy()
    mu_out = np.empty((batch, n_out, n), dtype=complex)
    occ_out = None if V is None else np.empty((batch, n_out, n))
    eye = np.eye(n)

    def advance(energies, vectors, tau):
        w = _propagators(energies, vectors, tau)
        new_mu = np.einsum("bij,bj->bi", w, mu)
        if kappa:
            new_mu *= np.exp(-kappa * tau)
        new_V = None
        if V is not None:
            new_V = w.conj() @ V @ w
            if kappa:
                new_V = new_V * np.exp(-2.0 * kappa * tau) - nbar * np.expm1(-2.0 * kappa * tau) * eye
        return new_mu, new_V

    def record(i, m, v):
        mu_out[:, i] = m
        if v is not None:
            occ_out[:, i] = np.real(np.diagonal(v, axis1=1, axis2=2)) + np.abs(m) ** 2

    i = 0
    while i < n_out and times[i] <= edges[0]:
        record(i, mu, V)
        i += 1
    for k in range(n_int):
        t0, t1 = edges[k], edges[k + 1]
        h = hopping + shifts[:, k, :, None] * eye
        energies, vectors = np.linalg.eigh(h)
        while i < n_out and times[i] < t1:
            record(i, *advance(energies, vectors, times[i] - t0))
            i += 1
        mu, V = advance(energies, vectors, t1 - t0)
        if V is not None:
            V = 0.5 * (V + np.swapaxes(V, 1, 2).conj())
            floor = np.linalg.eigvalsh(V).min()
            if floor < -1e-10 * max(1.0, np.abs(V).max()):
                raise NumericalError(
                    f"second moments lost positivity (eigenvalue {floor:.3e}) at t = {t1:.6e} s"
                )
        while i < n_out and times[i] <= t1:
            record(i, mu, V)
            i += 1
    return mu_out, occ_out


def _check_times(times, edges):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("time grid must be a non-empty 1-d array")
    if np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly increasing")
    if times[0] < edges[0] or times[-1] > edges[-1] * (1 + 1e-12):
        raise ValueError(
            f"time grid [{times[0]}, {times[-1]}] s is outside the noise record [0, {edges[-1]}] s"
        )
    if times[-1] > edges[-1]:
        times = times.copy()
        times[-1] = edges[-1]
    return times


def run_single_excitation_trajectory(model, noise_process, t_grid, psi0):
    """Populations |psi_j(t)|^2 along one recorded noise realization."""
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.vdot(psi0, psi0).real - 1.0) > 1e-9:
        raise ValueError("initial single-excitation state must be normalized")
    times = _check_times(t_grid, noise_process.edges)
    hopping = _check_symmetric(model.hopping)
    amps, _ = _evolve_batch(hopping, noise_process.shifts[None], noise_process.edges, times, psi0)
    amps = amps[0]
    return TimeSeries(times, np.abs(amps) ** 2, mu=amps)


def run_gaussian_trajectory(model, noise_process, bath, state0, t_grid):
    """Occupations and first moments of a Gaussian state along one noise realization."""
    times = _check_times(t_grid, noise_process.edges)
    hopping = _check_symmetric(model.hopping)
    mu, occ = _evolve_batch(
        hopping,
        noise_process.shifts[None],
        noise_process.edges,
        times,
        state0.mu,
        state0.V,
        bath.kappa,
        bath.nbar,
    )
    return TimeSeries(times, occ[0], filtered=np.abs(mu[0]) ** 2, mu=mu[0])


@dataclass(frozen=True)
class Initial:
    """Initial condition: ``site`` (one phonon), ``coherent`` (amplitude alpha) or ``vacuum``.

    Sites are 0-based here; the configuration layer uses 1-based labels.
    """

    kind: str = "site"
    site: int = 0
    alpha: complex = 1.0

    def __post_init__(self):
        if self.kind not in ("site", "coherent", "vacuum"):
            raise ValueError(f"unknown initial state kind {self.kind!r}")

    def amplitudes(self, n):
        if not 0 <= self.site < n:
            raise ValueError(f"initial site {self.site + 1} outside a chain of {n} ions")
        mu = np.zeros(n, dtype=complex)
        if self.kind == "site":
            mu[self.site] = 1.0
        elif self.kind == "coherent":
            mu[self.site] = self.alpha
        return mu


@dataclass
class EnsembleResult:
    series: TimeSeries
    mu: np.ndarray  # (trajectories, times, sites) first moments / amplitudes
    populations: np.ndarray  # (trajectories, times, sites)


def _pairwise_mean(x):
    # numpy sums contiguous last axes pairwise; put trajectories there
    return np.ascontiguousarray(np.moveaxis(x, 0, -1)).sum(axis=-1) / x.shape[0]


def ensemble_run(
    model,
    noise_spec,
    bath,
    initial,
    t_grid,
    n_traj,
    master_seed,
    engine="single_excitation",
    threads=None,
    t_total=None,
):
    """Average ``n_traj`` independent noise realizations.

    Trajectory ``i`` draws its noise from ``trajectory_rng(master_seed, i)``
    and lands in slot ``i`` of the result, so the output is identical for
    any ``threads`` value.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    if engine not in ENGINES:
        raise ValueError(f"engine must be one of {ENGINES}, got {engine!r}")
    bath = bath or BathSpec()
    times = np.asarray(t_grid, dtype=float)
    t_total = float(times[-1]) if t_total is None else float(t_total)
    hopping = _check_symmetric(model.hopping)
    n = model.n_ions
    mu0 = initial.amplitudes(n)

    if engine == "single_excitation":
        if initial.kind == "vacuum" or abs(np.vdot(mu0, mu0).real - 1.0) > 1e-9:
            raise ValueError("single-excitation engine needs a normalized one-phonon initial state")
        V0 = None
        kappa = nbar = 0.0
    else:
        V0 = bath.init_occupation * np.eye(n)
        kappa, nbar = bath.kappa, bath.nbar

    probe = make_process(noise_spec, model.positions, t_total, trajectory_rng(master_seed, 0))
    times = _check_times(times, probe.edges)

    mu_all = np.empty((n_traj, len(times), n), dtype=complex)
    pop_all = np.empty((n_traj, len(times), n))

    def work(start):
        stop = min(start + CHUNK_SIZE, n_traj)
        tables = np.stack(
            [
                make_process(noise_spec, model.positions, t_total, trajectory_rng(master_seed, i)).shifts
                for i in range(start, stop)
            ]
        )
        mu, occ = _evolve_batch(hopping, tables, probe.edges, times, mu0, V0, kappa, nbar)
        mu_all[start:stop] = mu
        pop_all[start:stop] = np.abs(mu) ** 2 if occ is None else occ

    starts = range(0, n_traj, CHUNK_SIZE)
    threads = threads or os.cpu_count() or 1
    if threads == 1:
        for s in starts:
            work(s)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for fut in [pool.submit(work, s) for s in starts]:
                fut.result()

    series = TimeSeries(
        times,
        _pairwise_mean(pop_all),
        filtered=_pairwise_mean(np.abs(mu_all) ** 2),
    )
    return EnsembleResult(series, mu_all, pop_all)
