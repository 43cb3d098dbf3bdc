"""Reference solver: thermal master equation in a truncated Fock space.

Used only to validate the Gaussian moment engine on chains of up to three
sites. The density matrix is dense and is stored as a tensor with one row
and one column axis per site, so every ladder operator is a shifted slice.
The equation

    d rho/dt = -i [H, rho] + sum_j 2 kappa (nbar + 1) D[a_j] rho + 2 kappa nbar D[a_j^dag] rho

is integrated with an adaptive Runge-Kutta method interval by interval
along a recorded noise realization. Within an interval the on-site part
``sum_j w_j n_j`` is constant and diagonal in the Fock basis, and the
dissipators are phase covariant, so the integration runs in the interaction
picture of that part: only the slow hopping phases remain for the
integrator to resolve.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from math import factorial

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp

MAX_DIMENSION = 4096
LEAK_LIMIT = 1e-6


class TruncationError(RuntimeError):
    pass


@dataclass
class FockDensityMatrix:
    rho: np.ndarray
    cutoff: int  # highest retained Fock level per site
    n_sites: int

    @property
    def dim(self):
        return (self.cutoff + 1) ** self.n_sites

    def trace(self):
        return np.trace(self.rho)


@dataclass
class FockResult:
    times: np.ndarray
    occupations: np.ndarray
    first_moments: np.ndarray
    max_leak: float
    trace_error: float
    hermiticity_error: float


def ladder_operators(n_sites, cutoff):
    """Sparse annihilation operators a_j on the truncated tensor-product space."""
    levels = cutoff + 1
    a1 = sp.diags(np.sqrt(np.arange(1, levels, dtype=float)), 1, format="csr")
    eye = sp.identity(levels, format="csr")
    ops = []
    for j in range(n_sites):
        factors = [a1 if k == j else eye for k in range(n_sites)]
        ops.append(reduce(lambda x, y: sp.kron(x, y, format="csr"), factors).astype(complex))
    return ops


def _site_levels(n_sites, cutoff):
    idx = np.indices((cutoff + 1,) * n_sites).reshape(n_sites, -1)
    return idx  # idx[j, s] = Fock level of site j in basis state s


def product_state(site_vectors, cutoff):
    """Pure product state from one amplitude vector (length cutoff+1) per site."""
    psi = reduce(np.kron, [np.asarray(v, dtype=complex) for v in site_vectors])
    psi = psi / np.linalg.norm(psi)
    return FockDensityMatrix(np.outer(psi, psi.conj()), cutoff, len(site_vectors))


def coherent_amplitudes(alpha, cutoff):
    n = np.arange(cutoff + 1)
    norms = np.sqrt([float(factorial(k)) for k in n])
    return np.exp(-abs(alpha) ** 2 / 2) * alpha**n / norms


def fock_amplitudes(k, cutoff):
    v = np.zeros(cutoff + 1)
    v[k] = 1.0
    return v


def thermal_state(n_sites, cutoff, nbar):
    """Product of truncated thermal states (renormalized)."""
    p = (nbar / (1 + nbar)) ** np.arange(cutoff + 1) / (1 + nbar)
    diag = reduce(np.kron, [p] * n_sites)
    return FockDensityMatrix(np.diag(diag / diag.sum()).astype(complex), cutoff, n_sites)


def truncation_leak(rho, cutoff=None, n_sites=None):
    """Probability that at least one site sits in its highest retained level."""
    if isinstance(rho, FockDensityMatrix):
        cutoff, n_sites, rho = rho.cutoff, rho.n_sites, rho.rho
    elif cutoff is None:
        raise ValueError("cutoff is required for a bare density matrix")
    if n_sites is None:
        n_sites = int(round(np.log(rho.shape[0]) / np.log(cutoff + 1)))
    at_top = np.any(_site_levels(n_sites, cutoff) == cutoff, axis=0)
    return float(np.real(np.diagonal(rho))[at_top].sum())


def evolve_master(model, noise_process, bath, rho0, cutoff, t_grid, rtol=1e-9, atol=1e-12):
    """Integrate the truncated master equation along ``noise_process``.

    ``rho0`` is a :class:`FockDensityMatrix` (or a dense array) on
    ``model.n_ions`` sites with the given ``cutoff``. Returns occupations and
    lab-frame first moments at ``t_grid``.

    Raises:
        TruncationError: if the population of the top Fock level exceeds
            ``LEAK_LIMIT`` at any recorded time.
    """
    n = model.n_ions
    if n > 3:
        raise ValueError("the Fock oracle handles at most 3 sites")
    dim = (cutoff + 1) ** n
    if dim > MAX_DIMENSION:
        raise ValueError(f"Fock dimension {dim} exceeds the cap of {MAX_DIMENSION}")
    rho = rho0.rho if isinstance(rho0, FockDensityMatrix) else np.asarray(rho0, dtype=complex)
    if rho.shape != (dim, dim):
        raise ValueError(f"rho0 must be {dim}x{dim}, got {rho.shape}")

    times = np.asarray(t_grid, dtype=float)
    edges = noise_process.edges
    shape = (cutoff + 1,) * n
    root = np.sqrt(np.arange(cutoff + 1, dtype=float))
    levels = _site_levels(n, cutoff).astype(float)
    hops = [(p, q, model.hopping[p, q]) for p in range(n) for q in range(n) if p != q and model.hopping[p, q] != 0]
    g_down = 2.0 * bath.kappa * (bath.nbar + 1.0)
    g_up = 2.0 * bath.kappa * bath.nbar
    # anticommutator part of both dissipators is diagonal in the Fock basis
    # truncated a a^dag is n + 1 below the top level and 0 on it
    raised = np.where(levels < cutoff, levels + 1.0, 0.0)
    decay = 0.5 * (g_down * levels.sum(axis=0) + g_up * raised.sum(axis=0))
    decay = decay.reshape(shape + (1,) * n)

    def lower(x, axis):
        """a acting on ``axis``: y[k] = sqrt(k+1) x[k+1]."""
        y = np.zeros_like(x)
        src = [slice(None)] * x.ndim
        dst = [slice(None)] * x.ndim
        src[axis], dst[axis] = slice(1, None), slice(None, -1)
        bshape = [1] * x.ndim
        bshape[axis] = cutoff
        y[tuple(dst)] = x[tuple(src)] * root[1:].reshape(bshape)
        return y

    def lift(x, axis):
        """a^dag acting on ``axis``: y[k] = sqrt(k) x[k-1]."""
        y = np.zeros_like(x)
        src = [slice(None)] * x.ndim
        dst = [slice(None)] * x.ndim
        src[axis], dst[axis] = slice(None, -1), slice(1, None)
        bshape = [1] * x.ndim
        bshape[axis] = cutoff
        y[tuple(dst)] = x[tuple(src)] * root[1:].reshape(bshape)
        return y

    # rows of rho live on axes 0..n-1, columns on n..2n-1; for column axes
    # rho a^dag = lower(rho) and rho a = lift(rho)
    def rhs_factory(onsite):
        def rhs(tau, y):
            r = y.reshape(shape + shape)
            x = -decay * r
            for p, q, c in hops:
                x -= (1j * c * np.exp(1j * (onsite[p] - onsite[q]) * tau)) * lift(lower(r, q), p)
            m = x.reshape(dim, dim)
            out = m + m.conj().T
            for j in range(n):
                if g_down:
                    out += g_down * lower(lower(r, j), n + j).reshape(dim, dim)
                if g_up:
                    out += g_up * lift(lift(r, j), n + j).reshape(dim, dim)
            return out.ravel()

        return rhs

    occ = np.empty((len(times), n))
    moments = np.empty((len(times), n), dtype=complex)
    max_leak = 0.0

    def record(i, r, t):
        nonlocal max_leak
        populations = np.real(np.diagonal(r))
        occ[i] = levels @ populations
        rt = r.reshape(shape + shape)
        moments[i] = [np.trace(lower(rt, j).reshape(dim, dim)) for j in range(n)]
        leak = truncation_leak(r, cutoff, n)
        max_leak = max(max_leak, leak)
        if leak > LEAK_LIMIT:
            raise TruncationError(f"top-level population {leak:.3e} at t = {t:.6e} s; raise the cutoff")

    i = 0
    while i < len(times) and times[i] <= edges[0]:
        record(i, rho, times[i])
        i += 1
    for sample in noise_process:
        if i >= len(times):
            break
        t0, t1 = sample.interval
        inside = []
        while i + len(inside) < len(times) and times[i + len(inside)] <= t1 * (1 + 1e-12):
            inside.append(min(times[i + len(inside)], t1))
        # interaction picture with respect to the on-site part sum_j w_j n_j
        onsite = np.diag(model.hopping) + sample.shifts
        energy = onsite @ levels
        gap = energy[:, None] - energy[None, :]
        taus = sorted({t - t0 for t in inside} | {t1 - t0})
        sol = solve_ivp(
            rhs_factory(onsite),
            (0.0, t1 - t0),
            rho.ravel(),
            method="DOP853",
            t_eval=taus,
            rtol=rtol,
            atol=atol,
        )
        if not sol.success:
            raise RuntimeError(f"master-equation integration failed: {sol.message}")
        states = {tau: sol.y[:, m].reshape(dim, dim) * np.exp(-1j * gap * tau) for m, tau in enumerate(sol.t)}
        for t in inside:
            record(i, states[t - t0], t)
            i += 1
        rho = states[sol.t[-1]]

    return FockResult(
        times=times,
        occupations=occ,
        first_moments=moments,
        max_leak=max_leak,
        trace_error=float(abs(np.trace(rho) - 1.0)),
        hermiticity_error=float(np.max(np.abs(rho - rho.conj().T))),
    )
