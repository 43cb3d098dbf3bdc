"""Equilibration-rate fits, amplitude sweeps and noise statistics."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Sequence

import numpy as np
from scipy.optimize import least_squares, minimize_scalar

from .noise import NoiseSpec
from .propagators import ensemble_run


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class RateFit:
    gamma: float  # 1/s
    p_inf: float
    residual: float  # rms misfit
    window: tuple


def _profile(t, y):
    """Sum of squared errors as a function of log(gamma), asymptote eliminated."""

    def sse(log_gamma):
        f = -np.expm1(-np.exp(log_gamma) * t)
        p = f @ y / (f @ f)
        r = y - p * f
        return r @ r

    return sse


def fit_equilibration_rate(series, site=None) -> RateFit:
    """Least-squares fit of ``P(t) = p_inf (1 - exp(-gamma t))`` over the whole series.

    ``site`` is 0-based and defaults to the last site of the chain. The
    asymptote enters linearly and is solved in closed form for each trial
    rate; the rate is located by a log-spaced scan followed by golden-section
    search and a final Gauss-Newton polish.
    """
    t = np.asarray(series.times, dtype=float)
    site = series.populations.shape[1] - 1 if site is None else site
    y = np.asarray(series.populations[:, site], dtype=float)
    if len(t) < 3 or np.ptp(y) < 1e-14:
        raise FitError("cannot fit a rate to a constant or too short series")
    span = t[-1] - t[0]
    sse = _profile(t, y)

    grid = np.log(np.geomspace(1e-3 / span, 1e4 / span, 141))
    values = np.array([sse(g) for g in grid])
    k = int(np.argmin(values))
    if 0 < k < len(grid) - 1:
        best = minimize_scalar(sse, bracket=(grid[k - 1], grid[k], grid[k + 1]), method="golden", tol=1e-10).x
    else:
        best = grid[k]
    gamma = float(np.exp(best))
    f = -np.expm1(-gamma * t)
    p_inf = float(f @ y / (f @ f))

    def resid(x):
        return x[0] * -np.expm1(-x[1] * t) - y

    polished = least_squares(
        resid, [p_inf, gamma], x_scale=[max(abs(p_inf), 1e-12), gamma], method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15
    )
    if polished.x[1] > 0 and polished.cost * 2 <= sse(best):
        p_inf, gamma = map(float, polished.x)
    r = resid([p_inf, gamma])
    return RateFit(gamma, p_inf, float(np.sqrt(np.mean(r**2))), (float(t[0]), float(t[-1])))


@dataclass(frozen=True)
class RateRow:
    amplitude_khz: float
    kind: str
    gamma_per_s: float
    p_inf: float
    residual: float


def rate_sweep(
    amplitudes,
    model,
    noise: NoiseSpec,
    initial,
    t_grid,
    n_traj,
    master_seed,
    kinds: Sequence[str] = ("standing-wave", "independent"),
    bath=None,
    engine="single_excitation",
    site=None,
    threads=None,
) -> List[RateRow]:
    """Fitted equilibration rate for each amplitude (rad/s) and noise kind."""
    amplitudes = list(amplitudes)
    if not amplitudes:
        raise ValueError("need at least one amplitude")
    rows = []
    for amp in amplitudes:
        for kind in kinds:
            spec = replace(noise, kind=kind, amplitude=float(amp))
            result = ensemble_run(model, spec, bath, initial, t_grid, n_traj, master_seed, engine, threads)
            try:
                fit = fit_equilibration_rate(result.series, site)
                row = RateRow(amp / (2e3 * np.pi), kind, fit.gamma, fit.p_inf, fit.residual)
            except FitError:
                row = RateRow(amp / (2e3 * np.pi), kind, 0.0, 0.0, 0.0)
            rows.append(row)
    return rows


def correlation_stats(samples):
    """Sample mean and correlation matrix of shift samples (rows = draws).

    Entries involving a constant column are NaN.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[0] < 2:
        raise ValueError("need a (draws, sites) array with at least two draws")
    mean = samples.mean(axis=0)
    cov = np.cov(samples, rowvar=False, ddof=1)
    std = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = cov / np.outer(std, std)
    zero = std == 0
    corr[zero, :] = np.nan
    corr[:, zero] = np.nan
    return mean, corr
