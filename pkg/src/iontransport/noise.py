"""Piecewise-constant random shifts of the local transverse frequencies.

A standing wave of fixed wavelength and random phase produces shifts
``2 A sin^2(2 pi z_j / lambda + phi)`` that lie in ``[0, 2A]``. The phase is
redrawn after every dwell interval. With ``lambda = 8 d / (2 n + 1)`` the
shifts of nearest neighbours are uncorrelated and those of next-nearest
neighbours are perfectly anticorrelated. The ``independent`` kind draws one
phase per ion, which keeps the marginal law but removes all spatial
correlation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

KINDS = ("none", "standing-wave", "independent", "static")


def trajectory_rng(master_seed, index=None):
    """Counter-based generator for one trajectory.

    Streams are keyed by ``(master_seed, index)`` only, so a trajectory sees
    the same numbers whatever order or worker it runs in. ``index`` may be a
    tuple to key auxiliary streams that must not collide with trajectories.
    """
    if index is None:
        key = ()
    elif isinstance(index, tuple):
        key = tuple(int(k) for k in index)
    else:
        key = (int(index),)
    seq = np.random.SeedSequence(int(master_seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "none"
    amplitude: float = 0.0  # rad/s
    dwell: float = 20e-6  # s
    lambda_ratio_n: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"noise kind must be one of {KINDS}, got {self.kind!r}")
        if not self.amplitude >= 0:
            raise ValueError(f"noise amplitude must be >= 0, got {self.amplitude!r}")
        if not self.dwell > 0:
            raise ValueError(f"dwell must be positive, got {self.dwell!r}")
        if self.lambda_ratio_n < 0:
            raise ValueError("lambda_ratio_n must be a non-negative integer")


@dataclass(frozen=True)
class ShiftSample:
    shifts: np.ndarray  # rad/s, one entry per ion
    interval: tuple


def standing_wave_wavelength(positions, n=0):
    """Axial wavelength ``8 d / (2 n + 1)`` with d the mean nearest-neighbour spacing."""
    positions = np.asarray(positions, dtype=float)
    if positions.size < 2:
        raise ValueError("a standing-wave wavelength needs at least two ion positions")
    d = float(np.mean(np.diff(np.sort(positions))))
    return 8.0 * d / (2 * n + 1)


def _shifts_from_phases(spec, positions, phases):
    """Map drawn phases (one per interval, or one per interval and ion) to shifts."""
    if spec.kind == "independent":
        return 2.0 * spec.amplitude * np.sin(phases) ** 2
    k = 2.0 * math.pi / standing_wave_wavelength(positions, spec.lambda_ratio_n)
    arg = k * np.asarray(positions)[None, :] + phases[:, None]
    return 2.0 * spec.amplitude * np.sin(arg) ** 2


def draw_shifts(spec, positions, n_intervals, rng):
    """Shift table of shape ``(n_intervals, n_ions)`` drawn from ``rng``.

    This is the single definition of how a stream is consumed: standing
    waves take one phase per interval, independent noise one phase per
    interval and ion, and static noise a single phase.
    """
    n_ions = len(positions)
    if spec.kind == "none":
        return np.zeros((n_intervals, n_ions))
    if spec.kind == "standing-wave":
        phases = rng.uniform(0.0, 2.0 * math.pi, size=n_intervals)
    elif spec.kind == "static":
        phases = np.repeat(rng.uniform(0.0, 2.0 * math.pi, size=1), n_intervals)
    else:
        phases = rng.uniform(0.0, 2.0 * math.pi, size=(n_intervals, n_ions))
    return _shifts_from_phases(spec, positions, phases)


def sample_shifts(spec, positions, rng, interval=(0.0, None)):
    """One independent draw of the per-ion shifts."""
    start = interval[0]
    end = interval[1] if interval[1] is not None else start + spec.dwell
    kind = "standing-wave" if spec.kind == "static" else spec.kind
    one = NoiseSpec(kind, spec.amplitude, spec.dwell, spec.lambda_ratio_n, spec.seed)
    return ShiftSample(draw_shifts(one, positions, 1, rng)[0], (start, end))


def interval_edges(t_total, dwell):
    """Boundaries of consecutive dwell intervals covering ``[0, t_total)``."""
    if not t_total > 0:
        raise ValueError(f"t_total must be positive, got {t_total!r}")
    n = max(1, math.ceil(t_total / dwell - 1e-9))
    edges = dwell * np.arange(n + 1, dtype=float)
    edges[-1] = t_total
    return edges


@dataclass(frozen=True)
class NoiseProcess:
    """A recorded realization: ``shifts[k]`` applies on ``[edges[k], edges[k+1])``."""

    edges: np.ndarray
    shifts: np.ndarray

    def __len__(self):
        return len(self.shifts)

    def __iter__(self) -> Iterator[ShiftSample]:
        for k in range(len(self.shifts)):
            yield ShiftSample(self.shifts[k], (float(self.edges[k]), float(self.edges[k + 1])))

    @property
    def t_total(self):
        return float(self.edges[-1])


def make_process(spec, positions, t_total, rng: Optional[np.random.Generator] = None):
    """Draw a full noise realization over ``[0, t_total)``.

    Without an explicit ``rng`` the stream is derived from ``spec.seed``.
    """
    if rng is None:
        rng = trajectory_rng(spec.seed)
    edges = interval_edges(t_total, spec.dwell)
    shifts = draw_shifts(spec, np.asarray(positions, dtype=float), len(edges) - 1, rng)
    return NoiseProcess(edges, shifts)
