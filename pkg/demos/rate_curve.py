"""
Equilibration rate against noise amplitude
============================================

Weak noise cannot bridge the frequency gaps and strong noise freezes the
phonon in place, so the fitted rate peaks in between. At large amplitudes the
anticorrelated shifts of the outer ions slow the standing-wave case down
compared with independent shifts on every ion.

A reduced ensemble keeps this script quick; the ``fig2_rates`` preset uses
2400 realizations per point.
"""

import numpy as np

from iontransport import build_model, load_preset, rate_sweep

cfg = load_preset("fig2_rates")
model = build_model(cfg.chain_spec())
amplitudes = [1.0, 3.0, 8.0, 20.0]

rows = rate_sweep(
    [2e3 * np.pi * a for a in amplitudes],
    model,
    cfg.noise_spec(),
    cfg.initial(),
    cfg.t_grid(),
    n_traj=300,
    master_seed=cfg.seed,
)

print(f"{'A (kHz)':>8} {'kind':<14} {'gamma (1/s)':>12}")
for r in rows:
    print(f"{r.amplitude_khz:8.1f} {r.kind:<14} {r.gamma_per_s:12.1f}")
