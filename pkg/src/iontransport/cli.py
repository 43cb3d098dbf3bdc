"""Command-line runner: ``iontransport <subcommand> [preset] [options]``.

Every flag can also be set through an environment variable named
``IONTRANSPORT_<FLAG>`` (for example ``IONTRANSPORT_THREADS=4``); flags given
on the command line win.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import rate_sweep
from .chain import build_model
from .config import PRESETS, SECTIONS_FOR, ConfigError, config_from_dict, load_preset, parse_config
from .constants import TWO_PI
from .io import finish_manifest, read_manifest, write_manifest, write_rates_csv, write_series_csv, write_table
from .laser import cancellation_detuning, raman_shift_amplitude, validity_report
from .noise import trajectory_rng
from .propagators import ensemble_run
from .readout import protocol_readings, reconstruct_first_moment
from .validation import oracle_suite

ENV_PREFIX = "IONTRANSPORT_"
COMMON_FLAGS = ("config", "preset", "seed", "threads", "out")
READOUT_STREAM = 1  # second spawn-key component for read-noise streams

DEFAULT_PRESET = {"chain": "paper_params", "laser": "paper_params", "validate": "paper_params"}


def _common(parser):
    parser.add_argument("preset_name", nargs="?", metavar="preset", help=f"shipped preset ({', '.join(PRESETS)})")
    parser.add_argument("--config", help="TOML configuration file or a run manifest (.json)")
    parser.add_argument("--preset", help="shipped preset name")
    parser.add_argument("--seed", type=int, help="master seed (overrides noise.seed)")
    parser.add_argument("--threads", type=int, help="worker threads (default: all cores)")
    parser.add_argument("--out", help="output directory (overrides output.dir)")


def build_parser():
    parser = argparse.ArgumentParser(prog="iontransport", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "chain": "print the chain model",
        "evolve": "run a trajectory ensemble and write populations",
        "rates": "sweep noise amplitudes and fit equilibration rates",
        "laser": "evaluate the two-photon shift design",
        "measure": "simulate the three-phase readout on an ensemble",
        "validate": "cross-check the Gaussian engine against the Fock oracle",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        _common(p)
        if name == "rates":
            p.add_argument("--amplitudes", help="comma-separated amplitudes in kHz")
            p.add_argument("--kinds", help="comma-separated noise kinds")
    return parser


def _apply_env(args):
    for flag in COMMON_FLAGS + ("amplitudes", "kinds"):
        if not hasattr(args, flag) or getattr(args, flag) is not None:
            continue
        value = os.environ.get(ENV_PREFIX + flag.upper())
        if value:
            setattr(args, flag, int(value) if flag in ("seed", "threads") else value)


def load_config(args):
    """Resolve the configuration from --config, --preset or the positional preset."""
    preset = args.preset or args.preset_name
    if args.config and preset:
        raise ConfigError("give either --config or a preset, not both")
    manifest = None
    if args.config:
        path = Path(args.config)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
        if path.suffix == ".json":
            manifest = read_manifest(path)
            if manifest["subcommand"] != args.command:
                raise ConfigError(f"{path}: manifest was written by '{manifest['subcommand']}', not '{args.command}'")
            cfg = config_from_dict(manifest["config"])
        else:
            cfg = parse_config(text)
    else:
        preset = preset or DEFAULT_PRESET.get(args.command)
        if preset is None:
            raise ConfigError(f"'{args.command}' needs --config or a preset ({', '.join(PRESETS)})")
        cfg = load_preset(preset)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    elif manifest is not None:
        cfg = cfg.with_seed(manifest["seed"])
    return cfg.require(args.command)


def _out_dir(args, cfg):
    return Path(args.out or cfg.section("output")["dir"])


def _start(args, cfg, outputs):
    out = _out_dir(args, cfg)
    paths = [out / name for name in outputs]
    manifest = out / f"{args.command}_manifest.json"
    write_manifest(manifest, args.command, cfg.raw, cfg.seed, paths, __version__)
    return paths, manifest


def cmd_chain(args, cfg):
    model = build_model(cfg.chain_spec())
    khz = 1 / (TWO_PI * 1e3)
    print(f"ions: {model.n_ions}   length scale: {model.length_scale * 1e6:.3f} um   spacing: {model.spacing * 1e6:.3f} um")
    print("positions (um):  " + "  ".join(f"{z * 1e6:9.3f}" for z in model.positions))
    print("local freq (kHz):" + "  ".join(f"{w * khz:9.3f}" for w in model.local_frequencies))
    print("couplings (kHz):")
    for row in model.couplings:
        print("  " + "  ".join(f"{c * khz:9.4f}" for c in row))
    print(f"coupling ratio: {model.coupling_ratio():.4f}   localization: {model.localization():.4f}")
    return 0


def _ensemble(args, cfg, engine=None):
    model = build_model(cfg.chain_spec())
    run = cfg.raw["run"]
    return ensemble_run(
        model,
        cfg.noise_spec(),
        cfg.bath_spec(),
        cfg.initial(),
        cfg.t_grid(),
        run["trajectories"],
        cfg.seed,
        engine or run["engine"],
        args.threads,
        t_total=cfg.t_total,
    )


def cmd_evolve(args, cfg):
    gaussian = cfg.raw["run"]["engine"] == "gaussian"
    names = ["populations.csv"] + (["filtered.csv"] if gaussian else [])
    paths, manifest = _start(args, cfg, names)
    result = _ensemble(args, cfg)
    s = result.series
    write_series_csv(paths[0], s.times, s.populations, "P")
    if gaussian:
        write_series_csv(paths[1], s.times, s.filtered, "ntr")
    finish_manifest(manifest)
    final = "  ".join(f"P{j + 1}={p:.4f}" for j, p in enumerate(s.populations[-1]))
    print(f"{len(s.times)} samples written to {paths[0].parent}; final {final}")
    return 0


def cmd_rates(args, cfg):
    rates = dict(cfg.section("rates")) if "rates" in cfg.raw else {}
    if args.amplitudes:
        try:
            rates["amplitudes_khz"] = [float(a) for a in args.amplitudes.split(",")]
        except ValueError:
            raise ConfigError(f"--amplitudes: cannot parse {args.amplitudes!r}") from None
    if args.kinds:
        rates["kinds"] = args.kinds.split(",")
    raw = dict(cfg.raw)
    raw["rates"] = rates
    cfg = config_from_dict(raw)
    r = cfg.raw["rates"]
    paths, manifest = _start(args, cfg, ["rates.csv"])
    run = cfg.raw["run"]
    rows = rate_sweep(
        [TWO_PI * 1e3 * a for a in r["amplitudes_khz"]],
        build_model(cfg.chain_spec()),
        cfg.noise_spec(),
        cfg.initial(),
        cfg.t_grid(),
        run["trajectories"],
        cfg.seed,
        kinds=r["kinds"],
        bath=cfg.bath_spec(),
        engine=run["engine"],
        site=None if r["site"] is None else r["site"] - 1,
        threads=args.threads,
    )
    write_rates_csv(paths[0], rows)
    finish_manifest(manifest)
    for row in rows:
        print(f"A = {row.amplitude_khz:7.3f} kHz  {row.kind:<14} gamma = {row.gamma_per_s:10.2f} /s  p_inf = {row.p_inf:.4f}")
    return 0


def cmd_laser(args, cfg):
    p = cfg.laser_params()
    las = cfg.raw["laser"]
    shift = raman_shift_amplitude(p, las["fz_sq"])
    report = validity_report(p, cfg.mode_frequencies(), las["required_margin"])
    solved = "solved from the cancellation condition" if las["delta_ghz"] is None else "as configured"
    print(f"shift amplitude: {shift / (TWO_PI * 1e3):.4f} kHz (ordinary frequency, fz^2 = {las['fz_sq']:g})")
    print(f"Delta: {p.Delta / (TWO_PI * 1e9):.4f} GHz ({solved})")
    print(f"Delta for Stark cancellation: {cancellation_detuning(p.Omega2, p.deltaL_prime, p.eta_x, p.omega_x) / (TWO_PI * 1e9):.4f} GHz")
    print(f"Gamma: {p.Gamma / (TWO_PI * 1e6):g} MHz (assumed dipole linewidth)")
    print(report.table())
    return 0


def cmd_measure(args, cfg):
    paths, manifest = _start(args, cfg, ["populations.csv", "filtered.csv"])
    result = _ensemble(args, cfg, engine="gaussian")
    readout = cfg.section("readout")
    alpha, sigma = readout["alpha"], readout["read_noise"]
    readings = protocol_readings(result.populations, result.mu, alpha)  # (3, traj, t, sites)
    if sigma:
        for i in range(readings.shape[1]):
            rng = trajectory_rng(cfg.seed, (i, READOUT_STREAM))
            readings[:, i] += rng.normal(0.0, sigma, size=readings.shape[:1] + readings.shape[2:])
    mu_hat = reconstruct_first_moment(readings[0], readings[1], readings[2], alpha)
    power = np.abs(mu_hat) ** 2
    filtered = np.ascontiguousarray(np.moveaxis(power, 0, -1)).sum(axis=-1) / power.shape[0]
    s = result.series
    write_series_csv(paths[0], s.times, s.populations, "n")
    write_series_csv(paths[1], s.times, filtered, "ntr")
    finish_manifest(manifest)
    print(f"raw and filtered signals written to {paths[0].parent}")
    return 0


def cmd_validate(args, cfg):
    paths, manifest = _start(args, cfg, ["validate.csv"])
    spec = cfg.chain_spec()
    noise = cfg.noise_spec()
    if noise.kind == "none":
        noise = replace(noise, kind="standing-wave", amplitude=TWO_PI * 3e3)
    sizes = [k for k in (2, 3) if k <= spec.n_ions]
    results = oracle_suite(spec, noise, sizes)
    write_table(
        paths[0],
        ["sites", "cutoff", "occupation_error", "moment_error", "trace_error", "max_leak"],
        ([str(r.n_sites), str(r.cutoff)] + [repr(float(v)) for v in (r.occupation_error, r.moment_error, r.trace_error, r.max_leak)] for r in results),
    )
    finish_manifest(manifest)
    ok = True
    for r in results:
        ok &= r.passed
        print(
            f"{r.n_sites} sites, cutoff {r.cutoff}: occupation {r.occupation_error:.2e}  "
            f"moment {r.moment_error:.2e}  {'PASS' if r.passed else 'FAIL'}"
        )
    return 0 if ok else 1


COMMANDS = {
    "chain": cmd_chain,
    "evolve": cmd_evolve,
    "rates": cmd_rates,
    "laser": cmd_laser,
    "measure": cmd_measure,
    "validate": cmd_validate,
}
assert set(COMMANDS) == set(SECTIONS_FOR)


def main(argv=None):
    args = build_parser().parse_args(argv)
    _apply_env(args)
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, ValueError, RuntimeError, OSError) as exc:
        print(f"iontransport {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
