"""Run configuration: TOML text in laboratory units, validated and converted to SI.

Frequencies are written as ordinary frequencies (kHz, MHz, GHz) and turned
into angular frequencies here; durations are written in ms or us.
"""

from __future__ import annotations

import copy
import math
import sys
from dataclasses import dataclass
from importlib import resources

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .chain import MODES, ChainSpec
from .constants import ATOMIC_MASS_UNIT, ATOMIC_MASSES_U, ELECTRON_MASS_U, TWO_PI, ion_mass
from .laser import LaserParams, cancellation_detuning
from .noise import KINDS, NoiseSpec
from .propagators import ENGINES, BathSpec, Initial

REQUIRED = object()

SCHEMA = {
    "chain": {
        "n_ions": (int, REQUIRED),
        "omega_z_khz": (float, REQUIRED),
        "mode": (str, "explicit"),
        "local_frequencies_khz": (list, None),
        "frequencies_are_renormalized": (bool, False),
        "species": ((str, list), "Ca40"),
        "masses_u": (list, None),
        "reference_mass_u": (float, None),
        "omega_x0_khz": (float, None),
        "relative_gradient_per_mm": (float, 0.4),
    },
    "noise": {
        "kind": (str, "none"),
        "amplitude_khz": (float, 0.0),
        "dwell_us": (float, 20.0),
        "lambda_ratio_n": (int, 0),
        "seed": (int, 2017),
    },
    "bath": {
        "kappa_per_ms": (float, 0.0),
        "nbar": (float, 0.0),
        "init_occupation": (float, 0.0),
    },
    "run": {
        "t_total_ms": (float, REQUIRED),
        "output_dt_us": (float, None),
        "trajectories": (int, 600),
        "engine": (str, "single_excitation"),
        "initial": (str, "site:1"),
    },
    "laser": {
        "delta_ghz": (float, None),
        "omega1_mhz": (float, REQUIRED),
        "omega2_ghz": (float, REQUIRED),
        "deltaL_prime_mhz": (float, REQUIRED),
        "eta_x": (float, REQUIRED),
        "omega_x_mhz": (float, REQUIRED),
        "gamma_mhz": (float, 20.0),
        "mode_frequencies_mhz": (list, None),
        "required_margin": (float, 10.0),
        "fz_sq": (float, 1.0),
    },
    "rates": {
        "amplitudes_khz": (list, REQUIRED),
        "kinds": (list, ["standing-wave", "independent"]),
        "site": (int, None),
    },
    "readout": {
        "alpha": (float, 1.0),
        "read_noise": (float, 0.0),
    },
    "output": {
        "dir": (str, "out"),
    },
}

SECTIONS_FOR = {
    "chain": ("chain",),
    "evolve": ("chain", "noise", "run"),
    "rates": ("chain", "noise", "run"),
    "laser": ("laser",),
    "measure": ("chain", "noise", "run"),
    "validate": ("chain",),
}

PRESETS = ("fig2_bottomleft", "fig2_topleft", "fig2_rates", "fig3_thermal", "paper_params")


class ConfigError(ValueError):
    pass


def _coerce(path, value, kind):
    kinds = kind if isinstance(kind, tuple) else (kind,)
    if isinstance(value, bool) and bool not in kinds:
        raise ConfigError(f"{path}: expected {kinds[0].__name__}, got a boolean")
    if float in kinds and isinstance(value, int):
        return float(value)
    if not isinstance(value, kinds):
        names = " or ".join(k.__name__ for k in kinds)
        raise ConfigError(f"{path}: expected {names}, got {type(value).__name__}")
    return value


def _positive(path, value, strict=True):
    bad = not value > 0 if strict else not value >= 0
    if bad or (isinstance(value, float) and not math.isfinite(value)):
        raise ConfigError(f"{path}: must be {'positive' if strict else 'non-negative'}, got {value!r}")


def resolve(data):
    """Validate a nested dict against the schema and fill in defaults."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a table of sections")
    out = {}
    for section, body in data.items():
        if section not in SCHEMA:
            raise ConfigError(f"{section}: unknown section")
        if not isinstance(body, dict):
            raise ConfigError(f"{section}: expected a table")
        fields = SCHEMA[section]
        for key in body:
            if key not in fields:
                raise ConfigError(f"{section}.{key}: unknown key")
        resolved = {}
        for key, (kind, default) in fields.items():
            path = f"{section}.{key}"
            if key in body and body[key] is not None:
                resolved[key] = _coerce(path, body[key], kind)
            elif default is REQUIRED:
                raise ConfigError(f"{path}: missing required key")
            else:
                resolved[key] = copy.deepcopy(default)
        out[section] = resolved
    _check_values(out)
    return out


def _check_values(cfg):
    if "chain" in cfg:
        c = cfg["chain"]
        if c["n_ions"] < 1:
            raise ConfigError(f"chain.n_ions: must be >= 1, got {c['n_ions']}")
        _positive("chain.omega_z_khz", c["omega_z_khz"])
        if c["mode"] not in MODES:
            raise ConfigError(f"chain.mode: must be one of {MODES}, got {c['mode']!r}")
        freqs = c["local_frequencies_khz"]
        if c["mode"] == "explicit":
            if freqs is None or len(freqs) != c["n_ions"]:
                raise ConfigError(f"chain.local_frequencies_khz: need {c['n_ions']} values in explicit mode")
            for k, f in enumerate(freqs):
                _positive(f"chain.local_frequencies_khz[{k}]", _coerce("chain.local_frequencies_khz", f, float))
        elif c["omega_x0_khz"] is None:
            raise ConfigError(f"chain.omega_x0_khz: required in {c['mode']} mode")
        else:
            _positive("chain.omega_x0_khz", c["omega_x0_khz"])
        species = c["species"]
        if isinstance(species, list) and len(species) != c["n_ions"]:
            raise ConfigError(f"chain.species: need {c['n_ions']} entries, got {len(species)}")
        for s in species if isinstance(species, list) else [species]:
            if c["masses_u"] is None and s not in ATOMIC_MASSES_U:
                raise ConfigError(f"chain.species: unknown species {s!r}")
        if c["masses_u"] is not None:
            if len(c["masses_u"]) != c["n_ions"]:
                raise ConfigError(f"chain.masses_u: need {c['n_ions']} entries")
            for k, m in enumerate(c["masses_u"]):
                _positive(f"chain.masses_u[{k}]", _coerce("chain.masses_u", m, float))
        if c["reference_mass_u"] is not None:
            _positive("chain.reference_mass_u", c["reference_mass_u"])
    if "noise" in cfg:
        n = cfg["noise"]
        if n["kind"] not in KINDS:
            raise ConfigError(f"noise.kind: must be one of {KINDS}, got {n['kind']!r}")
        _positive("noise.amplitude_khz", n["amplitude_khz"], strict=False)
        _positive("noise.dwell_us", n["dwell_us"])
        if n["lambda_ratio_n"] < 0:
            raise ConfigError("noise.lambda_ratio_n: must be >= 0")
        if not 0 <= n["seed"] < 2**64:
            raise ConfigError("noise.seed: must fit in an unsigned 64-bit integer")
    if "bath" in cfg:
        for key in ("kappa_per_ms", "nbar", "init_occupation"):
            _positive(f"bath.{key}", cfg["bath"][key], strict=False)
    if "run" in cfg:
        r = cfg["run"]
        _positive("run.t_total_ms", r["t_total_ms"])
        if r["output_dt_us"] is not None:
            _positive("run.output_dt_us", r["output_dt_us"])
        if r["trajectories"] < 1:
            raise ConfigError("run.trajectories: must be >= 1")
        if r["engine"] not in ENGINES:
            raise ConfigError(f"run.engine: must be one of {ENGINES}, got {r['engine']!r}")
        parse_initial(r["initial"])
    if "laser" in cfg:
        las = cfg["laser"]
        if not 0 < las["eta_x"] < 1:
            raise ConfigError("laser.eta_x: must lie in (0, 1)")
        if not 0 <= las["fz_sq"] <= 1:
            raise ConfigError("laser.fz_sq: must lie in [0, 1]")
        _positive("laser.required_margin", las["required_margin"])
    if "rates" in cfg:
        amps = cfg["rates"]["amplitudes_khz"]
        if not amps:
            raise ConfigError("rates.amplitudes_khz: must not be empty")
        for k, a in enumerate(amps):
            _positive(f"rates.amplitudes_khz[{k}]", _coerce("rates.amplitudes_khz", a, float), strict=False)
        for kind in cfg["rates"]["kinds"]:
            if kind not in KINDS:
                raise ConfigError(f"rates.kinds: unknown noise kind {kind!r}")
    if "readout" in cfg:
        _positive("readout.alpha", cfg["readout"]["alpha"])
        _positive("readout.read_noise", cfg["readout"]["read_noise"], strict=False)


def parse_initial(text):
    """``site:k``, ``coherent:k:alpha`` or ``vacuum`` with 1-based site labels."""
    parts = str(text).split(":")
    try:
        if parts[0] == "vacuum" and len(parts) == 1:
            return Initial("vacuum")
        if parts[0] == "site" and len(parts) == 2:
            return Initial("site", int(parts[1]) - 1)
        if parts[0] == "coherent" and len(parts) == 3:
            return Initial("coherent", int(parts[1]) - 1, complex(parts[2]))
    except ValueError:
        pass
    raise ConfigError(f"run.initial: cannot parse {text!r} (use site:k, coherent:k:alpha or vacuum)")


@dataclass
class RunConfig:
    """Validated configuration; ``raw`` keeps the laboratory-unit values."""

    raw: dict

    def require(self, subcommand):
        for section in SECTIONS_FOR[subcommand]:
            if section not in self.raw:
                raise ConfigError(f"{section}: section required by '{subcommand}'")
        return self

    def section(self, name):
        if name in self.raw:
            return self.raw[name]
        return resolve({name: {}})[name]

    @property
    def seed(self):
        return self.section("noise")["seed"]

    def with_seed(self, seed):
        raw = copy.deepcopy(self.raw)
        raw.setdefault("noise", self.section("noise"))["seed"] = int(seed)
        return RunConfig(resolve(raw))

    # conversions to domain objects

    def masses(self):
        c = self.raw["chain"]
        if c["masses_u"] is not None:
            return [(float(m) - ELECTRON_MASS_U) * ATOMIC_MASS_UNIT for m in c["masses_u"]]
        species = c["species"]
        names = species if isinstance(species, list) else [species] * c["n_ions"]
        return [ion_mass(s) for s in names]

    def chain_spec(self):
        c = self.raw["chain"]
        masses = self.masses()
        ref = masses[0] if c["reference_mass_u"] is None else (c["reference_mass_u"] - ELECTRON_MASS_U) * ATOMIC_MASS_UNIT
        freqs = c["local_frequencies_khz"]
        return ChainSpec(
            n_ions=c["n_ions"],
            omega_z=TWO_PI * 1e3 * c["omega_z_khz"],
            masses=masses,
            mode=c["mode"],
            local_frequencies=None if freqs is None else [TWO_PI * 1e3 * float(f) for f in freqs],
            reference_mass=ref,
            frequencies_are_renormalized=c["frequencies_are_renormalized"],
            omega_x0=None if c["omega_x0_khz"] is None else TWO_PI * 1e3 * c["omega_x0_khz"],
            relative_gradient=c["relative_gradient_per_mm"] * 1e3,
        )

    def noise_spec(self):
        n = self.section("noise")
        return NoiseSpec(
            kind=n["kind"],
            amplitude=TWO_PI * 1e3 * n["amplitude_khz"],
            dwell=n["dwell_us"] * 1e-6,
            lambda_ratio_n=n["lambda_ratio_n"],
            seed=n["seed"],
        )

    def bath_spec(self):
        b = self.section("bath")
        return BathSpec(kappa=b["kappa_per_ms"] * 1e3, nbar=b["nbar"], init_occupation=b["init_occupation"])

    def initial(self):
        return parse_initial(self.raw["run"]["initial"])

    @property
    def t_total(self):
        return self.raw["run"]["t_total_ms"] * 1e-3

    def t_grid(self):
        r = self.raw["run"]
        dt = (r["output_dt_us"] if r["output_dt_us"] is not None else self.section("noise")["dwell_us"]) * 1e-6
        n = int(math.floor(self.t_total / dt + 1e-9))
        grid = dt * np.arange(n + 1)
        if self.t_total - grid[-1] > 1e-9 * self.t_total:
            grid = np.append(grid, self.t_total)
        return grid

    def laser_params(self):
        las = self.raw["laser"]
        mhz = TWO_PI * 1e6
        omega2 = TWO_PI * 1e9 * las["omega2_ghz"]
        delta_l = mhz * las["deltaL_prime_mhz"]
        omega_x = mhz * las["omega_x_mhz"]
        if las["delta_ghz"] is None:
            delta = cancellation_detuning(omega2, delta_l, las["eta_x"], omega_x)
        else:
            delta = TWO_PI * 1e9 * las["delta_ghz"]
        return LaserParams(
            Delta=delta,
            Omega1=mhz * las["omega1_mhz"],
            Omega2=omega2,
            deltaL_prime=delta_l,
            eta_x=las["eta_x"],
            omega_x=omega_x,
            Gamma=mhz * las["gamma_mhz"],
        )

    def mode_frequencies(self):
        las = self.raw["laser"]
        values = las["mode_frequencies_mhz"] or [las["omega_x_mhz"]]
        return [TWO_PI * 1e6 * float(v) for v in values]


def parse_config(text):
    """Parse TOML configuration text into a validated :class:`RunConfig`."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed configuration: {exc}") from None
    return RunConfig(resolve(data))


def config_from_dict(data):
    return RunConfig(resolve(copy.deepcopy(data)))


def load_preset(name):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    text = resources.files("iontransport.presets").joinpath(f"{name}.toml").read_text()
    return parse_config(text)
