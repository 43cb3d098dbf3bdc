"""CSV and manifest writers.

Floats are written with ``repr`` (shortest round-trip form) so that files are
byte-identical whenever the underlying numbers are.
"""

from __future__ import annotations

import csv
import json
import os
from datetime import datetime, timezone
from pathlib import Path

import numpy as np


def _fmt(x):
    if isinstance(x, str):
        return x
    return repr(float(x))


def write_table(path, header, rows):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow(row)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def write_series_csv(path, times, values, prefix="P"):
    """Time column ``t_ms`` plus one column per site (``P1``, ``ntr1`` and so on)."""
    values = np.asarray(values, dtype=float)
    header = ["t_ms"] + [f"{prefix}{j + 1}" for j in range(values.shape[1])]
    rows = ([f"{t * 1e3:.6f}"] + [_fmt(v) for v in vals] for t, vals in zip(times, values))
    return write_table(path, header, rows)


RATE_COLUMNS = ("amplitude_khz", "kind", "gamma_per_s", "p_inf", "residual")


def write_rates_csv(path, rows):
    body = ([_fmt(getattr(r, c)) for c in RATE_COLUMNS] for r in rows)
    return write_table(path, list(RATE_COLUMNS), body)


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_manifest(path, subcommand, config_raw, seed, outputs, version, extra=None):
    """Record everything needed to rerun ``subcommand`` before any result is written."""
    manifest = {
        "subcommand": subcommand,
        "version": version,
        "seed": int(seed),
        "config": config_raw,
        "outputs": [os.fspath(p) for p in outputs],
        "started": _now(),
    }
    if extra:
        manifest.update(extra)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def finish_manifest(path):
    path = Path(path)
    manifest = json.loads(path.read_text())
    manifest["finished"] = _now()
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def read_manifest(path):
    data = json.loads(Path(path).read_text())
    for key in ("subcommand", "config", "seed"):
        if key not in data:
            raise ValueError(f"{path}: manifest lacks '{key}'")
    return data
