"""Deterministic result bundles.

A bundle is a directory of CSV tables, one JSON sidecar per table
describing its columns and provenance, plus free-standing JSON documents.
Everything except ``metadata.json`` is a pure function of the inputs, so
re-running a config reproduces the data files byte for byte; wall-clock
information is confined to the metadata file.

Numbers are written with ``repr``, the shortest round-tripping decimal
form, which is reproducible across runs and exact under ``float()``.
"""

from __future__ import annotations

import csv
import json
import math
import os
import shutil
from pathlib import Path

import numpy as np

from .errors import ConfigError

__all__ = [
    "BundleWriter",
    "sanitize",
    "format_cell",
    "trajectory_table",
    "fields_table",
    "schedule_table",
    "read_table",
]


def sanitize(obj):
    """Recursively coerce a payload into strict-JSON-safe primitives."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": sanitize(obj.real), "im": sanitize(obj.imag)}
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def format_cell(value):
    """One CSV cell: shortest exact decimal for floats, plain text otherwise."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


class BundleWriter:
    """Stage a bundle in a temp directory and publish it atomically.

    Publication replaces any previous bundle at the target path; the swap
    itself is a single rename, so readers never observe a half-written
    bundle (a pre-existing one is removed just before the rename).
    """

    def __init__(self, target):
        self.target = Path(target)
        self._tmp = self.target.parent / f".{self.target.name}.tmp-{os.getpid()}"
        if self._tmp.exists():
            shutil.rmtree(self._tmp)
        self._tmp.mkdir(parents=True)
        self._published = False

    def add_table(self, name, columns, sidecar=None):
        """Write ``name.csv`` from a column-name -> sequence mapping.

        All columns must share one length; a sidecar dict (written as
        ``name.json``) should describe the columns for downstream readers.
        """
        columns = {k: np.asarray(v) for k, v in columns.items()}
        lengths = {v.shape[0] for v in columns.values()}
        if len(lengths) > 1:
            raise ConfigError(f"table {name!r} has ragged columns: "
                              f"{ {k: v.shape[0] for k, v in columns.items()} }")
        n_rows = lengths.pop() if lengths else 0
        with open(self._tmp / f"{name}.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns.keys())
            for i in range(n_rows):
                writer.writerow(format_cell(col[i]) for col in columns.values())
        if sidecar is not None:
            self.add_json(name, sidecar)

    def add_json(self, name, payload):
        text = json.dumps(sanitize(payload), indent=2, sort_keys=True)
        (self._tmp / f"{name}.json").write_text(text + "\n")

    def commit(self):
        if self.target.exists():
            shutil.rmtree(self.target)
        os.replace(self._tmp, self.target)
        self._published = True
        return self.target

    def abort(self):
        if not self._published and self._tmp.exists():
            shutil.rmtree(self._tmp)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.commit()
        else:
            self.abort()
        return False


def read_table(path):
    """Load one bundle CSV back into a column-name -> float-array mapping.

    Non-numeric cells (e.g. variant names) come back as object arrays.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        return {}
    header, data = rows[0], rows[1:]
    out = {}
    for j, name in enumerate(header):
        cells = [row[j] for row in data]
        try:
            out[name] = np.array([float(c) for c in cells])
        except ValueError:
            out[name] = np.array(cells, dtype=object)
    return out


# -- standard tables -----------------------------------------------------------

def trajectory_table(traj):
    """Moment trajectory as flat columns.

    Means are labeled ``mean_<mode>_{x,p}``; the covariance upper triangle
    is stored row-major as ``cov_<i>_<j>`` over quadrature indices in the
    same ordering.  Returns ``(columns, ordering)`` with the ordering list
    meant for the sidecar.
    """
    ordering = []
    for label in traj.modes:
        ordering += [f"{label}_x", f"{label}_p"]
    columns = {"t": traj.t}
    for k, name in enumerate(ordering):
        columns[f"mean_{name}"] = traj.means[:, k]
    dim = len(ordering)
    for i in range(dim):
        for j in range(i, dim):
            columns[f"cov_{i}_{j}"] = traj.covs[:, i, j]
    return columns, ordering


def fields_table(traj):
    """Mean-field trajectory: intra-mode amplitudes plus port fields."""
    columns = {"t": traj.t}
    for k, label in enumerate(traj.modes):
        amp = traj.amplitudes[:, k]
        columns[f"amp_{label}_re"] = amp.real
        columns[f"amp_{label}_im"] = amp.imag
    for label, f in traj.inputs.items():
        columns[f"in_{label}_re"] = f.real
        columns[f"in_{label}_im"] = f.imag
        columns[f"in_{label}_power"] = np.abs(f)**2
    for label, f in traj.outputs.items():
        columns[f"out_{label}_re"] = f.real
        columns[f"out_{label}_im"] = f.imag
        columns[f"out_{label}_power"] = np.abs(f)**2
    return columns


def schedule_table(schedule, points=1001):
    """Dense sampling of the four control channels."""
    t = np.linspace(0.0, schedule.duration, int(points))
    g1, g2, d1, d2 = schedule.values(t)
    return {"t": t, "g1": g1, "g2": g2, "delta1": d1, "delta2": d2}
