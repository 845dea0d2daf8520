"""CSV readers and writers.  All floats use 17 significant digits so that
every cell round-trips through parse -> format without value change.
"""
from __future__ import annotations

import csv
import os
import re

import numpy as np

from .core import Snapshot

FLOAT_FMT = "%.17g"


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return FLOAT_FMT % value


def snapshot_filename(t: float) -> str:
    return f"snapshot_{fmt(t)}.csv"


_SNAPSHOT_RE = re.compile(r"snapshot_(.+)\.csv$")


def write_snapshot(path, snapshot: Snapshot) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "h", "u"])
        for x, h, u in zip(snapshot.x, snapshot.h, snapshot.u):
            writer.writerow([fmt(x), fmt(h), fmt(u)])


def read_snapshot(path, t: float | None = None) -> Snapshot:
    if t is None:
        m = _SNAPSHOT_RE.search(os.path.basename(str(path)))
        t = float(m.group(1)) if m else 0.0
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    data = np.atleast_2d(data)
    return Snapshot(t=t, x=data[:, 0], h=data[:, 1], u=data[:, 2])


def list_snapshots(run_dir):
    """(t, path) pairs of every snapshot CSV in a run directory, by time."""
    found = []
    for name in os.listdir(run_dir):
        m = _SNAPSHOT_RE.match(name)
        if m:
            found.append((float(m.group(1)), os.path.join(run_dir, name)))
    return sorted(found)


def write_step_reports(path, reports) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "t", "min_h", "max_abs_u"])
        for r in reports:
            writer.writerow([r.step, fmt(r.t), fmt(r.min_h), fmt(r.max_abs_u)])


DIAGNOSTICS_COLUMNS = ["t", "C_star_h", "C_star_uh", "C_star_H",
                       "C1_h", "C1_uh", "C1_H", "structure",
                       "x_A", "A", "h_mean", "u_mean"]


def write_diagnostics(path, records) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DIAGNOSTICS_COLUMNS)
        for r in records:
            writer.writerow([fmt(getattr(r, c)) if c != "structure" else
                             r.structure for c in DIAGNOSTICS_COLUMNS])


CONVERGENCE_COLUMNS = ["alpha", "dx", "C1_h", "C1_uh", "C1_H",
                       "L1_h", "L1_u", "excluded_window"]


def write_convergence_table(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CONVERGENCE_COLUMNS)
        for row in rows:
            writer.writerow([fmt(row.get(c)) if c != "excluded_window" else
                             (row.get(c) or "") for c in CONVERGENCE_COLUMNS])


def write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
