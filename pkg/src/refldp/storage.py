"""File formats: trajectory CSV, control CSV, report JSON.

Floats are written with 17 significant digits so a read-back reproduces
the exact binary values; replays are therefore bit-faithful.
"""

import csv
import json
import os

import numpy as np

from .controls import Control
from .errors import ConfigError
from .report import ExperimentReport
from .trajectory import Trajectory

_FMT = "%.17g"


def _fmt(x: float) -> str:
    return _FMT % float(x)


def write_trajectory(path: str, traj: Trajectory):
    """Trajectory CSV: time, coefficients, local-time increments, control.

    Row j holds the state at grid[j]; its dL and k columns describe the
    step ending at grid[j] (row 0 carries zeros, matching L(0) = 0).
    """
    d = traj.dim
    d_l = traj.local_time_increments
    if d_l is None:
        d_l = np.zeros((traj.n_steps, d))
    k = traj.control_values
    if k is None:
        k = np.zeros(traj.n_steps)
    header = (["time"] + [f"coeff_{i}" for i in range(d)]
              + [f"dL_{i}" for i in range(d)] + ["k"])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for j, t in enumerate(traj.grid):
            dl_row = np.zeros(d) if j == 0 else d_l[j - 1]
            k_val = 0.0 if j == 0 else k[j - 1]
            writer.writerow([_fmt(t)] + [_fmt(x) for x in traj.states[j]]
                            + [_fmt(x) for x in dl_row] + [_fmt(k_val)])


def read_trajectory(path: str) -> Trajectory:
    """Parse a trajectory CSV, reporting malformed content by line number."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: line 1: empty file, header row required")
        if not header or header[0] != "time":
            raise ConfigError(f"{path}: line 1: header must start with 'time'")
        n_coeff = sum(1 for c in header if c.startswith("coeff_"))
        n_dl = sum(1 for c in header if c.startswith("dL_"))
        if n_coeff == 0 or n_dl != n_coeff or header[-1] != "k" \
                or len(header) != 2 + 2 * n_coeff:
            raise ConfigError(f"{path}: line 1: malformed header {header!r}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ConfigError(
                    f"{path}: line {lineno}: expected {len(header)} fields, "
                    f"got {len(row)}")
            try:
                rows.append([float(x) for x in row])
            except ValueError as exc:
                raise ConfigError(f"{path}: line {lineno}: {exc}")
    if len(rows) < 2:
        raise ConfigError(f"{path}: needs at least two data rows")
    data = np.array(rows)
    grid = data[:, 0]
    states = data[:, 1:1 + n_coeff]
    d_l = data[1:, 1 + n_coeff:1 + 2 * n_coeff]
    k = data[1:, -1]
    try:
        return Trajectory(grid, states, local_time_increments=d_l, control_values=k)
    except Exception as exc:
        raise ConfigError(f"{path}: inconsistent trajectory data: {exc}")


def write_control(path: str, control: Control):
    """Control CSV: (t, k) rows; the final row repeats the last value at T."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "k"])
        for t, v in zip(control.grid[:-1], control.values):
            writer.writerow([_fmt(t), _fmt(v)])
        writer.writerow([_fmt(control.grid[-1]), _fmt(control.values[-1])])


def read_control(path: str) -> Control:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["t", "k"]:
            raise ConfigError(f"{path}: line 1: control header must be 't,k'")
        ts, ks = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ConfigError(f"{path}: line {lineno}: expected 2 fields")
            try:
                ts.append(float(row[0]))
                ks.append(float(row[1]))
            except ValueError as exc:
                raise ConfigError(f"{path}: line {lineno}: {exc}")
    if len(ts) < 2:
        raise ConfigError(f"{path}: needs at least two rows")
    return Control(np.array(ts), np.array(ks[:-1]))


def write_report(path: str, report: ExperimentReport):
    with open(path, "w") as fh:
        fh.write(report.to_json())
        fh.write("\n")


def read_report(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def ensure_dir(path: str):
    os.makedirs(path, exist_ok=True)
