"""Trajectory logs as RFC-4180 CSV (header row, LF line endings).

Floats are written with ``repr`` so a write/read round trip is exact.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, SchemaError

BASE_COLUMNS = ("t", "agent_id", "x_mm", "y_mm", "heading_rad", "u_per_mm", "omega_deg_s",
                "theta_i", "used_K", "avoidance", "clamped")
MMC_COLUMNS = ("rho_mm", "gamma_mm_s", "lambda_mm_s", "E", "E_pct_err")
Z_COLUMN = "z_mm"
INT_COLUMNS = {"agent_id", "used_K", "avoidance", "clamped"}

ERROR_COLUMNS = ("t", "agent_id", "e_mm")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


@dataclass
class Table:
    """Column-oriented trajectory log; rows are ordered by tick, then agent."""
    columns: dict

    @property
    def names(self):
        return tuple(self.columns)

    def __getitem__(self, name):
        return self.columns[name]

    def __contains__(self, name):
        return name in self.columns

    @property
    def n_rows(self):
        return len(self.columns["t"])

    @property
    def n_agents(self):
        return int(self.columns["agent_id"].max()) + 1 if self.n_rows else 0

    @property
    def is_mmc(self):
        return "E" in self.columns

    def grid(self, name):
        """Column reshaped to (ticks, agents)."""
        return self.columns[name].reshape(-1, self.n_agents)

    def times(self):
        return self.grid("t")[:, 0]

    def positions(self):
        """Array (ticks, agents, dim)."""
        keys = ["x_mm", "y_mm"] + ([Z_COLUMN] if Z_COLUMN in self.columns else [])
        return np.stack([self.grid(k) for k in keys], axis=-1)


def columns_for(law, dim):
    cols = list(BASE_COLUMNS)
    if law == "mmc":
        cols += MMC_COLUMNS
    if dim == 3:
        cols.append(Z_COLUMN)
    return tuple(cols)


def table_from_records(records, law, dim):
    """Flatten :class:`~swarmsteer.sim.StepRecord` objects into a Table."""
    n = len(records[0].positions)
    ticks = len(records)
    pos = np.array([r.positions for r in records])
    cols = {
        "t": np.repeat([r.t for r in records], n).astype(float),
        "agent_id": np.tile(np.arange(n), ticks),
        "x_mm": pos[:, :, 0].ravel(),
        "y_mm": pos[:, :, 1].ravel(),
        "heading_rad": np.array([r.headings for r in records]).ravel(),
        "u_per_mm": np.array([r.u for r in records]).ravel(),
        "omega_deg_s": np.array([r.omega_deg_s for r in records]).ravel(),
        "theta_i": np.array([r.theta for r in records]).ravel(),
        "used_K": np.array([r.used_K for r in records]).ravel().astype(int),
        "avoidance": np.array([r.avoidance for r in records]).ravel().astype(int),
        "clamped": np.array([r.clamped for r in records]).ravel().astype(int),
    }
    if law == "mmc":
        for col, attr in zip(MMC_COLUMNS, ("rho", "gamma", "lam", "E", "E_pct_err")):
            cols[col] = np.repeat([getattr(r, attr) for r in records], n).astype(float)
    if dim == 3:
        cols[Z_COLUMN] = pos[:, :, 2].ravel()
    return Table(cols)


def dumps(table: Table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = table.names
    w.writerow(names)
    data = [table[c] for c in names]
    for i in range(table.n_rows):
        w.writerow([_fmt(col[i]) for col in data])
    return buf.getvalue()


def write_table(table: Table, path):
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(dumps(table))


def _expected_columns(header):
    want = list(BASE_COLUMNS)
    if len(header) > len(BASE_COLUMNS) and header[len(BASE_COLUMNS)] == MMC_COLUMNS[0]:
        want += MMC_COLUMNS
    if header and header[-1] == Z_COLUMN:
        want.append(Z_COLUMN)
    return want


def read_table(path, expected=None) -> Table:
    """Parse a trajectory (or error) log, checking the schema.

    ``expected`` fixes the exact header; by default any trajectory layout
    (planar or spatial, with or without the MMC columns) is accepted.
    """
    with open(path, encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise SchemaError(f"{path}: empty file")
    header = rows[0]
    want = list(expected) if expected is not None else _expected_columns(header)
    for j, name in enumerate(want):
        if j >= len(header):
            raise SchemaError(f"{path}: missing column {j + 1} '{name}'")
        if header[j] != name:
            raise SchemaError(f"{path}: column {j + 1} is '{header[j]}', expected '{name}'")
    if len(header) > len(want):
        raise SchemaError(f"{path}: unexpected column {len(want) + 1} '{header[len(want)]}'")
    data = {name: [] for name in want}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(want):
            raise SchemaError(f"{path}: row {lineno} has {len(row)} fields, expected {len(want)}")
        for name, cell in zip(want, row):
            try:
                val = int(cell) if name in INT_COLUMNS else float(cell)
            except ValueError:
                raise SchemaError(f"{path}: row {lineno}, column '{name}': bad value {cell!r}") from None
            if name not in INT_COLUMNS and not math.isfinite(val):
                raise SchemaError(f"{path}: row {lineno}, column '{name}': non-finite value")
            data[name].append(val)
    cols = {k: np.array(v, dtype=int if k in INT_COLUMNS else float) for k, v in data.items()}
    table = Table(cols)
    if "agent_id" in cols and table.n_rows:
        n = table.n_agents
        if table.n_rows % n or np.any(cols["agent_id"] != np.tile(np.arange(n), table.n_rows // n)):
            raise SchemaError(f"{path}: rows must list agents 0..{n - 1} at every tick")
    return table


def align(run: Table, ideal: Table):
    """Check that two logs share the same tick grid and agent set."""
    if run.n_agents != ideal.n_agents:
        raise AlignmentError(f"agent counts differ: {run.n_agents} vs {ideal.n_agents}")
    if run.n_rows != ideal.n_rows:
        raise AlignmentError(f"row counts differ: {run.n_rows} vs {ideal.n_rows}")
    bad = np.flatnonzero(np.abs(run["t"] - ideal["t"]) > 1e-9)
    if len(bad):
        i = int(bad[0])
        raise AlignmentError(f"time grids differ at row {i + 2}: t={run['t'][i]!r} vs {ideal['t'][i]!r}")
    if run.positions().shape != ideal.positions().shape:
        raise AlignmentError("position dimensions differ")


def error_table(run: Table, ideal: Table, errors, with_energy):
    cols = {"t": run["t"], "agent_id": run["agent_id"], "e_mm": np.asarray(errors).ravel()}
    if with_energy:
        cols["E_pct_err"] = run["E_pct_err"]
    return Table(cols)
