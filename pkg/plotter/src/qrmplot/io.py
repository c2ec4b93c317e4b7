"""Readers for the scanner's CSV/JSON exports and wave files."""

import glob
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ScanTable",
    "WaveFile",
    "read_scan_csv",
    "read_scan_json",
    "read_wave_csv",
    "read_wave_sweep",
    "to_grid",
]


@dataclass
class ScanTable:
    columns: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    def __contains__(self, name: str) -> bool:
        return name in self.columns

    def __getitem__(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise KeyError(
                f"column {name!r} not in input (have: {', '.join(self.columns)})"
            )
        return self.columns[name]


def _parse_meta_line(line: str, meta: dict) -> None:
    tokens = line.lstrip("# ").split()
    for key, val in zip(tokens, tokens[1:]):
        if key.endswith(":"):
            try:
                meta[key[:-1]] = float(val)
            except ValueError:
                meta[key[:-1]] = val


def read_scan_csv(path) -> ScanTable:
    meta: dict = {}
    header: list[str] | None = None
    rows: list[list] = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                _parse_meta_line(line, meta)
                continue
            cells = line.split(",")
            if header is None:
                header = cells
                continue
            row = []
            for cell in cells[: len(header)]:
                try:
                    row.append(float(cell))
                except ValueError:
                    row.append(math.nan)
            rows.append(row)
    if header is None or not rows:
        raise ValueError(f"no data rows in {path}")
    data = np.array(rows)
    columns = {name: data[:, i] for i, name in enumerate(header) if name != "status"}
    return ScanTable(columns=columns, metadata=meta)


def read_scan_json(path) -> ScanTable:
    with open(path) as fh:
        payload = json.load(fh)
    records = payload["records"]
    if not records:
        raise ValueError(f"no records in {path}")
    columns = {}
    for name in records[0]:
        if name == "status":
            continue
        columns[name] = np.array(
            [math.nan if r[name] is None else float(r[name]) for r in records]
        )
    return ScanTable(columns=columns, metadata=payload.get("metadata", {}))


def to_grid(table: ScanTable, quantity: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pivot a record table to (lam_values, g_values, Z[g, lam]).

    Requires a complete rectangular grid; anything ragged is rejected.
    """
    lam = table["lambda"]
    g = table["g_over_gs"]
    z = table[quantity]
    lam_vals = np.unique(lam)
    g_vals = np.unique(g)
    if lam_vals.size * g_vals.size != lam.size:
        raise ValueError(
            f"ragged grid: {lam_vals.size} x {g_vals.size} != {lam.size} records"
        )
    grid = np.full((g_vals.size, lam_vals.size), math.nan)
    li = np.searchsorted(lam_vals, lam)
    gi = np.searchsorted(g_vals, g)
    grid[gi, li] = z
    if np.isnan(grid).all():
        raise ValueError(f"quantity {quantity!r} has no finite values")
    return lam_vals, g_vals, grid


@dataclass
class WaveFile:
    x: np.ndarray
    psi_plus: np.ndarray
    psi_minus: np.ndarray
    metadata: dict


def read_wave_csv(path) -> WaveFile:
    meta: dict = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                _parse_meta_line(line, meta)
                continue
            if line.startswith("x,"):
                continue
            rows.append([float(t) for t in line.split(",")])
    if not rows:
        raise ValueError(f"no samples in wave file {path}")
    data = np.array(rows)
    return WaveFile(x=data[:, 0], psi_plus=data[:, 1], psi_minus=data[:, 2], metadata=meta)


def read_wave_sweep(path_or_glob) -> list[WaveFile]:
    """Load a directory (or glob) of wave files, sorted by their lambda."""
    if os.path.isdir(path_or_glob):
        paths = sorted(glob.glob(os.path.join(path_or_glob, "*.csv")))
    else:
        paths = sorted(glob.glob(str(path_or_glob)))
    waves = [read_wave_csv(p) for p in paths]
    if not waves:
        raise ValueError(f"no wave files matching {path_or_glob}")
    waves.sort(key=lambda w: w.metadata.get("lambda", 0.0))
    return waves
