"""Parameter scans over (lambda, g/g_s) grids with per-point diagnostics.

Grid points are independent work items; a worker pool computes them in
parallel and they are gathered back in deterministic lambda-major order.
Each record carries the observables of the ground state, the node count of
its lower spinor component (computed on the duality-transformed state for
negative anisotropy, where the structure lives in momentum space), and the
truncation actually used, so outputs are reproducible byte for byte.
"""

import dataclasses
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import observables as obs
from .eigensolver import solve_point
from .model import ModelParams, Truncation, build_params
from .realspace import GridConfig, count_zeros, dual_transform, hermite_functions, realify, spinor_wavefunction

__all__ = [
    "AxisSpec",
    "ScanConfig",
    "PointRecord",
    "ScanDataset",
    "PhaseLabel",
    "scan2d",
    "classify_phase",
    "emit",
    "read_scan_csv",
    "read_scan_json",
    "PRESETS",
    "preset",
    "CSV_COLUMNS",
]

VERSION = "0.1.0"
WORKERS_ENV = "RABISCAN_WORKERS"

CSV_COLUMNS = [
    "lambda",
    "g_over_gs",
    "omega",
    "E0",
    "E1",
    "gap",
    "parity",
    "sigma_x",
    "a_norm",
    "AP",
    "n_z",
    "p_x",
    "p_sigma",
    "excitation",
    "duality_mod",
    "n_max_used",
    "status",
]


@dataclass(frozen=True)
class AxisSpec:
    """One swept axis: steps=1 pins the axis at lo."""

    lo: float
    hi: float
    steps: int

    def values(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.lo])
        return np.linspace(self.lo, self.hi, self.steps)

    def validate(self, name: str) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"{name} range must be finite")
        if self.steps < 1:
            raise ValueError(f"{name} steps must be >= 1")
        if self.steps == 1:
            return
        if self.steps < 2:
            raise ValueError(f"swept {name} axis needs >= 2 steps")
        if self.hi <= self.lo:
            raise ValueError(f"{name} range must have hi > lo when swept")


ALL_OBSERVABLES = ("energies", "observables", "n_z", "duality")


@dataclass(frozen=True)
class ScanConfig:
    """Rectangular (lambda, g/g_s) scan description.

    ``g_axis`` is in units of g_s = sqrt(omega*Omega)/2.  ``selection``
    can drop expensive per-point quantities (unselected columns are
    emitted as nan).
    """

    omega: float
    lam_axis: AxisSpec
    g_axis: AxisSpec
    Omega: float = 1.0
    policy: str = "adaptive"
    n_max: int | None = None
    allow_below_minimum: bool = False
    selection: tuple[str, ...] = ALL_OBSERVABLES
    zero_component: str = "minus"
    grid_step: float = 0.02
    workers: int | None = None

    def validate(self) -> None:
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise ValueError(f"omega must be positive, got {self.omega}")
        if not (math.isfinite(self.Omega) and self.Omega > 0):
            raise ValueError(f"Omega must be positive, got {self.Omega}")
        self.lam_axis.validate("lambda")
        self.g_axis.validate("g")
        unknown = set(self.selection) - set(ALL_OBSERVABLES)
        if unknown:
            raise ValueError(f"unknown selection entries {sorted(unknown)}")

    def truncation(self) -> Truncation:
        return Truncation(
            n_max=self.n_max,
            policy=self.policy,
            allow_below_minimum=self.allow_below_minimum,
        )

    def g_s(self) -> float:
        return 0.5 * math.sqrt(self.omega * self.Omega)


@dataclass
class PointRecord:
    """One grid point, field order mirrors the CSV schema."""

    lam: float
    g_over_gs: float
    omega: float
    e0: float = math.nan
    e1: float = math.nan
    gap: float = math.nan
    parity: float = math.nan
    sigma_x: float = math.nan
    a_norm: float = math.nan
    ap: float = math.nan
    n_z: float = math.nan
    p_x: float = math.nan
    p_sigma: float = math.nan
    excitation: float = math.nan
    duality_mod: float = math.nan
    n_max_used: float = math.nan
    status: str = "ok"

    def row(self) -> list:
        return [
            self.lam,
            self.g_over_gs,
            self.omega,
            self.e0,
            self.e1,
            self.gap,
            self.parity,
            self.sigma_x,
            self.a_norm,
            self.ap,
            self.n_z,
            self.p_x,
            self.p_sigma,
            self.excitation,
            self.duality_mod,
            self.n_max_used,
            self.status,
        ]


@dataclass
class ScanDataset:
    config: ScanConfig
    records: list[PointRecord]
    metadata: dict

    def record_at(self, lam: float, g_over_gs: float) -> PointRecord:
        best = min(
            self.records,
            key=lambda r: (r.lam - lam) ** 2 + (r.g_over_gs - g_over_gs) ** 2,
        )
        return best

    @property
    def ok(self) -> bool:
        return all(r.status == "ok" for r in self.records)


# --- per-point pipeline -----------------------------------------------------

_SHARED_BASIS: dict | None = None


def _basis_plan(config: ScanConfig) -> dict | None:
    """Shared Hermite-basis plan covering the whole grid, or None if the
    scan never synthesizes wavefunctions."""
    if "n_z" not in config.selection:
        return None
    g_s = config.g_s()
    trunc = config.truncation()
    n_global = 0
    disp = 0.0
    for lam in config.lam_axis.values():
        for g_gs in (config.g_axis.lo, config.g_axis.hi):
            try:
                params = build_params(config.omega, config.Omega, abs(g_gs) * g_s, lam)
                n_global = max(n_global, trunc.resolve(params))
            except ValueError:
                continue  # the affected points will be flagged in-row
            disp = max(disp, params.gz_prime, params.gy_prime)
    if n_global == 0:
        return None
    step = min(config.grid_step, 0.9 * math.pi / math.sqrt(2.0 * n_global))
    half = disp + 8.0
    m = max(1, math.ceil(half / step))
    x = (np.arange(2 * m + 1) - m) * step
    return {"n_max": n_global, "x": x}


def _ensure_basis(plan: dict | None) -> tuple[np.ndarray, np.ndarray] | None:
    global _SHARED_BASIS
    if plan is None:
        return None
    if _SHARED_BASIS is None or _SHARED_BASIS["n_max"] != plan["n_max"] or len(
        _SHARED_BASIS["x"]
    ) != len(plan["x"]):
        _SHARED_BASIS = {
            "n_max": plan["n_max"],
            "x": plan["x"],
            "phi": hermite_functions(plan["n_max"], plan["x"]),
        }
    return _SHARED_BASIS["phi"], _SHARED_BASIS["x"]


def _compute_point(args) -> PointRecord:
    (lam, g_gs, config, plan) = args
    record = PointRecord(lam=float(lam), g_over_gs=float(g_gs), omega=config.omega)
    try:
        params = build_params(config.omega, config.Omega, g_gs * config.g_s(), lam)
        point = solve_point(params, config.truncation())
        record.e0 = point.e0
        record.e1 = point.e1
        record.gap = point.gap
        record.parity = float(point.parity)
        record.n_max_used = float(point.n_max)

        if "observables" in config.selection:
            result = obs.evaluate(point.ground, params)
            record.sigma_x = result.sigma_x
            record.a_norm = math.nan if result.a_norm is None else result.a_norm
            record.ap = record.a_norm * record.parity
            record.p_x = result.p_x
            record.p_sigma = result.p_sigma
            record.excitation = result.excitation
            if "duality" in config.selection:
                record.duality_mod = result.duality_mod

        if "n_z" in config.selection:
            basis = _ensure_basis(plan)
            state = point.ground
            if lam < 0:
                state = realify(dual_transform(state))
            if basis is not None:
                phi, x = basis
                wave = spinor_wavefunction(state, params, basis=phi, basis_x=x)
            else:
                wave = spinor_wavefunction(state, params, GridConfig(step=config.grid_step))
            record.n_z = float(count_zeros(wave, config.zero_component).n_z)
    except Exception as exc:  # noqa: BLE001 - per-point containment by contract
        record.status = f"error:{type(exc).__name__}:{exc}"
    return record


def _resolve_workers(config: ScanConfig) -> int:
    if config.workers is not None:
        return max(1, config.workers)
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def scan2d(config: ScanConfig) -> ScanDataset:
    """Run the full grid; failed points are flagged in-row, never fatal."""
    config.validate()
    started = time.time()
    plan = _basis_plan(config)
    tasks = [
        (lam, g_gs, config, plan)
        for lam in config.lam_axis.values()
        for g_gs in config.g_axis.values()
    ]
    workers = _resolve_workers(config)
    if workers > 1 and len(tasks) > 8:
        chunk = max(1, len(tasks) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_compute_point, tasks, chunksize=chunk))
    else:
        records = [_compute_point(t) for t in tasks]

    metadata = {
        "version": VERSION,
        "omega": config.omega,
        "Omega": config.Omega,
        "g_s": config.g_s(),
        "lambda_axis": dataclasses.asdict(config.lam_axis),
        "g_axis": dataclasses.asdict(config.g_axis),
        "truncation_policy": config.policy,
        "selection": list(config.selection),
        "wall_time_s": time.time() - started,
    }
    return ScanDataset(config=config, records=records, metadata=metadata)


# --- phase labels ------------------------------------------------------------


@dataclass(frozen=True)
class PhaseLabel:
    regime: str  # "normal" | "x-type" | "p-type"
    parity: int
    n_z: int
    ambiguous: bool = False

    def key(self) -> tuple:
        return (self.regime, self.parity, self.n_z)


def classify_phase(
    record: PointRecord, a_threshold: float = 0.1, margin: float = 0.02
) -> PhaseLabel:
    """Label a record by (regime, parity sign, node count).

    The regime comes from the normalized boson-pair amplitude: above
    +a_threshold x-type, below -a_threshold p-type, else normal.  Points
    within ``margin`` of the threshold are flagged ambiguous rather than
    silently assigned.
    """
    a = record.a_norm
    if math.isnan(a):
        regime, ambiguous = "normal", False
    elif a >= a_threshold:
        regime, ambiguous = "x-type", abs(a - a_threshold) < margin
    elif a <= -a_threshold:
        regime, ambiguous = "p-type", abs(a + a_threshold) < margin
    else:
        regime = "normal"
        ambiguous = min(abs(a - a_threshold), abs(a + a_threshold)) < margin
    parity = 0 if math.isnan(record.parity) else int(record.parity)
    n_z = -1 if math.isnan(record.n_z) else int(record.n_z)
    return PhaseLabel(regime=regime, parity=parity, n_z=n_z, ambiguous=ambiguous)


# --- serialization -----------------------------------------------------------


INT_COLUMNS = {"parity", "n_z", "n_max_used"}


def _format_cell(value, column: str = "") -> str:
    if isinstance(value, str):
        return value
    value = float(value)
    if math.isnan(value):
        return "nan"
    if value == 0.0:
        value = 0.0  # collapse -0.0
    if column in INT_COLUMNS:
        return str(int(value))
    return repr(value)


def emit(dataset: ScanDataset, path, fmt: str = "csv") -> str:
    """Write the dataset; identical configs yield identical bytes except
    for the generated_at / wall_time metadata lines."""
    path = str(path)
    if fmt == "csv":
        lines = ["# rabiscan scan export"]
        meta = dataset.metadata
        lines.append(f"# version: {meta['version']}")
        lines.append(f"# omega: {meta['omega']!r} Omega: {meta['Omega']!r} g_s: {meta['g_s']!r}")
        ax_l, ax_g = meta["lambda_axis"], meta["g_axis"]
        lines.append(
            f"# lambda_axis: {ax_l['lo']!r} {ax_l['hi']!r} {ax_l['steps']}"
            f" g_axis: {ax_g['lo']!r} {ax_g['hi']!r} {ax_g['steps']}"
        )
        lines.append(f"# truncation: {meta['truncation_policy']} (per-point n_max_used column)")
        lines.append(f"# selection: {','.join(meta['selection'])}")
        lines.append(f"# generated_at: {time.strftime('%Y-%m-%dT%H:%M:%S')}")
        lines.append(f"# wall_time_s: {meta['wall_time_s']!r}")
        lines.append(",".join(CSV_COLUMNS))
        for record in dataset.records:
            lines.append(",".join(_format_cell(v, c) for v, c in zip(record.row(), CSV_COLUMNS)))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    elif fmt == "json":
        meta = dict(dataset.metadata)
        meta["generated_at"] = time.strftime("%Y-%m-%dT%H:%M:%S")
        records = []
        for record in dataset.records:
            entry = {}
            for col, val in zip(CSV_COLUMNS, record.row()):
                if isinstance(val, str):
                    entry[col] = val
                elif math.isnan(val):
                    entry[col] = None
                elif col in INT_COLUMNS:
                    entry[col] = int(val)
                else:
                    entry[col] = float(val) + 0.0
            records.append(entry)
        with open(path, "w") as fh:
            json.dump({"metadata": meta, "records": records}, fh, indent=1)
            fh.write("\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path


def _parse_cell(text: str):
    try:
        return float(text)
    except ValueError:
        return text


def read_scan_csv(path) -> ScanDataset:
    records = []
    meta: dict = {}
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                continue
            if line.startswith("lambda,"):
                continue
            cells = line.split(",")
            # status may contain commas from exception text; rejoin the tail
            head, status = cells[: len(CSV_COLUMNS) - 1], ",".join(cells[len(CSV_COLUMNS) - 1 :])
            values = [_parse_cell(c) for c in head]
            records.append(
                PointRecord(
                    lam=values[0],
                    g_over_gs=values[1],
                    omega=values[2],
                    e0=values[3],
                    e1=values[4],
                    gap=values[5],
                    parity=values[6],
                    sigma_x=values[7],
                    a_norm=values[8],
                    ap=values[9],
                    n_z=values[10],
                    p_x=values[11],
                    p_sigma=values[12],
                    excitation=values[13],
                    duality_mod=values[14],
                    n_max_used=values[15],
                    status=status,
                )
            )
    config = _config_from_records(records)
    return ScanDataset(config=config, records=records, metadata=meta)


def read_scan_json(path) -> ScanDataset:
    with open(path) as fh:
        payload = json.load(fh)
    records = []
    for entry in payload["records"]:
        vals = [
            math.nan if entry[col] is None else entry[col] for col in CSV_COLUMNS[:-1]
        ]
        records.append(
            PointRecord(
                lam=vals[0],
                g_over_gs=vals[1],
                omega=vals[2],
                e0=vals[3],
                e1=vals[4],
                gap=vals[5],
                parity=vals[6],
                sigma_x=vals[7],
                a_norm=vals[8],
                ap=vals[9],
                n_z=vals[10],
                p_x=vals[11],
                p_sigma=vals[12],
                excitation=vals[13],
                duality_mod=vals[14],
                n_max_used=vals[15],
                status=entry["status"],
            )
        )
    return ScanDataset(config=_config_from_records(records), records=records, metadata=payload["metadata"])


def _config_from_records(records: list[PointRecord]) -> ScanConfig:
    lams = sorted({r.lam for r in records})
    gs = sorted({r.g_over_gs for r in records})
    omega = records[0].omega if records else 1.0
    return ScanConfig(
        omega=omega,
        lam_axis=AxisSpec(lams[0], lams[-1], len(lams)),
        g_axis=AxisSpec(gs[0], gs[-1], len(gs)),
    )


# --- figure presets ----------------------------------------------------------


def _preset_configs() -> dict[str, tuple[ScanConfig, str]]:
    full_lam = AxisSpec(-1.0, 1.0, 201)
    g3 = AxisSpec(0.0, 3.0, 201)
    return {
        "fig1a": (
            ScanConfig(omega=0.01, lam_axis=full_lam, g_axis=g3),
            "normalized <a+a+> map at omega=0.01 (x/p-type phases)",
        ),
        "fig1b": (
            ScanConfig(omega=2.0, lam_axis=full_lam, g_axis=g3),
            "<sigma_x> map at omega=2 (first-order steps)",
        ),
        "fig1c": (
            ScanConfig(omega=0.1, lam_axis=full_lam, g_axis=g3),
            "first-excitation gap at omega=0.1 (boundary filaments)",
        ),
        "fig1d": (
            ScanConfig(omega=0.5, lam_axis=full_lam, g_axis=AxisSpec(0.0, 6.0, 201)),
            "first-excitation gap at omega=0.5",
        ),
        "fig1e": (
            ScanConfig(omega=0.1, lam_axis=full_lam, g_axis=g3),
            "A*P map at omega=0.1 (quintuple-point structure)",
        ),
        "fig1f": (
            ScanConfig(omega=0.5, lam_axis=full_lam, g_axis=g3),
            "A*P map at omega=0.5 (weak-coupling U(1) structure)",
        ),
        "fig2": (
            ScanConfig(
                omega=0.01,
                lam_axis=AxisSpec(0.5, 0.5, 1),
                g_axis=AxisSpec(0.0, 2.0, 81),
            ),
            "P_x / P_sigma line scan across the conventional transition",
        ),
        "fig3": (
            ScanConfig(omega=0.5, lam_axis=AxisSpec(0.0, 1.0, 201), g_axis=AxisSpec(2.0, 6.0, 161)),
            "node-count map at omega=0.5 (topological belts)",
        ),
        "fig4": (
            ScanConfig(
                omega=0.5,
                lam_axis=AxisSpec(-1.0, 1.0, 201),
                g_axis=AxisSpec(5.0, 5.0, 1),
            ),
            "parity / excitation / duality line scan at g=5 g_s",
        ),
    }


PRESETS: dict[str, tuple[ScanConfig, str]] = _preset_configs()


def preset(name: str, **overrides) -> ScanConfig:
    """Fetch a named preset, optionally overriding axis steps or workers."""
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; known: {', '.join(sorted(PRESETS))}")
    config = PRESETS[name][0]
    if overrides:
        axis_fields = {}
        if "lambda_steps" in overrides:
            steps = overrides.pop("lambda_steps")
            axis_fields["lam_axis"] = dataclasses.replace(config.lam_axis, steps=steps)
        if "g_steps" in overrides:
            steps = overrides.pop("g_steps")
            axis_fields["g_axis"] = dataclasses.replace(config.g_axis, steps=steps)
        config = dataclasses.replace(config, **axis_fields, **overrides)
    return config
