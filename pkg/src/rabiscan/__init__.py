"""Exact diagonalization and phase-diagram scanning for the anisotropic
quantum Rabi model (one qubit, one boson mode, tunable counter-rotating
coupling)."""

from .model import (
    ModelParams,
    Truncation,
    SpinFockMatrix,
    build_params,
    build_hamiltonian,
    adaptive_n_max,
    parity_operator,
    parity_sectors,
    sector_indices,
    sector_tridiagonal,
)
from .eigensolver import (
    EigenSolution,
    PointSolution,
    SolverError,
    lowest_k,
    sector_lowest,
    sector_ground,
    solve_point,
    gap,
)
from .observables import ObservableSet, evaluate, a_norm, duality_expectation
from .realspace import (
    GridConfig,
    SpinorWave,
    ZeroCount,
    spinor_wavefunction,
    count_zeros,
    parity_product,
    dual_transform,
    realspace_energy,
    write_wave_csv,
    read_wave_csv,
)
from .boundaries import (
    BoundaryCurve,
    TwoPacketAnsatz,
    g_c,
    g_T1,
    lambda_T1,
    channel_energies,
    detect_crossings,
    detect_u1_breaking,
)
from .scanner import (
    AxisSpec,
    ScanConfig,
    PointRecord,
    ScanDataset,
    PhaseLabel,
    scan2d,
    classify_phase,
    emit,
    read_scan_csv,
    read_scan_json,
    PRESETS,
)

__version__ = "0.1.0"
