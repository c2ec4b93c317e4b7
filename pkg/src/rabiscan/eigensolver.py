"""Low-lying eigenpairs of the spin-boson matrix and of its parity blocks.

Full matrices use a dense LAPACK solve up to DENSE_CUTOFF and ARPACK
(shift-free Lanczos with restarts) above it.  Parity blocks are solved
through their exact tridiagonal form, which is both faster and fully
deterministic, so scans never touch the iterative path.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .model import ModelParams, SpinFockMatrix, Truncation, sector_tridiagonal

__all__ = [
    "DENSE_CUTOFF",
    "EigenSolution",
    "PointSolution",
    "SolverError",
    "lowest_k",
    "sector_lowest",
    "sector_ground",
    "solve_point",
    "gap",
]

DENSE_CUTOFF = 512

RESIDUAL_TOL = 1e-9
ORTHO_TOL = 1e-10


class SolverError(RuntimeError):
    """Eigensolve failed to meet the residual/orthonormality contract."""

    def __init__(self, message: str, achieved_residual: float | None = None):
        super().__init__(message)
        self.achieved_residual = achieved_residual


@dataclass
class EigenSolution:
    """Eigenpairs sorted ascending, vectors in full-space (n, s) indexing."""

    energies: np.ndarray
    vectors: np.ndarray  # shape (dim, k)
    sector: str          # "full" | "even" | "odd"
    params: ModelParams
    n_max: int

    def state(self, i: int = 0) -> np.ndarray:
        return self.vectors[:, i]


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Deterministic sign convention: largest-magnitude entry positive."""
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        lead = np.argmax(np.abs(col))
        if col[lead] < 0:
            vectors[:, j] = -col
    return vectors


def _verify(apply_h, energies: np.ndarray, vectors: np.ndarray) -> None:
    res = apply_h(vectors) - vectors * energies[None, :]
    worst = 0.0
    for j, e in enumerate(energies):
        r = np.linalg.norm(res[:, j]) / max(1.0, abs(e))
        worst = max(worst, r)
    if worst > RESIDUAL_TOL:
        raise SolverError(
            f"eigenpair residual {worst:.3e} exceeds {RESIDUAL_TOL:.0e}",
            achieved_residual=worst,
        )
    gram = vectors.T @ vectors - np.eye(vectors.shape[1])
    if np.max(np.abs(gram)) > ORTHO_TOL:
        raise SolverError(f"eigenvectors not orthonormal within {ORTHO_TOL:.0e}")


def lowest_k(H: SpinFockMatrix, k: int) -> EigenSolution:
    """k lowest eigenpairs of the full matrix."""
    dim = H.dim
    if not 1 <= k <= dim:
        raise ValueError(f"k={k} out of range for dim={dim}")
    if dim <= DENSE_CUTOFF:
        energies, vectors = scipy.linalg.eigh(
            H.matrix.toarray(), subset_by_index=(0, k - 1)
        )
    else:
        ncv = min(dim, max(4 * k + 1, 40))
        v0 = np.full(dim, 1.0 / np.sqrt(dim))
        try:
            energies, vectors = eigsh(H.matrix, k=k, which="SA", v0=v0, ncv=ncv)
        except ArpackNoConvergence as exc:
            n_ok = len(exc.eigenvalues)
            raise SolverError(
                f"ARPACK converged only {n_ok}/{k} pairs at dim={dim}",
                achieved_residual=float("nan"),
            ) from exc
        order = np.argsort(energies)
        energies = energies[order]
        vectors = vectors[:, order]
    vectors = _fix_signs(np.ascontiguousarray(vectors))
    _verify(lambda v: H.matrix @ v, energies, vectors)
    return EigenSolution(energies, vectors, "full", H.params, H.n_max)


def sector_lowest(
    params: ModelParams, trunc: Truncation, sector: str, k: int = 1
) -> EigenSolution:
    """k lowest eigenpairs within one parity block, embedded in full space."""
    n_max = trunc.resolve(params)
    d, e, idx = sector_tridiagonal(params, n_max, sector)
    m = len(d)
    if not 1 <= k <= m:
        raise ValueError(f"k={k} out of range for sector size {m}")
    energies, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, k - 1))

    def apply_tri(v: np.ndarray) -> np.ndarray:
        out = d[:, None] * v
        out[:-1] += e[:, None] * v[1:]
        out[1:] += e[:, None] * v[:-1]
        return out

    vecs = _fix_signs(np.ascontiguousarray(vecs))
    _verify(apply_tri, energies, vecs)

    full = np.zeros((2 * (n_max + 1), k))
    full[idx, :] = vecs
    return EigenSolution(energies, full, sector, params, n_max)


def sector_ground(
    params: ModelParams, trunc: Truncation, sector: str
) -> tuple[float, np.ndarray]:
    """Lowest eigenpair of the requested parity block."""
    sol = sector_lowest(params, trunc, sector, k=1)
    return float(sol.energies[0]), sol.state(0)


@dataclass
class PointSolution:
    """Merged sector solve at one parameter point.

    Both sector ladders are kept so callers can resolve labels near exact
    crossings themselves; ``parity`` is the sector of the global ground
    state (ties resolve to the even sector).
    """

    e0: float
    e1: float
    gap: float
    parity: int
    ground: np.ndarray
    even_energies: np.ndarray = field(repr=False)
    odd_energies: np.ndarray = field(repr=False)
    n_max: int = 0
    params: ModelParams | None = None


def solve_point(params: ModelParams, trunc: Truncation, k: int = 2) -> PointSolution:
    even = sector_lowest(params, trunc, "even", k=k)
    odd = sector_lowest(params, trunc, "odd", k=k)
    if odd.energies[0] < even.energies[0]:
        parity, ground = -1, odd.state(0)
    else:
        parity, ground = +1, even.state(0)
    merged = np.sort(np.concatenate([even.energies, odd.energies]))
    e0, e1 = float(merged[0]), float(merged[1])
    return PointSolution(
        e0=e0,
        e1=e1,
        gap=e1 - e0,
        parity=parity,
        ground=ground,
        even_energies=even.energies,
        odd_energies=odd.energies,
        n_max=even.n_max,
        params=params,
    )


def gap(params: ModelParams, trunc: Truncation) -> float:
    """First-excitation gap E1 - E0 from the merged sector spectra."""
    return solve_point(params, trunc).gap
