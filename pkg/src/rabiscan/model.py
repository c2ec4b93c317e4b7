"""Truncated-Fock-space construction of the anisotropic Rabi Hamiltonian.

The model couples a single boson mode (frequency ``omega``) to a qubit
(splitting ``Omega``) with a rotating coupling of strength ``g`` and a
counter-rotating coupling of strength ``g*lam``; ``lam = 1`` gives the
isotropic Rabi model and ``lam = 0`` the Jaynes-Cummings limit.

All matrices are built in the product basis |n> x |s>, where n is the
boson occupation and s = +/-1 labels sigma_x eigenstates.  In this basis
the spin-flip operators are real projectors, so H is real symmetric with
at most three nonzeros per row:

    <n, s|H|n, s>        = omega*n + s*Omega/2
    <n+1, -x|H|n, +x>    = g*sqrt(n+1)         (rotating)
    <n+1, +x|H|n, -x>    = g*lam*sqrt(n+1)     (counter-rotating)

The parity s*(-1)^n is conserved, so H splits into two tridiagonal blocks
(one basis state per occupation number in each block).
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "ModelParams",
    "Truncation",
    "SpinFockMatrix",
    "ParityOperator",
    "ParitySectors",
    "build_params",
    "build_hamiltonian",
    "adaptive_n_max",
    "basis_index",
    "basis_state",
    "parity_operator",
    "parity_sectors",
    "sector_indices",
    "sector_tridiagonal",
    "excitation_diagonal",
]


@dataclass(frozen=True)
class ModelParams:
    """Model couplings, with Omega = 1 as the natural energy unit."""

    omega: float
    Omega: float
    g: float
    lam: float

    @property
    def g_y(self) -> float:
        """Counter-rotating-side coupling (1 - lam) g / 2."""
        return 0.5 * (1.0 - self.lam) * self.g

    @property
    def g_z(self) -> float:
        """Rotating-side coupling (1 + lam) g / 2."""
        return 0.5 * (1.0 + self.lam) * self.g

    @property
    def g_s(self) -> float:
        """Critical coupling of the isotropic model, sqrt(omega*Omega)/2."""
        return 0.5 * math.sqrt(self.omega * self.Omega)

    @property
    def gz_prime(self) -> float:
        """Dimensionless well displacement sqrt(2) g_z / omega."""
        return math.sqrt(2.0) * self.g_z / self.omega

    @property
    def gy_prime(self) -> float:
        return math.sqrt(2.0) * self.g_y / self.omega

    @property
    def eps0_y(self) -> float:
        """Constant offset used when drawing the effective potential."""
        return -0.5 * (self.gy_prime**2 + 1.0) * self.omega


def build_params(
    omega: float,
    Omega: float,
    g: float,
    lam: float,
    allow_lambda_outside_unit: bool = False,
) -> ModelParams:
    """Validate raw couplings and return a ModelParams.

    Rejects non-finite input, non-positive frequencies, negative g, and
    |lam| > 1 unless explicitly allowed.
    """
    for name, val in (("omega", omega), ("Omega", Omega), ("g", g), ("lam", lam)):
        if not math.isfinite(val):
            raise ValueError(f"{name} must be finite, got {val!r}")
    if omega <= 0.0 or Omega <= 0.0:
        raise ValueError(f"frequencies must be positive, got omega={omega}, Omega={Omega}")
    if g < 0.0:
        raise ValueError(f"coupling g must be >= 0, got {g}")
    if abs(lam) > 1.0 and not allow_lambda_outside_unit:
        raise ValueError(
            f"anisotropy lam={lam} outside [-1, 1]; pass allow_lambda_outside_unit=True to force"
        )
    return ModelParams(float(omega), float(Omega), float(g), float(lam))


def adaptive_n_max(params: ModelParams) -> int:
    """Smallest retained occupation that safely holds the displaced packets.

    Uses the larger of the position (g_z') and momentum (g_y') displacements
    so that negative-anisotropy states, whose occupation distribution mirrors
    the positive side, fit as well.
    """
    disp2 = max(params.gz_prime**2, params.gy_prime**2)
    return max(64, math.ceil(8.0 * disp2) + 40)


@dataclass(frozen=True)
class Truncation:
    """Boson-space cutoff policy.

    ``adaptive`` resolves n_max from the couplings (never below the floor
    of :func:`adaptive_n_max`); ``fixed`` uses ``n_max`` as given but
    refuses values below the adaptive floor unless
    ``allow_below_minimum=True``.
    """

    n_max: int | None = None
    policy: str = "adaptive"
    allow_below_minimum: bool = False

    def resolve(self, params: ModelParams) -> int:
        floor = adaptive_n_max(params)
        if self.policy == "adaptive":
            return max(floor, self.n_max or 0)
        if self.policy == "fixed":
            if self.n_max is None:
                raise ValueError("fixed truncation policy requires n_max")
            if self.n_max < floor and not self.allow_below_minimum:
                raise ValueError(
                    f"n_max={self.n_max} below adaptive minimum {floor}; "
                    "set allow_below_minimum=True to override"
                )
            return int(self.n_max)
        raise ValueError(f"unknown truncation policy {self.policy!r}")


def basis_index(n: int, s: int) -> int:
    """Index of |n, s> with s = +/-1 the sigma_x eigenvalue."""
    return 2 * n + (1 - s) // 2


def basis_state(index: int) -> tuple[int, int]:
    """Inverse of :func:`basis_index`, returns (n, s)."""
    return index // 2, 1 - 2 * (index % 2)


@dataclass
class SpinFockMatrix:
    """Real symmetric Hamiltonian in the |n, s=sigma_x> basis (CSR storage)."""

    matrix: sp.csr_matrix
    n_max: int
    params: ModelParams

    @property
    def dim(self) -> int:
        return 2 * (self.n_max + 1)


def build_hamiltonian(params: ModelParams, trunc: Truncation) -> SpinFockMatrix:
    """Assemble H in sparse symmetric form; both triangles are written
    explicitly so no symmetrization step is needed."""
    n_max = trunc.resolve(params)
    dim = 2 * (n_max + 1)
    n = np.arange(n_max + 1)

    diag = np.empty(dim)
    diag[0::2] = params.omega * n + 0.5 * params.Omega
    diag[1::2] = params.omega * n - 0.5 * params.Omega

    root = np.sqrt(np.arange(1.0, n_max + 1.0))
    rot = params.g * root                 # (n,+) <-> (n+1,-)
    crot = params.g * params.lam * root   # (n,-) <-> (n+1,+)

    m = np.arange(n_max)  # lower occupation of each coupled pair
    rows = np.concatenate([np.arange(dim), 2 * m + 3, 2 * m, 2 * m + 2, 2 * m + 1])
    cols = np.concatenate([np.arange(dim), 2 * m, 2 * m + 3, 2 * m + 1, 2 * m + 2])
    vals = np.concatenate([diag, rot, rot, crot, crot])

    matrix = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
    return SpinFockMatrix(matrix=matrix, n_max=n_max, params=params)


@dataclass
class ParityOperator:
    """Diagonals of the conserved parity and its two factors."""

    p: np.ndarray        # s * (-1)^n
    p_x: np.ndarray      # (-1)^n, spatial inversion
    p_sigma: np.ndarray  # s, spin reversal

    def matrix(self, which: str = "p") -> sp.dia_matrix:
        values = {"p": self.p, "p_x": self.p_x, "p_sigma": self.p_sigma}[which]
        return sp.diags(values)


def parity_operator(n_max: int) -> ParityOperator:
    n = np.arange(n_max + 1)
    sign_n = np.where(n % 2 == 0, 1.0, -1.0)
    p_x = np.repeat(sign_n, 2)
    p_sigma = np.tile(np.array([1.0, -1.0]), n_max + 1)
    return ParityOperator(p=p_sigma * p_x, p_x=p_x, p_sigma=p_sigma)


def sector_indices(n_max: int, sector: str) -> np.ndarray:
    """Full-space indices of one parity sector, ordered by occupation.

    Each sector holds exactly one basis state per n: the even sector pairs
    even n with s=+1 and odd n with s=-1, the odd sector the reverse.
    """
    n = np.arange(n_max + 1)
    if sector == "even":
        return 2 * n + (n % 2)
    if sector == "odd":
        return 2 * n + 1 - (n % 2)
    raise ValueError(f"sector must be 'even' or 'odd', got {sector!r}")


def sector_tridiagonal(
    params: ModelParams, n_max: int, sector: str
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact tridiagonal form of one parity block.

    Returns (diagonal, off-diagonal, full-space indices).  Consecutive
    sector states carry opposite spin, so the n -> n+1 coupling alternates
    between the rotating and counter-rotating strengths.
    """
    idx = sector_indices(n_max, sector)
    n = np.arange(n_max + 1)
    sign = np.where(n % 2 == 0, 1.0, -1.0)
    if sector == "even":
        spin = sign
    else:
        spin = -sign
    d = params.omega * n + 0.5 * params.Omega * spin
    root = np.sqrt(n[1:].astype(float))
    # spin[:-1] = +1 rows couple via the rotating term, -1 rows via the
    # counter-rotating one
    e = root * np.where(spin[:-1] > 0, params.g, params.g * params.lam)
    return d, e, idx


@dataclass
class ParitySectors:
    even: sp.csr_matrix
    odd: sp.csr_matrix
    even_indices: np.ndarray
    odd_indices: np.ndarray

    def embed(self, vector: np.ndarray, sector: str) -> np.ndarray:
        """Lift a sector vector back to full-space indexing."""
        idx = self.even_indices if sector == "even" else self.odd_indices
        full = np.zeros(len(self.even_indices) + len(self.odd_indices))
        full[idx] = vector
        return full


def parity_sectors(H: SpinFockMatrix) -> ParitySectors:
    even_idx = sector_indices(H.n_max, "even")
    odd_idx = sector_indices(H.n_max, "odd")
    even = H.matrix[even_idx][:, even_idx].tocsr()
    odd = H.matrix[odd_idx][:, odd_idx].tocsr()
    return ParitySectors(even=even, odd=odd, even_indices=even_idx, odd_indices=odd_idx)


def excitation_diagonal(n_max: int) -> np.ndarray:
    """Diagonal of the excitation number a^+a + sigma_x/2 (conserved at lam=0)."""
    n = np.arange(n_max + 1)
    out = np.empty(2 * (n_max + 1))
    out[0::2] = n + 0.5
    out[1::2] = n - 0.5
    return out
