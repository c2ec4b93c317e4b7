"""Spinor wavefunctions on a spatial grid, node counting, and the x-p dual map.

Fock coefficients are synthesized with unit-norm harmonic-oscillator
eigenfunctions phi_n (dimensionless x).  The sigma_z components are

    psi_+(x) = sum_n phi_n(x) (c_{n,+} + c_{n,-}) / sqrt(2)
    psi_-(x) = sum_n phi_n(x) (c_{n,-} - c_{n,+}) / sqrt(2)

The sign of the lower component is chosen so the weak-coupling ground
state has two positive packets; a definite-parity state then satisfies
psi_-(x) = -P * psi_+(-x), and the product psi_+(x) psi_-(-x) keeps a
uniform sign equal to -P.
"""

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .model import ModelParams
from .observables import duality_phases

__all__ = [
    "GridConfig",
    "SpinorWave",
    "ZeroCount",
    "hermite_functions",
    "default_grid",
    "spinor_wavefunction",
    "count_zeros",
    "parity_product",
    "dual_transform",
    "realify",
    "realspace_energy",
    "write_wave_csv",
    "read_wave_csv",
]

GRID_NORM_TOL = 1e-6


@dataclass(frozen=True)
class GridConfig:
    """Uniform symmetric grid on [-half_width, half_width].

    ``half_width=None`` auto-sizes to the packet displacement plus eight
    oscillator lengths of tail.
    """

    half_width: float | None = None
    step: float = 0.02

    def resolve(self, params: ModelParams, n_max: int) -> np.ndarray:
        h = self.step
        if h <= 0:
            raise ValueError("grid step must be positive")
        limit = math.pi / math.sqrt(2.0 * n_max)
        if h > limit:
            raise ValueError(
                f"grid step {h} too coarse to resolve phi_{n_max} oscillations "
                f"(needs h <= {limit:.4g})"
            )
        if self.half_width is None:
            half = max(params.gz_prime, params.gy_prime) + 8.0
        else:
            half = float(self.half_width)
        m = max(1, math.ceil(half / h))
        return (np.arange(2 * m + 1) - m) * h


def default_grid(params: ModelParams, n_max: int, step: float = 0.02) -> np.ndarray:
    return GridConfig(step=step).resolve(params, n_max)


def hermite_functions(n_max: int, x: np.ndarray) -> np.ndarray:
    """Unit-norm oscillator eigenfunctions phi_0..phi_n_max on the grid x.

    Upward recurrence on scaled values with a per-point renormalization
    guard: far in the Gaussian tail the n=0 seed is carried as
    (mantissa, log-scale) so deep tails do not underflow the whole column
    before the classically allowed region of large n is reached.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1, x.size))
    log_scale = -0.5 * x * x - 0.25 * math.log(math.pi)
    scale = np.exp(log_scale)
    u_prev = np.zeros_like(x)
    u = np.ones_like(x)
    out[0] = u * scale
    for m in range(1, n_max + 1):
        u, u_prev = math.sqrt(2.0 / m) * x * u - math.sqrt((m - 1.0) / m) * u_prev, u
        big = np.abs(u) > 1e150
        if big.any():
            u[big] *= 1e-150
            u_prev[big] *= 1e-150
            log_scale[big] += 150.0 * math.log(10.0)
            scale[big] = np.exp(log_scale[big])
        out[m] = u * scale
    return out


@dataclass
class SpinorWave:
    """Two real sigma_z components on a uniform grid."""

    x: np.ndarray
    psi_plus: np.ndarray
    psi_minus: np.ndarray
    space: str  # "position" | "momentum"
    params: ModelParams
    n_max: int
    parity: int | None = None

    @property
    def step(self) -> float:
        return float(self.x[1] - self.x[0])

    def grid_norm(self) -> float:
        return self.step * float(np.sum(self.psi_plus**2 + self.psi_minus**2))


def _spin_components(state: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c = np.asarray(state, dtype=float).reshape(-1, 2)
    w_plus = (c[:, 0] + c[:, 1]) / math.sqrt(2.0)
    w_minus = (c[:, 1] - c[:, 0]) / math.sqrt(2.0)
    return w_plus, w_minus


def _state_parity(state: np.ndarray) -> int | None:
    c = np.asarray(state).reshape(-1, 2)
    prob = np.abs(c) ** 2
    sign_n = np.where(np.arange(c.shape[0]) % 2 == 0, 1.0, -1.0)
    p = float(np.sum(sign_n * (prob[:, 0] - prob[:, 1])))
    if abs(p) > 0.99:
        return 1 if p > 0 else -1
    return None


def spinor_wavefunction(
    state: np.ndarray,
    params: ModelParams,
    grid: GridConfig | None = None,
    space: str = "position",
    basis: np.ndarray | None = None,
    basis_x: np.ndarray | None = None,
) -> SpinorWave:
    """Synthesize the sigma_z spinor of a Fock-space state.

    ``space="momentum"`` returns the wavefunction in the dual representation
    (the position spinor of the duality-transformed state, which is how the
    p-space structure of negative-anisotropy states is exposed).

    A precomputed ``basis`` matrix from :func:`hermite_functions` (with its
    grid ``basis_x``) can be passed to amortize synthesis across many states.
    """
    state = np.asarray(state)
    if space == "momentum":
        state = realify(dual_transform(state))
    elif space != "position":
        raise ValueError(f"space must be 'position' or 'momentum', got {space!r}")
    if np.iscomplexobj(state):
        state = realify(state)

    n_max = state.size // 2 - 1
    if basis is not None:
        if basis_x is None:
            raise ValueError("basis_x must accompany a precomputed basis")
        if basis.shape[0] < n_max + 1:
            raise ValueError("precomputed basis has too few rows for this state")
        x = basis_x
        phi = basis
    else:
        x = (grid or GridConfig()).resolve(params, n_max)
        phi = hermite_functions(n_max, x)

    w_plus, w_minus = _spin_components(state)
    psi_plus = w_plus @ phi[: n_max + 1]
    psi_minus = w_minus @ phi[: n_max + 1]
    return SpinorWave(
        x=x,
        psi_plus=psi_plus,
        psi_minus=psi_minus,
        space=space,
        params=params,
        n_max=n_max,
        parity=_state_parity(state),
    )


@dataclass
class ZeroCount:
    """Sign-change count of one spinor component."""

    n_z: int
    zero_locations: list[float]
    component: str
    low_confidence: list[bool] = field(default_factory=list)

    @property
    def confident(self) -> bool:
        return not any(self.low_confidence)


def count_zeros(
    wave: SpinorWave, component: str = "minus", rel_threshold: float = 1e-6
) -> ZeroCount:
    """Count sign changes of one component above a relative magnitude floor.

    Samples with |psi| <= rel_threshold * max|psi| are ignored; a sign flip
    between consecutive retained samples counts as one zero, located by
    linear interpolation.  Crossings whose bracketing samples sit within a
    decade of the floor are flagged low-confidence.
    """
    psi = wave.psi_minus if component == "minus" else wave.psi_plus
    amax = float(np.max(np.abs(psi)))
    if amax == 0.0:
        return ZeroCount(0, [], component)
    floor = rel_threshold * amax
    keep = np.abs(psi) > floor
    vals = psi[keep]
    xs = wave.x[keep]
    if vals.size < 2:
        return ZeroCount(0, [], component)
    flips = np.nonzero(np.sign(vals[1:]) != np.sign(vals[:-1]))[0]
    locations = []
    low_confidence = []
    for i in flips:
        v0, v1 = vals[i], vals[i + 1]
        x0, x1 = xs[i], xs[i + 1]
        locations.append(float(x0 + (x1 - x0) * v0 / (v0 - v1)))
        low_confidence.append(min(abs(v0), abs(v1)) < 10.0 * floor)
    return ZeroCount(len(locations), locations, component, low_confidence)


def parity_product(wave: SpinorWave) -> np.ndarray:
    """psi_+(x) * psi_-(-x) on the wave's own grid.

    For a definite-parity state this keeps a uniform sign equal to minus
    the parity eigenvalue.
    """
    return wave.psi_plus * wave.psi_minus[::-1]


def dual_transform(state: np.ndarray) -> np.ndarray:
    """Apply the duality unitary: diagonal Fock/spin phases in this basis.

    Maps eigenstates of the model at anisotropy lam onto eigenstates at
    -lam; the position spinor of the result is the momentum-space
    wavefunction in the dual representation.
    """
    state = np.asarray(state)
    return duality_phases(state.size // 2 - 1) * state


def realify(state: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Strip the global phase of a definite-parity complex vector.

    The duality image of a parity eigenstate is a real vector times a
    global phase; anything with a larger residual imaginary part is
    rejected.
    """
    state = np.asarray(state, dtype=complex)
    lead = np.argmax(np.abs(state))
    phase = state[lead] / abs(state[lead])
    flat = state / phase
    residual = float(np.max(np.abs(flat.imag)))
    if residual > tol * max(1.0, float(np.max(np.abs(flat.real)))):
        raise ValueError(f"state is not real up to a global phase (residual {residual:.3e})")
    out = flat.real
    if out[np.argmax(np.abs(out))] < 0:
        out = -out
    return out


def realspace_energy(wave: SpinorWave, params: ModelParams) -> float:
    """<H> from the grid spinor with central finite differences.

    Uses the spatial form of the Hamiltonian, including the momentum-coupled
    spin term, written in the same lower-component sign convention as the
    spinor synthesis; validates the real-space mapping against the Fock
    eigenvalue.
    """
    u = wave.psi_plus
    v = wave.psi_minus
    x = wave.x
    h = wave.step

    def second(f: np.ndarray) -> np.ndarray:
        out = np.zeros_like(f)
        out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (h * h)
        return out

    def first(f: np.ndarray) -> np.ndarray:
        out = np.zeros_like(f)
        out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
        return out

    kinetic = -0.5 * params.omega * (u * second(u) + v * second(v))
    potential = 0.5 * params.omega * (x * x - 1.0) * (u * u + v * v)
    flip = -params.Omega * u * v
    displacement = math.sqrt(2.0) * params.g_z * x * (u * u - v * v)
    rsoc = math.sqrt(2.0) * params.g_y * (u * first(v) - v * first(u))
    return h * float(np.sum(kinetic + potential + flip + displacement + rsoc))


def write_wave_csv(wave: SpinorWave, path) -> None:
    """Export x, psi_plus, psi_minus with '#'-prefixed metadata lines."""
    p = wave.params
    buf = io.StringIO()
    buf.write("# rabiscan wave export\n")
    buf.write(f"# omega: {p.omega!r} Omega: {p.Omega!r} g: {p.g!r} lambda: {p.lam!r}\n")
    buf.write(f"# n_max: {wave.n_max} space: {wave.space} parity: {wave.parity}\n")
    buf.write("x,psi_plus,psi_minus\n")
    for xi, up, dn in zip(wave.x, wave.psi_plus, wave.psi_minus):
        buf.write(f"{float(xi)!r},{float(up)!r},{float(dn)!r}\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def read_wave_csv(path) -> SpinorWave:
    meta: dict[str, float | str] = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                tokens = line[1:].split()
                for key, val in zip(tokens[:-1], tokens[1:]):
                    if key.endswith(":"):
                        meta[key[:-1]] = val
                continue
            if line.startswith("x,"):
                continue
            rows.append([float(t) for t in line.split(",")])
    data = np.array(rows)
    params = ModelParams(
        omega=float(meta["omega"]),
        Omega=float(meta["Omega"]),
        g=float(meta["g"]),
        lam=float(meta["lambda"]),
    )
    parity = None if meta.get("parity") in (None, "None") else int(meta["parity"])
    return SpinorWave(
        x=data[:, 0],
        psi_plus=data[:, 1],
        psi_minus=data[:, 2],
        space=str(meta.get("space", "position")),
        params=params,
        n_max=int(meta["n_max"]),
        parity=parity,
    )
