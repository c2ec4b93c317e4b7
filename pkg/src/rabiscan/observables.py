"""Scalar ground-state diagnostics mapped over the phase diagram.

All expectation values are evaluated directly from Fock coefficients with
ladder-operator index arithmetic; no operator matrices are built.  Second
moments use x^2 = (a^2 + a^+2 + 2 a^+a + 1)/2 and the sign-flipped p^2
identity, which is spectrally exact in the truncated basis.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams

__all__ = [
    "ObservableSet",
    "evaluate",
    "a_norm",
    "normalization_factor",
    "duality_phases",
    "duality_expectation",
    "excitation_variance",
]

NORM_DRIFT_TOL = 1e-8


def _split(state: np.ndarray) -> tuple[np.ndarray, int]:
    """Reshape a full-space vector to (n_max+1, 2) with columns (s=+1, s=-1)."""
    state = np.asarray(state)
    if state.ndim != 1 or state.size % 2:
        raise ValueError(f"state must be a flat vector of even length, got shape {state.shape}")
    n_max = state.size // 2 - 1
    return state.reshape(n_max + 1, 2), n_max


def _check_norm(state: np.ndarray) -> None:
    norm = float(np.linalg.norm(state))
    if abs(norm - 1.0) > NORM_DRIFT_TOL:
        raise ValueError(f"state normalization drift {abs(norm - 1.0):.3e} exceeds {NORM_DRIFT_TOL:.0e}")


def normalization_factor(params: ModelParams) -> float:
    """Reference scale A_0 = [(1+|lam|) g / (2 omega)]^2 for <a^+a^+>."""
    return ((1.0 + abs(params.lam)) * params.g / (2.0 * params.omega)) ** 2


def duality_phases(n_max: int) -> np.ndarray:
    """Diagonal of the duality unitary in the |n, s=sigma_x> basis.

    Composes the Fock phase map of the x <-> p exchange with the spin
    rotation taking sigma_y -> -sigma_z, sigma_z -> sigma_y, plus the boson
    parity needed to keep the rotating coupling invariant.  The overall
    phase is anchored so the weak-coupling Jaynes-Cummings ground state
    |0, -x> has expectation exactly +1.  Entries: i^(n+1) on s=+1 states,
    i^n on s=-1 states.  Applying the map twice gives -P, so it is an
    involution up to a symmetry of the model.
    """
    n = np.arange(n_max + 1)
    out = np.empty(2 * (n_max + 1), dtype=complex)
    out[0::2] = 1j ** (n + 1)
    out[1::2] = 1j**n
    return out


def duality_expectation(state: np.ndarray, params: ModelParams | None = None) -> complex:
    """<state| U_D |state> with U_D the diagonal duality unitary."""
    _check_norm(state)
    phases = duality_phases(len(state) // 2 - 1)
    return complex(np.sum(np.conj(state) * phases * state))


def a_norm(state: np.ndarray, params: ModelParams) -> float | None:
    """<a^+a^+> / A_0; returns None when g=0 leaves A_0 undefined."""
    if params.g == 0.0:
        return None
    return _adag_adag(state) / normalization_factor(params)


def _adag_adag(state: np.ndarray) -> float:
    c, n_max = _split(state)
    n = np.arange(n_max - 1)
    weight = np.sqrt((n + 1.0) * (n + 2.0))
    s = np.sum(np.conj(c[2:, :]) * c[:-2, :] * weight[:, None])
    return float(np.real(s))


def excitation_variance(state: np.ndarray) -> float:
    """Variance of the excitation number a^+a + sigma_x/2 (diagonal here)."""
    c, n_max = _split(state)
    prob = np.abs(c) ** 2
    n = np.arange(n_max + 1)
    vals = np.stack([n + 0.5, n - 0.5], axis=1)
    mean = float(np.sum(prob * vals))
    second = float(np.sum(prob * vals**2))
    return second - mean**2


@dataclass
class ObservableSet:
    """Ground-state diagnostics at one parameter point."""

    a_dag_a_dag: float
    a_norm: float | None
    sigma_x: float
    parity: float
    p_x: float
    p_sigma: float
    excitation: float
    duality: complex
    duality_mod: float
    duality_phase: float
    x2: float
    p2: float


def evaluate(state: np.ndarray, params: ModelParams) -> ObservableSet:
    """Evaluate every diagnostic on a normalized state vector."""
    _check_norm(state)
    c, n_max = _split(state)
    prob = np.abs(c) ** 2
    n = np.arange(n_max + 1)
    sign_n = np.where(n % 2 == 0, 1.0, -1.0)

    occupation = float(np.sum(prob * n[:, None]))
    sigma_x = float(np.sum(prob[:, 0]) - np.sum(prob[:, 1]))
    p_x = float(np.sum(sign_n[:, None] * prob))
    parity = float(np.sum(sign_n * (prob[:, 0] - prob[:, 1])))

    adag2 = _adag_adag(state)
    x2 = occupation + 0.5 + adag2
    p2 = occupation + 0.5 - adag2

    duality = duality_expectation(state, params)

    return ObservableSet(
        a_dag_a_dag=adag2,
        a_norm=a_norm(state, params),
        sigma_x=sigma_x,
        parity=parity,
        p_x=p_x,
        p_sigma=sigma_x,
        excitation=occupation + 0.5 * sigma_x,
        duality=duality,
        duality_mod=abs(duality),
        duality_phase=cmath.phase(duality),
        x2=x2,
        p2=p2,
    )
