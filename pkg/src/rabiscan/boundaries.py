"""Transition boundaries: closed forms, two-packet channel energies, and
numerical detection via parity-sector level crossings.

The conventional second-order boundary is g_c = 2 g_s / (1 + |lam|); the
primary gap-closing boundary is g_T1 = 2 g_s / sqrt(1 - lam^2), recovered
here both in closed form and as the root of the leading opposite-side
tunneling-plus-RSOC channel energy of a symmetric two-packet ansatz.
Crossings of the even/odd sector ground energies give every first-order
boundary numerically; those are exact level intersections, so a coarse
sign-change scan plus bisection is robust.
"""

import math
from dataclasses import dataclass, field

import gmpy2
import numpy as np
from scipy.linalg import eigvalsh_tridiagonal
from scipy.optimize import brentq

from .eigensolver import sector_lowest
from .model import ModelParams, Truncation, build_params, sector_tridiagonal
from .observables import excitation_variance

__all__ = [
    "BoundaryCurve",
    "TwoPacketAnsatz",
    "g_c",
    "g_T1",
    "lambda_T1",
    "channel_energies",
    "e_omega_y",
    "detect_crossings",
    "detect_u1_breaking",
    "boundaries_to_csv",
]


def g_c(lam: float, params: ModelParams) -> float:
    """Conventional transition coupling 2 g_s / (1 + |lam|)."""
    if abs(lam) > 1.0:
        raise ValueError(f"|lam| must be <= 1, got {lam}")
    return 2.0 * params.g_s / (1.0 + abs(lam))


def g_T1(lam: float, params: ModelParams) -> float:
    """Primary gap-closing boundary 2 g_s / sqrt(1 - lam^2).

    Diverges at |lam| = 1 (the isotropic model never crosses); returns
    math.inf there.
    """
    if abs(lam) > 1.0:
        raise ValueError(f"|lam| must be <= 1, got {lam}")
    if abs(lam) == 1.0:
        return math.inf
    return 2.0 * params.g_s / math.sqrt(1.0 - lam * lam)


def lambda_T1(g: float, params: ModelParams) -> float:
    """Anisotropy at which the primary boundary sits for a given coupling.

    Exact inverse of :func:`g_T1`, sqrt(1 - 4 g_s^2 / g^2); requires
    g >= 2 g_s.
    """
    if g < 2.0 * params.g_s:
        raise ValueError(f"g={g} below 2*g_s={2.0 * params.g_s}; no boundary to invert")
    return math.sqrt(1.0 - (2.0 * params.g_s / g) ** 2)


@dataclass(frozen=True)
class TwoPacketAnsatz:
    """Symmetric two-packet trial state: weights alpha/beta on Gaussian
    packets of unit width centered at -x0 and +x0 (x0 defaults to the
    displacement g_z')."""

    alpha: float = 1.0 / math.sqrt(2.0)
    beta: float = 1.0 / math.sqrt(2.0)
    displacement: float | None = None
    packet_width: float = 1.0

    def center(self, params: ModelParams) -> float:
        return params.gz_prime if self.displacement is None else self.displacement


def _mirror_overlap(a: float, b: float, w: float) -> float:
    """<G_a(x) | G_b(-x)> for unit-norm Gaussians of width w centered a, b."""
    return math.exp(-((a + b) ** 2) / (4.0 * w * w))


def _mirror_derivative_overlap(a: float, b: float, w: float) -> float:
    """<G_a(x) | d/dx G_b(-x)>."""
    return -((a + b) / (2.0 * w * w)) * _mirror_overlap(a, b, w)


def channel_energies(
    params: ModelParams, ansatz: TwoPacketAnsatz | None = None, braided: bool = False
) -> dict[str, float]:
    """Tunneling and RSOC channel energies of the two-packet state.

    Keys 'Omega_gg' and 'rsoc_gg' with gg in {aa, ab, ba, bb} are the four
    spin-flip and four momentum-coupling channels; 'E_Omega_y' is the
    leading opposite-side sum Omega_aa + rsoc_aa whose sign reversal marks
    the primary boundary.  ``braided=True`` flips the weight signs as after
    the first node forms.
    """
    ansatz = ansatz or TwoPacketAnsatz()
    x0 = ansatz.center(params)
    w = ansatz.packet_width
    centers = {"a": -x0, "b": +x0}
    weights = {"a": ansatz.alpha, "b": ansatz.beta}

    out: dict[str, float] = {}
    for ga in ("a", "b"):
        for gb in ("a", "b"):
            wgt = weights[ga] * weights[gb]
            if braided and ga == gb:
                # the first node flips one weight in each component, which
                # reverses the opposite-side channels and leaves the
                # same-side ones untouched
                wgt = -wgt
            out[f"Omega_{ga}{gb}"] = (
                -0.5 * params.Omega * wgt * _mirror_overlap(centers[ga], centers[gb], w)
            )
            out[f"rsoc_{ga}{gb}"] = (
                math.sqrt(2.0)
                * params.g_y
                * wgt
                * _mirror_derivative_overlap(centers[ga], centers[gb], w)
            )
    out["E_Omega_y"] = out["Omega_aa"] + out["rsoc_aa"]
    return out


def e_omega_y(
    g: float,
    lam: float,
    omega: float,
    Omega: float = 1.0,
    alpha: float = 1.0 / math.sqrt(2.0),
    braided: bool = False,
) -> float:
    """E_Omega_y as a function of the bare coupling at fixed anisotropy."""
    params = build_params(omega, Omega, g, lam)
    ansatz = TwoPacketAnsatz(alpha=alpha, beta=alpha)
    return channel_energies(params, ansatz, braided=braided)["E_Omega_y"]


@dataclass
class BoundaryCurve:
    """One detected or analytic boundary: points are (lam, g) pairs."""

    kind: str  # "conventional" | "topological" | "u1_breaking"
    points: list[tuple[float, float]]
    method: str  # "analytic" | "bisection"
    residuals: list[float] = field(default_factory=list)


# Deep in the displaced phases the even/odd splitting decays like
# exp(-g_z'^2) and falls below double precision long before the coupling
# ranges of interest end, so the sign of E0_even - E0_odd is recovered by
# eigenvalue counting (Sturm/LDL pivots on the tridiagonal blocks) in
# gmpy2 multiprecision arithmetic whenever the plain difference is not
# trustworthy.

_DOUBLE_TRUST = 1e-12


def _count_below(d, e2, sigma, tiny):
    """Eigenvalues of a symmetric tridiagonal matrix strictly below sigma."""
    count = 0
    t = d[0] - sigma
    if t <= 0:
        count += 1
        if t == 0:
            t = -tiny
    for i in range(1, len(d)):
        t = (d[i] - sigma) - e2[i - 1] / t
        if t <= 0:
            count += 1
            if t == 0:
                t = -tiny
    return count


def _split_sign_hp(d_e, e_e, d_o, e_o, guess: float, scale: float, suppression: float) -> int:
    """Sign of E0_even - E0_odd by multiprecision bisection of the interval
    separating the two sector grounds; 0 means degenerate below working
    precision."""
    digits = int(suppression * 0.4343) + 40
    bits = min(int(digits * 3.33) + 64, 4096)
    ctx = gmpy2.get_context()
    old_precision = ctx.precision
    ctx.precision = bits
    try:
        tiny = gmpy2.mpfr(2) ** (-bits + 8)
        de = [gmpy2.mpfr(v) for v in d_e]
        do = [gmpy2.mpfr(v) for v in d_o]
        ee2 = [gmpy2.mpfr(v) ** 2 for v in e_e]
        eo2 = [gmpy2.mpfr(v) ** 2 for v in e_o]
        margin = gmpy2.mpfr(1e-6) * scale
        lo = gmpy2.mpfr(guess) - margin
        hi = gmpy2.mpfr(guess) + margin
        floor_width = gmpy2.mpfr(scale) * gmpy2.mpfr(2) ** (-bits + 40)
        while hi - lo > floor_width:
            mid = (lo + hi) / 2
            ce = _count_below(de, ee2, mid, tiny)
            co = _count_below(do, eo2, mid, tiny)
            if ce == 0 and co == 0:
                lo = mid
            elif ce >= 1 and co >= 1:
                hi = mid
            elif ce >= 1:
                return -1
            else:
                return +1
        return 0
    finally:
        ctx.precision = old_precision


def _split_sign(omega: float, Omega: float, lam: float, g: float, trunc: Truncation) -> int:
    """Sign of E0_even - E0_odd, valid below double-precision splittings."""
    params = build_params(omega, Omega, g, lam)
    n_max = trunc.resolve(params)
    d_e, e_e, _ = sector_tridiagonal(params, n_max, "even")
    d_o, e_o, _ = sector_tridiagonal(params, n_max, "odd")
    e0e = eigvalsh_tridiagonal(d_e, e_e, select="i", select_range=(0, 0))[0]
    e0o = eigvalsh_tridiagonal(d_o, e_o, select="i", select_range=(0, 0))[0]
    scale = max(1.0, abs(e0e), abs(e0o))
    if abs(e0e - e0o) > _DOUBLE_TRUST * scale:
        return -1 if e0e < e0o else +1
    suppression = max(params.gz_prime**2, params.gy_prime**2)
    return _split_sign_hp(d_e, e_e, d_o, e_o, min(e0e, e0o), scale, suppression)


def detect_crossings(
    params_template: ModelParams,
    lam: float,
    g_range: tuple[float, float],
    tol: float | None = None,
    coarse_steps: int = 25,
    trunc: Truncation | None = None,
) -> list[float]:
    """All couplings in g_range where the sector ground energies cross.

    Sign scan of E0_even - E0_odd on a coarse grid, refined by bisection on
    the sign; an empty list is a valid no-crossing result.  Couplings are
    absolute (same units as params_template.g), returned sorted, located to
    within ``tol`` (default 1e-6 g_s).
    """
    omega, Omega = params_template.omega, params_template.Omega
    if tol is None:
        tol = 1e-6 * params_template.g_s
    trunc = trunc or Truncation()
    lo, hi = g_range
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        raise ValueError(f"invalid g_range {g_range}")

    grid = np.linspace(lo, hi, coarse_steps)
    signs = [_split_sign(omega, Omega, lam, g, trunc) for g in grid]

    crossings: list[float] = []
    prev_g = None
    prev_sign = 0
    for g, s in zip(grid, signs):
        if s == 0:
            continue
        if prev_sign != 0 and s != prev_sign:
            a, b = prev_g, g
            while b - a > tol:
                mid = 0.5 * (a + b)
                sm = _split_sign(omega, Omega, lam, mid, trunc)
                if sm == 0 or sm == s:
                    b = mid
                else:
                    a = mid
            crossings.append(0.5 * (a + b))
        prev_g, prev_sign = g, s
    return sorted(crossings)


def detect_u1_breaking(
    params_template: ModelParams,
    lam: float,
    g_range: tuple[float, float],
    threshold: float = 1e-3,
    tol: float | None = None,
    trunc: Truncation | None = None,
) -> float | None:
    """Heuristic weak-coupling boundary where excitation-number conservation
    degrades: first coupling at which the ground-state variance of
    a^+a + sigma_x/2 exceeds ``threshold``.

    Labeled a heuristic on purpose; the indicator is smooth rather than
    sharp, and the threshold sets the reported location.
    """
    omega, Omega = params_template.omega, params_template.Omega
    if tol is None:
        tol = 1e-6 * params_template.g_s
    trunc = trunc or Truncation()

    def indicator(g: float) -> float:
        params = build_params(omega, Omega, g, lam)
        even = sector_lowest(params, trunc, "even", k=1)
        odd = sector_lowest(params, trunc, "odd", k=1)
        ground = odd if odd.energies[0] < even.energies[0] else even
        return excitation_variance(ground.state(0)) - threshold

    lo, hi = g_range
    grid = np.linspace(lo, hi, 25)
    vals = [indicator(g) for g in grid]
    for i in range(len(grid) - 1):
        if vals[i] < 0.0 <= vals[i + 1]:
            return float(brentq(indicator, grid[i], grid[i + 1], xtol=tol))
    return None


def boundaries_to_csv(curves: list[BoundaryCurve], path, params_template: ModelParams) -> None:
    """Export (kind, lambda, g_over_gs, method, residual) rows."""
    g_s = params_template.g_s
    with open(path, "w") as fh:
        fh.write("# rabiscan boundary export\n")
        fh.write(f"# omega: {params_template.omega!r} Omega: {params_template.Omega!r}\n")
        fh.write("kind,lambda,g_over_gs,method,residual\n")
        for curve in curves:
            residuals = curve.residuals or [float("nan")] * len(curve.points)
            for (lam, g), res in zip(curve.points, residuals):
                row = f"{curve.kind},{float(lam)!r},{float(g) / g_s!r},{curve.method},{float(res)!r}"
                fh.write(row + "\n")
