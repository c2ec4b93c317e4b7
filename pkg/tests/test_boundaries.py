import math

import numpy as np
import pytest
from scipy.linalg import eigvalsh_tridiagonal
from scipy.optimize import brentq

from oracles import mirror_derivative_overlap_quad, mirror_overlap_quad
from rabiscan.boundaries import (
    BoundaryCurve,
    TwoPacketAnsatz,
    _count_below,
    boundaries_to_csv,
    channel_energies,
    detect_crossings,
    detect_u1_breaking,
    e_omega_y,
    g_T1,
    g_c,
    lambda_T1,
)
from rabiscan.model import build_params

import gmpy2


def template(omega):
    return build_params(omega, 1.0, 0.0, 0.0)


# --- closed forms ---------------------------------------------------------------


def test_conventional_boundary_values():
    t = template(0.01)
    assert g_c(1.0, t) == pytest.approx(t.g_s)
    assert g_c(0.0, t) == pytest.approx(2.0 * t.g_s)
    assert g_c(-0.5, t) == pytest.approx(4.0 / 3.0 * t.g_s)


def test_primary_boundary_values_and_divergence():
    t = template(0.5)
    assert g_T1(0.0, t) == pytest.approx(2.0 * t.g_s)
    assert g_T1(0.8, t) == pytest.approx(2.0 * t.g_s / 0.6)
    assert math.isinf(g_T1(1.0, t))
    with pytest.raises(ValueError):
        g_T1(1.2, t)


def test_boundary_inversion_is_exact():
    t = template(0.5)
    assert lambda_T1(2.0 * t.g_s, t) == pytest.approx(0.0, abs=1e-12)
    for lam in (0.2, 0.5, 0.9):
        assert lambda_T1(g_T1(lam, t), t) == pytest.approx(lam, rel=1e-12)
    with pytest.raises(ValueError):
        lambda_T1(1.9 * t.g_s, t)


# --- channel energies -------------------------------------------------------------


def test_gaussian_channel_overlaps_match_quadrature():
    p = build_params(0.5, 1.0, 3.0 * template(0.5).g_s, 0.7)
    x0 = p.gz_prime
    ch = channel_energies(p, TwoPacketAnsatz(alpha=1.0, beta=1.0))
    # opposite-side overlap exp(-x0^2), same-side overlap 1
    assert ch["Omega_aa"] == pytest.approx(-0.5 * mirror_overlap_quad(-x0, -x0), rel=1e-9)
    assert ch["Omega_ab"] == pytest.approx(-0.5 * mirror_overlap_quad(-x0, +x0), rel=1e-9)
    target = math.sqrt(2.0) * p.g_y * mirror_derivative_overlap_quad(-x0, -x0)
    assert ch["rsoc_aa"] == pytest.approx(target, rel=1e-6)


def test_isotropic_limit_has_no_channel_root():
    p = build_params(0.5, 1.0, 2.0 * template(0.5).g_s, 1.0)
    ch = channel_energies(p)
    assert p.g_y == 0.0
    assert ch["rsoc_aa"] == 0.0
    assert ch["E_Omega_y"] < 0.0
    after = channel_energies(p, braided=True)
    assert after["E_Omega_y"] > 0.0
    assert after["Omega_ab"] == pytest.approx(ch["Omega_ab"])  # same-side untouched


@pytest.mark.parametrize("lam", [0.0, 0.3, 0.7])
def test_channel_root_reproduces_primary_boundary(lam):
    t = template(0.5)
    root = brentq(
        lambda g: e_omega_y(g, lam, 0.5),
        0.5 * t.g_s,
        6.0 * t.g_s,
        xtol=1e-16,
        rtol=8.9e-16,
    )
    assert abs(root - g_T1(lam, t)) / g_T1(lam, t) < 1e-12


# --- crossing detection -------------------------------------------------------------


def test_multiprecision_eigenvalue_count_matches_lapack():
    rng = np.random.default_rng(2)
    for _ in range(10):
        n = 30
        d = rng.normal(size=n)
        e = rng.normal(size=n - 1)
        sigma = float(rng.normal())
        ev = eigvalsh_tridiagonal(d, e)
        expected = int(np.sum(ev < sigma))
        ctx = gmpy2.get_context()
        old = ctx.precision
        ctx.precision = 128
        try:
            got = _count_below(
                [gmpy2.mpfr(v) for v in d],
                [gmpy2.mpfr(v) ** 2 for v in e],
                gmpy2.mpfr(sigma),
                gmpy2.mpfr(2) ** -100,
            )
        finally:
            ctx.precision = old
        assert got == expected


def test_first_crossing_matches_formula_at_moderate_frequency():
    t = template(0.1)
    crossings = detect_crossings(t, 0.6, (2.0 * t.g_s, 4.0 * t.g_s))
    assert crossings
    assert abs(crossings[0] - 2.5 * t.g_s) / (2.5 * t.g_s) < 0.05


def test_first_crossing_frequency_independent():
    lam = 0.6
    firsts = []
    for omega in (0.1, 0.5):
        t = template(omega)
        crossings = detect_crossings(t, lam, (2.0 * t.g_s, 4.0 * t.g_s))
        firsts.append(crossings[0] / t.g_s)
    assert abs(firsts[0] - firsts[1]) / firsts[1] < 0.05


def test_isotropic_model_never_crosses():
    t = template(0.5)
    assert detect_crossings(t, 1.0, (0.5 * t.g_s, 6.0 * t.g_s)) == []


def test_crossing_is_a_gap_minimum():
    from rabiscan.eigensolver import gap
    from rabiscan.model import Truncation

    t = template(0.5)
    lam = 0.6
    g_star = detect_crossings(t, lam, (2.0 * t.g_s, 3.0 * t.g_s))[0]
    tr = Truncation()
    mid = gap(build_params(0.5, 1.0, g_star, lam), tr)
    away = gap(build_params(0.5, 1.0, g_star + 0.05 * t.g_s, lam), tr)
    assert mid < 1e-5
    assert mid < away


def test_crossing_count_grows_as_frequency_drops():
    lam = 0.5
    counts = []
    for omega in (0.5, 0.25):
        t = template(omega)
        counts.append(len(detect_crossings(t, lam, (2.0 * t.g_s, 5.5 * t.g_s), coarse_steps=40)))
    assert counts[1] >= counts[0]


def test_invalid_range_rejected():
    t = template(0.5)
    with pytest.raises(ValueError):
        detect_crossings(t, 0.5, (2.0, 1.0))


# --- U(1) heuristic ------------------------------------------------------------------


def test_u1_indicator_silent_in_rotating_wave_limit():
    t = template(0.5)
    assert detect_u1_breaking(t, 0.0, (0.05 * t.g_s, 1.9 * t.g_s)) is None


def test_u1_threshold_found_below_conventional_boundary():
    t = template(0.5)
    g_star = detect_u1_breaking(t, 0.3, (0.05 * t.g_s, 2.0 * t.g_s))
    assert g_star is not None
    assert g_star < g_c(0.3, t)


# --- export ---------------------------------------------------------------------------


def test_boundary_csv_schema(tmp_path):
    t = template(0.5)
    curves = [
        BoundaryCurve(kind="topological", points=[(0.6, 2.5 * t.g_s)], method="bisection",
                      residuals=[1e-6 * t.g_s]),
        BoundaryCurve(kind="conventional", points=[(0.6, g_c(0.6, t))], method="analytic"),
    ]
    path = tmp_path / "b.csv"
    boundaries_to_csv(curves, path, t)
    lines = path.read_text().strip().splitlines()
    assert lines[2] == "kind,lambda,g_over_gs,method,residual"
    first = lines[3].split(",")
    assert first[0] == "topological"
    assert float(first[2]) == pytest.approx(2.5)
    assert lines[4].startswith("conventional,")
