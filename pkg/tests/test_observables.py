import cmath
import math

import numpy as np
import pytest

from rabiscan.eigensolver import solve_point
from rabiscan.model import Truncation, build_params, parity_operator
from rabiscan.observables import (
    duality_expectation,
    duality_phases,
    evaluate,
    excitation_variance,
)

ADAPTIVE = Truncation()


def ground(omega, g, lam, Omega=1.0):
    p = build_params(omega, Omega, g, lam)
    return solve_point(p, ADAPTIVE).ground, p


def test_bare_ground_state_values():
    c, p = ground(0.5, 0.0, 1.0)
    o = evaluate(c, p)
    assert o.sigma_x == pytest.approx(-1.0, abs=1e-14)
    assert o.parity == pytest.approx(-1.0, abs=1e-14)
    assert o.a_dag_a_dag == pytest.approx(0.0, abs=1e-14)
    assert o.excitation == pytest.approx(-0.5, abs=1e-14)
    assert o.a_norm is None  # undefined at g = 0


def test_pair_amplitude_equals_half_moment_difference():
    rng = np.random.default_rng(5)
    for _ in range(6):
        c, p = ground(
            float(rng.uniform(0.1, 1.0)), float(rng.uniform(0.05, 1.0)), float(rng.uniform(-1, 1))
        )
        o = evaluate(c, p)
        assert o.a_dag_a_dag == pytest.approx(0.5 * (o.x2 - o.p2), abs=1e-9)


def test_parity_expectation_is_pure_sign_for_eigenstates():
    rng = np.random.default_rng(9)
    for _ in range(6):
        c, p = ground(
            float(rng.uniform(0.1, 1.0)), float(rng.uniform(0.05, 1.0)), float(rng.uniform(-1, 1))
        )
        o = evaluate(c, p)
        assert abs(abs(o.parity) - 1.0) < 1e-8
    P = parity_operator(12)
    assert np.array_equal(P.p, P.p_sigma * P.p_x)


def test_hidden_symmetry_factors_break_across_transition():
    gs = 0.05
    before = evaluate(*ground(0.01, 0.5 * gs, 0.5))
    after = evaluate(*ground(0.01, 1.45 * gs, 0.5))
    assert abs(before.p_x) >= 0.999 and abs(before.p_sigma) >= 0.999
    assert abs(after.p_x) <= 0.99 and abs(after.p_sigma) <= 0.99


def test_pair_amplitude_normalization_deep_isotropic():
    gs = 0.05
    o = evaluate(*ground(0.01, 2.0 * gs, 1.0))
    assert 0.8 <= o.a_norm <= 1.05


def test_pair_amplitude_antisymmetric_in_anisotropy():
    gs = 0.5 * math.sqrt(0.5)
    for lam in (0.25, 0.6, 0.9):
        a_pos = evaluate(*ground(0.5, 3.0 * gs, lam)).a_norm
        a_neg = evaluate(*ground(0.5, 3.0 * gs, -lam)).a_norm
        assert a_pos == pytest.approx(-a_neg, abs=1e-6)


def test_pair_amplitude_small_in_normal_phase():
    gs = 0.05
    o = evaluate(*ground(0.01, 0.8 * (2.0 / 1.5) * gs, 0.5))
    assert abs(o.a_norm) < 0.05


def test_duality_unitary_and_involution_identity():
    phases = duality_phases(15)
    assert np.max(np.abs(np.abs(phases) - 1.0)) == 0.0
    # applying the map twice composes to minus the parity operator
    P = parity_operator(15)
    assert np.max(np.abs(phases * phases + P.p)) == 0.0


def test_duality_anchor_is_unity_on_bare_ground_state():
    c, p = ground(0.5, 0.3 * 0.5 * math.sqrt(0.5), 0.0)  # normal-phase JCM ground
    d = duality_expectation(c, p)
    assert d == pytest.approx(1.0, abs=1e-10)


def test_duality_modulus_one_on_all_rotating_wave_eigenstates():
    gs = 0.5 * math.sqrt(0.5)
    for gfac in (0.5, 2.0, 5.0):
        c, p = ground(0.5, gfac * gs, 0.0)
        assert abs(duality_expectation(c, p)) == pytest.approx(1.0, abs=1e-8)


def test_duality_breaks_spontaneously_at_strong_anisotropy():
    gs = 0.5 * math.sqrt(0.5)
    for lam in (1.0, -1.0):
        o = evaluate(*ground(0.5, 5.0 * gs, lam))
        assert o.duality_mod < 0.9
    # continuous and sharply varying across lam=0
    mods = [evaluate(*ground(0.5, 5.0 * gs, lam)).duality_mod for lam in np.linspace(-0.2, 0.2, 9)]
    assert max(mods) == pytest.approx(mods[4], abs=1e-9)  # peak at lam = 0
    assert all(abs(a - b) < 0.6 for a, b in zip(mods, mods[1:]))


def test_excitation_conserved_only_in_rotating_wave_limit():
    gs = 0.5 * math.sqrt(0.5)
    c, p = ground(0.5, 2.5 * gs, 0.0)
    assert excitation_variance(c) < 1e-10
    n0 = ADAPTIVE.resolve(p)
    c_big = solve_point(p, Truncation(n_max=2 * n0, policy="fixed")).ground
    assert evaluate(c, p).excitation == pytest.approx(evaluate(c_big, p).excitation, abs=1e-9)
    c1, _ = ground(0.5, 2.5 * gs, 0.6)
    assert excitation_variance(c1) > 1e-3


def test_product_of_pair_amplitude_and_parity_separates_regions():
    omega = 0.1
    gs = 0.5 * math.sqrt(omega)
    lam = 0.4
    g_t1 = 2.0 * gs / math.sqrt(1.0 - lam * lam)

    def ap(lam_, g_):
        o = evaluate(*ground(omega, g_, lam_))
        return o.a_norm * o.parity

    # parity flip across the primary boundary at fixed lam
    assert ap(lam, 0.97 * g_t1) * ap(lam, 1.03 * g_t1) < 0.0
    # pair-amplitude sign flip across lam=0 above the conventional boundary
    assert ap(0.3, 2.5 * gs) * ap(-0.3, 2.5 * gs) < 0.0


def test_normalization_drift_rejected():
    c, p = ground(0.5, 0.2, 0.5)
    with pytest.raises(ValueError):
        evaluate(1.01 * c, p)


def test_duality_phase_reported_consistently():
    c, p = ground(0.5, 5.0 * 0.5 * math.sqrt(0.5), 0.0)
    o = evaluate(c, p)
    d = abs(o.duality) * cmath.exp(1j * o.duality_phase)
    assert d == pytest.approx(o.duality, abs=1e-12)
