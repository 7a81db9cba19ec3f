"""Potentials, phase functions and the reduced 2x2 potential k."""

from __future__ import annotations

import numpy as np
import pytest
from scipy import integrate

from bhscatter.errors import ConfigError, UnsupportedError
from bhscatter.geometry import BlackHoleParams, build_rw_map, horizon_data, metric_function
from bhscatter.jost import decay_rate
from bhscatter.reduction import (
    GAMMA0,
    GAMMA1,
    GAMMA2,
    FieldParams,
    HarmonicWeight,
    ReducedPotential,
    assemble_W,
    beta_constant,
    potential_profile,
    w_squared_integrals,
)

from oracle_values import BETA

DS_SETS = [BlackHoleParams(1.0, 0.5, 0.05), BlackHoleParams(2.0, 1.2, 0.01)]
RN_SETS = [BlackHoleParams(5.0, 3.0, 0.0), BlackHoleParams(1.0, 0.5, 0.0)]


def x_space_integral(profile, func, lo, hi):
    """Adaptive quadrature of func(profile, x) over [lo, hi] in x."""
    pts = np.linspace(lo, hi, 41)
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        total += integrate.quad(lambda x: float(func(profile, np.array([x]))[0]), a, b,
                                epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    return total


# ---------------------------------------------------------------------------
# Field and weight types
# ---------------------------------------------------------------------------

def test_weight_from_half_integer_l():
    assert HarmonicWeight.from_l(0.5).w == 1
    assert HarmonicWeight.from_l(2.5).w == 3


@pytest.mark.parametrize("w", [0, -1, 1.5])
def test_invalid_weight(w):
    with pytest.raises(ConfigError):
        HarmonicWeight(w)


def test_negative_field_mass_rejected():
    with pytest.raises(ConfigError):
        FieldParams(-0.1, 1.0)


# ---------------------------------------------------------------------------
# Phase functions
# ---------------------------------------------------------------------------

def test_beta_against_x_space_oracle(ds_profiles):
    assert ds_profiles[1].beta == pytest.approx(BETA, abs=1e-9)
    assert beta_constant(ds_profiles[2]) == pytest.approx(BETA, abs=1e-9)


def test_beta_vanishes_without_coupling(ds_map):
    assert beta_constant(potential_profile(ds_map, FieldParams(0.2, 0.0), 1)) == 0.0
    m0 = build_rw_map(BlackHoleParams(1.0, 0.0, 0.05))
    assert beta_constant(potential_profile(m0, FieldParams(0.2, 1.0), 1)) == 0.0


def test_phase_derivative_is_electric_potential(ds_profiles, rn_profiles):
    x = np.linspace(-50.0, 100.0, 11)
    d = 1e-5
    for prof in (ds_profiles[1], rn_profiles[1]):
        fd = (prof.phase_C_minus(x + d) - prof.phase_C_minus(x - d)) / (2 * d)
        np.testing.assert_allclose(fd, prof.c(x), atol=1e-6)


def test_phase_limits(ds_profiles):
    prof = ds_profiles[1]
    assert prof.phase_C_minus(np.array([-150.0]))[0] == pytest.approx(prof.c0 * -150.0, abs=1e-10)
    right = prof.phase_C_minus(np.array([400.0]))[0]
    assert right == pytest.approx(prof.c_plus * 400.0 + prof.beta, abs=1e-10)


# ---------------------------------------------------------------------------
# Reduced potential
# ---------------------------------------------------------------------------

def test_k_times_adjoint_is_scalar(ds_profiles):
    prof = ds_profiles[2]
    x = np.linspace(-100.0, 300.0, 2001)
    k = prof.reduced_k(x)
    kk = k @ np.conj(np.swapaxes(k, -1, -2))
    w2 = prof.w_squared(x)
    assert np.max(np.abs(kk - w2[:, None, None] * np.eye(2))) < 1e-12
    np.testing.assert_allclose(np.abs(np.linalg.det(k)), w2, atol=1e-14)


def test_full_potential_anticommutes_with_gamma1(ds_profiles):
    k = ds_profiles[1].reduced_k(np.linspace(-20.0, 20.0, 9))
    W = assemble_W(k)
    assert np.max(np.abs(GAMMA1 @ W + W @ GAMMA1)) < 1e-15


def test_dirac_matrices_anticommute():
    for a, b in ((GAMMA0, GAMMA1), (GAMMA0, GAMMA2), (GAMMA1, GAMMA2)):
        assert np.max(np.abs(a @ b + b @ a)) < 1e-15
    for g in (GAMMA0, GAMMA1, GAMMA2):
        np.testing.assert_allclose(g @ g, np.eye(4), atol=1e-15)


def test_rn_potential_at_anchor(rn_profiles, rn_params):
    a = rn_profiles[1].a(np.array([0.0]))[0]
    assert a * a == pytest.approx(metric_function(rn_params, 18.0) / 324.0, rel=1e-12)


def test_phase_consistency_of_k(ds_profiles):
    prof = ds_profiles[1]
    x = np.linspace(-60.0, 150.0, 301)
    stripped = prof.reduced_k(x) * np.exp(-2j * prof.phase_C_minus(x))[:, None, None]
    ang = np.angle(stripped[:, 0, 1] / stripped[0, 0, 1])
    assert np.max(np.abs(ang)) < 1e-12


def test_decay_rate_of_k(ds_potentials):
    h = horizon_data(BlackHoleParams(1.0, 0.5, 0.05))
    rate = decay_rate(ds_potentials[1])
    assert rate >= 0.9 * min(h.kappa_0, abs(h.kappa_plus))


def test_truncated_tails_are_small(ds_profiles, ds_potentials):
    pot = ds_potentials[1]
    prof = ds_profiles[1]
    left = integrate.quad(lambda x: np.sqrt(prof.w_squared(np.array([x]))[0]),
                          pot.x_min - 300, pot.x_min, limit=200)[0]
    right = integrate.quad(lambda x: np.sqrt(prof.w_squared(np.array([x]))[0]),
                           pot.x_max, pot.x_max + 600, limit=200)[0]
    assert left + right < 1e-12


def test_tail_cut_needs_de_sitter(rn_profiles):
    with pytest.raises(UnsupportedError):
        rn_profiles[1].tail_cut()


def test_zero_and_scaled_potentials(ds_potentials):
    z = ReducedPotential.zero(-1.0, 1.0)
    assert z.is_zero and np.all(z.k(np.linspace(-2, 2, 5)) == 0)
    pot = ds_potentials[1]
    x = np.linspace(-10.0, 10.0, 5)
    np.testing.assert_allclose(pot.scaled(0.1).k(x), 0.1 * pot.k(x), rtol=1e-15)


# ---------------------------------------------------------------------------
# Integrals of W^2 against their closed forms
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("params", DS_SETS, ids=["set_a", "set_b"])
@pytest.mark.parametrize("w", [1, 2, 3])
def test_w_squared_integral_de_sitter(params, w):
    m_f = 0.2
    rw = build_rw_map(params)
    h = rw.horizon
    prof = potential_profile(rw, FieldParams(m_f, 1.0), w)
    closed = w * w * (1 / h.r_0 - 1 / h.r_plus) + m_f**2 * (h.r_plus - h.r_0)
    assert w_squared_integrals(prof).total == pytest.approx(closed, rel=1e-10)
    lo, hi = prof.tail_cut(1e-14)
    numeric = x_space_integral(prof, lambda p, x: p.w_squared(x), lo, hi)
    assert numeric == pytest.approx(closed, rel=1e-6)


@pytest.mark.parametrize("params", RN_SETS, ids=["set_a", "set_b"])
@pytest.mark.parametrize("w", [1, 2, 3])
def test_a_squared_integral_flat(params, w):
    rw = build_rw_map(params)
    h = rw.horizon
    prof = potential_profile(rw, FieldParams(0.0, 1.0), w)
    ints = w_squared_integrals(prof)
    assert ints.a_sq == pytest.approx(w * w / h.r_0, rel=1e-10)
    assert ints.reconstruction_constant == pytest.approx(w * w / h.r_0, rel=1e-10)
    # x-space quadrature over the tabulated range plus the exact r-space tail
    lo, hi = rw.x_min, rw.x_max
    numeric = x_space_integral(prof, lambda p, x: p.a(x) ** 2, lo, hi)
    numeric += w * w / float(rw.r_of_x(hi))
    assert numeric == pytest.approx(w * w / h.r_0, rel=1e-6)


def test_total_unavailable_for_flat_space(rn_profiles):
    with pytest.raises(UnsupportedError):
        w_squared_integrals(rn_profiles[1]).total
