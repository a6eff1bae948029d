"""Bubble interface-model tests.

Every expected value here is recomputed inline from the closed-form
definitions, never by calling the function under test twice.
"""

import math

import numpy as np
import pytest

from bubblewave.config import PhysicalParams, derive
from bubblewave.models import (
    ModelKind,
    acceleration,
    effective_surface_tension,
    gas_reference_pressure,
    h0,
    linear_volume_rhs,
    lipschitz_sample,
    radius_from_volume,
)

P = PhysicalParams()
D = derive(P)

RADIAL_KINDS = (
    ModelKind.RP_SIMPLE,
    ModelKind.RP_SURFACE,
    ModelKind.RPNNP,
    ModelKind.RP_RADIATION,
    ModelKind.RP_COATED,
)


# --------------------------------------------------------------------------
# naming and selectors


def test_model_names_round_trip():
    names = ["rp_simple", "rp_surface", "rpnnp", "rp_radiation", "rp_coated",
             "linear_volume"]
    kinds = [ModelKind.from_name(n) for n in names]
    assert [int(k) for k in kinds] == [0, 1, 2, 3, 4, 5]


def test_from_name_rejects_unknown():
    with pytest.raises(ValueError, match="keller"):
        ModelKind.from_name("keller")


def test_gas_reference_pressure_selection():
    assert gas_reference_pressure(ModelKind.RP_COATED, P) == 97670.0
    for kind in (ModelKind.RPNNP, ModelKind.RP_RADIATION):
        assert gas_reference_pressure(kind, P) == 170470.0


def test_effective_surface_tension():
    # plain interfaces: the constant water value
    assert effective_surface_tension(ModelKind.RPNNP, 3e-6, P) == P.sigma
    # shell: chi*(R^2/R0^2 - 1), zero at rest, 3*chi at R = 2 R0
    assert effective_surface_tension(ModelKind.RP_COATED, P.R0, P) == 0.0
    assert effective_surface_tension(ModelKind.RP_COATED, 2 * P.R0, P) == \
        pytest.approx(3.0 * P.chi, rel=1e-15)


# --------------------------------------------------------------------------
# interface balance h0: each variant against its closed form


def test_h0_viscous_only():
    R, R_t = 1.7e-6, 0.35
    assert h0(ModelKind.RP_SIMPLE, R, R_t, P) == \
        pytest.approx(D.p_b - 4.0 * P.mu * R_t / R, rel=1e-15)


def test_h0_surface_tension_term():
    R, R_t = 2.4e-6, -1.2
    diff = h0(ModelKind.RP_SURFACE, R, R_t, P) - h0(ModelKind.RP_SIMPLE, R, R_t, P)
    assert diff == pytest.approx(-2.0 * P.sigma / R, rel=1e-12)


def test_h0_gas_core_term():
    R, R_t = 1.1e-6, 2.0
    diff = h0(ModelKind.RPNNP, R, R_t, P) - h0(ModelKind.RP_SURFACE, R, R_t, P)
    expected = D.p_pgn_uncoated * (P.R0 / R) ** (3.0 * P.kappa)
    assert diff == pytest.approx(expected, rel=1e-12)


def test_h0_radiation_term():
    R, R_t = 1.1e-6, 2.0
    diff = h0(ModelKind.RP_RADIATION, R, R_t, P) - h0(ModelKind.RPNNP, R, R_t, P)
    gas = D.p_pgn_uncoated * (P.R0 / R) ** (3.0 * P.kappa)
    assert diff == pytest.approx(-gas * 3.0 * P.kappa * R_t / P.c, rel=1e-9)


def test_h0_coated_full_closed_form():
    R, R_t = 2.9e-6, -0.75
    expected = (
        D.p_b
        - 4.0 * P.mu * R_t / R
        - 2.0 * P.chi * (R**2 / P.R0**2 - 1.0) / R
        + D.p_pgn_coated * (P.R0 / R) ** (3.0 * P.kappa)
        * (1.0 - 3.0 * P.kappa * R_t / P.c)
        - 4.0 * P.kappa_s * R_t / R**2
    )
    assert h0(ModelKind.RP_COATED, R, R_t, P) == pytest.approx(expected, rel=1e-14)


def test_h0_rejects_bad_input():
    with pytest.raises(ValueError):
        h0(ModelKind.RPNNP, -1e-6, 0.0, P)
    with pytest.raises(ValueError, match="linear_volume_rhs"):
        h0(ModelKind.LINEAR_VOLUME, 2e-6, 0.0, P)


def test_h0_array_matches_scalar():
    rng = np.random.default_rng(11)
    R = rng.uniform(0.5e-6, 5e-6, 40)
    R_t = rng.uniform(-5.0, 5.0, 40)
    for kind in RADIAL_KINDS:
        batch = h0(kind, R, R_t, P)
        singles = np.array([h0(kind, r, v, P) for r, v in zip(R, R_t)])
        # vectorized pow may differ from the scalar path by <1 ulp
        np.testing.assert_allclose(batch, singles, rtol=1e-13, atol=0.0)


# --------------------------------------------------------------------------
# equilibrium


@pytest.mark.parametrize("kind", [ModelKind.RPNNP, ModelKind.RP_RADIATION,
                                  ModelKind.RP_COATED])
def test_gas_models_balance_exactly_at_rest(kind):
    # The reference pressure is defined so the rest state is a fixed point;
    # the cancellation is exact in floating point, not merely small.
    assert h0(kind, P.R0, 0.0, P) == 0.0
    assert acceleration(kind, P.R0, 0.0, 0.0, P) == 0.0


@pytest.mark.parametrize("kind", [ModelKind.RP_SIMPLE, ModelKind.RP_SURFACE])
def test_gasless_models_collapse_from_rest(kind):
    # Without a gas core nothing balances the static pressure deficit.
    assert acceleration(kind, P.R0, 0.0, 0.0, P) < 0.0


def test_acceleration_closed_form():
    R, R_t, p = 1.5e-6, 3.0, 2.5e5
    balance = (D.p_b - 4.0 * P.mu * R_t / R - 2.0 * P.sigma / R
               + D.p_pgn_uncoated * (P.R0 / R) ** (3.0 * P.kappa))
    expected = (-1.5 * R_t**2 + (balance - p) / P.rho) / R
    assert acceleration(ModelKind.RPNNP, R, R_t, p, P) == \
        pytest.approx(expected, rel=1e-13)


def test_positive_drive_pushes_inward():
    # At rest, raising the external pressure must accelerate the wall inward.
    for kind in (ModelKind.RPNNP, ModelKind.RP_RADIATION, ModelKind.RP_COATED):
        assert acceleration(kind, P.R0, 0.0, 1e4, P) < 0.0
        assert acceleration(kind, P.R0, 0.0, -1e4, P) > 0.0


# --------------------------------------------------------------------------
# linearized volume oscillator


def test_volume_rhs_linear_closed_form():
    v, v_t, p = 2e-18, -4e-13, 1.3e4
    expected = (-P.delta * 4.0 * P.mu / P.R0**2 * v_t
                - D.omega0**2 * v
                - 4.0 * math.pi * P.R0 / P.rho0 * p)
    assert linear_volume_rhs(v, v_t, p, P) == pytest.approx(expected, rel=1e-14)


def test_volume_rhs_rest_is_fixed_point():
    assert linear_volume_rhs(0.0, 0.0, 0.0, P) == 0.0


def test_volume_rhs_nonlinear_corrections():
    v, v_t, p, a_prev = 3e-18, 5e-13, 0.0, 2e-7
    linear = linear_volume_rhs(v, v_t, p, P)
    full = linear_volume_rhs(v, v_t, p, P, nonlinear=True, v_tt_prev=a_prev)
    extra = ((P.kappa + 1.0) * D.omega0**2 * v**2 / (2.0 * D.v0)
             + (2.0 * v * a_prev + v_t**2) / (6.0 * D.v0))
    assert full - linear == pytest.approx(extra, rel=1e-9)


def test_volume_rhs_damping_scales_with_delta():
    import dataclasses
    weak = dataclasses.replace(P, delta=1e-3)
    v_t = 1e-12
    # only the v_t term survives; it must scale linearly with delta
    full = linear_volume_rhs(0.0, v_t, 0.0, P)
    scaled = linear_volume_rhs(0.0, v_t, 0.0, weak)
    assert scaled == pytest.approx(full * 1e-3, rel=1e-12)


def test_radius_from_volume():
    assert radius_from_volume(0.0, P) == pytest.approx(P.R0, rel=1e-14)
    assert radius_from_volume(7.0 * D.v0, P) == pytest.approx(2.0 * P.R0, rel=1e-14)
    # total volume is clamped at zero rather than going imaginary
    assert radius_from_volume(-2.0 * D.v0, P) == 0.0


def test_radius_volume_round_trip():
    rng = np.random.default_rng(5)
    for _ in range(25):
        R = rng.uniform(0.2e-6, 6e-6)
        v = 4.0 / 3.0 * math.pi * R**3 - D.v0
        assert radius_from_volume(v, P) == pytest.approx(R, rel=1e-12)


# --------------------------------------------------------------------------
# sampled Lipschitz ratios


def test_lipschitz_sample_reproducible_and_finite():
    band = (0.5 * P.R0, 2.0 * P.R0, 5.0)
    a = lipschitz_sample(ModelKind.RP_COATED, band, 200, P, seed=3)
    b = lipschitz_sample(ModelKind.RP_COATED, band, 200, P, seed=3)
    np.testing.assert_array_equal(a, b)
    assert np.all(np.isfinite(a)) and np.all(a >= 0.0)
    c = lipschitz_sample(ModelKind.RP_COATED, band, 200, P, seed=4)
    assert not np.array_equal(a, c)


def test_lipschitz_sample_constant_balance_is_zero():
    # With zero viscosity the viscous-only balance is the constant p_b, so
    # every sampled ratio must vanish.
    import dataclasses
    inviscid = dataclasses.replace(P, mu=0.0)
    ratios = lipschitz_sample(ModelKind.RP_SIMPLE, (1e-6, 4e-6, 3.0), 100,
                              inviscid, seed=1)
    assert np.all(ratios == 0.0)


def test_lipschitz_sample_validates_band():
    with pytest.raises(ValueError):
        lipschitz_sample(ModelKind.RPNNP, (2e-6, 1e-6, 1.0), 10, P)
    with pytest.raises(ValueError):
        lipschitz_sample(ModelKind.RPNNP, (0.0, 1e-6, 1.0), 10, P)
