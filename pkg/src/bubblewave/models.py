"""Bubble interface models: five Rayleigh-Plesset-type variants plus a
linearized volume oscillator.

All variants share the normal stress balance
``rho*(R*R_tt + 3/2*R_t^2) = p_interface - p_external`` and differ in which
interface effects enter the internal pressure: viscosity, surface tension,
a polytropic gas core, acoustic radiation losses, and a viscoelastic shell
with radius-dependent surface tension.
"""

from __future__ import annotations

import math
from enum import IntEnum

import numpy as np

from .config import DerivedParams, PhysicalParams, derive


class ModelKind(IntEnum):
    """Bubble model selector; integer values feed the compiled kernels."""

    RP_SIMPLE = 0      # viscous liquid only
    RP_SURFACE = 1     # + surface tension
    RPNNP = 2          # + polytropic gas core
    RP_RADIATION = 3   # + acoustic radiation damping of the gas term
    RP_COATED = 4      # + viscoelastic shell, radius-dependent tension
    LINEAR_VOLUME = 5  # second-order volume oscillator

    @classmethod
    def from_name(cls, name: str) -> "ModelKind":
        try:
            return _NAME_TO_KIND[name]
        except KeyError:
            raise ValueError(f"unknown bubble model {name!r}; "
                             f"expected one of {tuple(_NAME_TO_KIND)}") from None


_NAME_TO_KIND = {
    "rp_simple": ModelKind.RP_SIMPLE,
    "rp_surface": ModelKind.RP_SURFACE,
    "rpnnp": ModelKind.RPNNP,
    "rp_radiation": ModelKind.RP_RADIATION,
    "rp_coated": ModelKind.RP_COATED,
    "linear_volume": ModelKind.LINEAR_VOLUME,
}


def gas_reference_pressure(kind: ModelKind, params: PhysicalParams,
                           derived: DerivedParams | None = None) -> float:
    """Gas core reference pressure closing the polytropic law at R = R0.

    Coated bubbles use the shell rest tension sigma0, all others the plain
    surface tension.
    """
    d = derived if derived is not None else derive(params)
    if kind == ModelKind.RP_COATED:
        return d.p_pgn_coated
    return d.p_pgn_uncoated


def effective_surface_tension(kind: ModelKind, R, params: PhysicalParams):
    """Surface tension entering the 2*sigma/R term; radius-dependent for shells."""
    if kind == ModelKind.RP_COATED:
        return params.chi * (np.square(R) / params.R0 ** 2 - 1.0)
    return np.broadcast_to(np.asarray(params.sigma, dtype=float), np.shape(R)).copy() \
        if np.ndim(R) else params.sigma


def h0(kind: ModelKind, R, R_t, params: PhysicalParams,
       derived: DerivedParams | None = None):
    """Interface pressure balance without the external acoustic drive.

    Accepts scalars or arrays of (R, R_t); R must be positive.
    """
    kind = ModelKind(kind)
    if kind == ModelKind.LINEAR_VOLUME:
        raise ValueError("linear_volume has no interface balance; "
                         "use linear_volume_rhs")
    R = np.asarray(R, dtype=float)
    R_t = np.asarray(R_t, dtype=float)
    if np.any(R <= 0):
        raise ValueError("h0 requires R > 0")
    d = derived if derived is not None else derive(params)

    out = d.p_b - 4.0 * params.mu * R_t / R
    if kind == ModelKind.RP_SIMPLE:
        return out[()] if out.ndim == 0 else out
    out = out - 2.0 * effective_surface_tension(kind, R, params) / R
    if kind == ModelKind.RP_SURFACE:
        return out[()] if out.ndim == 0 else out
    gas = gas_reference_pressure(kind, params, d) * (params.R0 / R) ** (3.0 * params.kappa)
    if kind in (ModelKind.RP_RADIATION, ModelKind.RP_COATED):
        gas = gas * (1.0 - 3.0 * params.kappa * R_t / params.c)
    out = out + gas
    if kind == ModelKind.RP_COATED:
        out = out - 4.0 * params.kappa_s * R_t / np.square(R)
    return out[()] if out.ndim == 0 else out


def acceleration(kind: ModelKind, R, R_t, p_drive, params: PhysicalParams,
                 derived: DerivedParams | None = None):
    """Radial acceleration R_tt = (-(3/2) R_t^2 + (h0 - p_drive)/rho) / R."""
    R = np.asarray(R, dtype=float)
    R_t = np.asarray(R_t, dtype=float)
    balance = h0(kind, R, R_t, params, derived)
    out = (-1.5 * np.square(R_t) + (balance - np.asarray(p_drive, dtype=float)) / params.rho) / R
    return out[()] if np.ndim(out) == 0 else out


def linear_volume_rhs(v, v_t, p_drive, params: PhysicalParams,
                      nonlinear: bool = False, v_tt_prev=0.0,
                      derived: DerivedParams | None = None):
    """Acceleration of the volume perturbation v about the rest volume v0.

    Linear part: ``-delta*(4 mu/R0^2) v_t - omega0^2 v - (4 pi R0/rho0) p``.
    With *nonlinear*, the quadratic corrections
    ``(kappa+1) omega0^2 v^2/(2 v0) + (2 v v_tt + v_t^2)/(6 v0)`` are added,
    the v*v_tt product taken explicitly with the previous acceleration.
    """
    d = derived if derived is not None else derive(params)
    v = np.asarray(v, dtype=float)
    v_t = np.asarray(v_t, dtype=float)
    out = (-params.delta * 4.0 * params.mu / params.R0 ** 2 * v_t
           - d.omega0 ** 2 * v
           - 4.0 * math.pi * params.R0 / params.rho0 * np.asarray(p_drive, dtype=float))
    if nonlinear:
        out = out + ((params.kappa + 1.0) * d.omega0 ** 2 * np.square(v) / (2.0 * d.v0)
                     + (2.0 * v * np.asarray(v_tt_prev, dtype=float) + np.square(v_t))
                     / (6.0 * d.v0))
    return out[()] if np.ndim(out) == 0 else out


def radius_from_volume(v, params: PhysicalParams):
    """Radius corresponding to rest volume v0 plus perturbation v."""
    v0 = 4.0 / 3.0 * math.pi * params.R0 ** 3
    total = np.maximum(v0 + np.asarray(v, dtype=float), 0.0)
    return np.cbrt(total * 3.0 / (4.0 * math.pi))


def lipschitz_sample(kind: ModelKind, band: tuple[float, float, float],
                     n_pairs: int, params: PhysicalParams,
                     seed: int = 0) -> np.ndarray:
    """Sampled Lipschitz ratios of h0 over a state band.

    *band* is (R_low, R_high, V); states are drawn uniformly from
    [R_low, R_high] x [-V, V] and the ratio
    ``|h0(s1) - h0(s2)| / (|dR| + |dR_t|)`` recorded per pair.
    """
    r_lo, r_hi, v_max = band
    if not (0 < r_lo < r_hi) or v_max < 0:
        raise ValueError("band must satisfy 0 < R_low < R_high and V >= 0")
    rng = np.random.default_rng(seed)
    R1 = rng.uniform(r_lo, r_hi, n_pairs)
    R2 = rng.uniform(r_lo, r_hi, n_pairs)
    V1 = rng.uniform(-v_max, v_max, n_pairs)
    V2 = rng.uniform(-v_max, v_max, n_pairs)
    num = np.abs(h0(kind, R1, V1, params) - h0(kind, R2, V2, params))
    den = np.abs(R1 - R2) + np.abs(V1 - V2)
    good = den > 0
    return num[good] / den[good]
