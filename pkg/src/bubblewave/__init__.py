"""Ultrasound-microbubble simulation toolkit.

Single-bubble Rayleigh-Plesset-type dynamics with adaptive RK4 stepping, a
finite-difference solver for a nonlinear strongly or fractionally damped
wave equation, one-way and two-way coupling between the two, and spectral
analysis of the results.
"""

from .analysis import (
    ConvergenceStudy,
    HarmonicMetrics,
    Spectrum,
    bubble_spectrum,
    convergence_order,
    fft_spectrum,
    fit_order,
    harmonic_metrics,
    slope_crest,
    waveform_skewness,
)
from .config import (
    ConfigError,
    DerivedParams,
    PhysicalParams,
    SimulationConfig,
    apply_overrides,
    config_snapshot,
    derive,
    load_config,
    parse_quantity,
    validate,
)
from .coupling import (
    CoupledResult,
    CouplingError,
    OneWayResult,
    bubble_source,
    run_coupled,
    run_one_way,
)
from .fractional import (
    FractionalHistory,
    caputo_derivative,
    fractional_integral,
    l1_weights,
)
from .models import ModelKind, acceleration, h0, linear_volume_rhs
from .ode import (
    BubbleTrajectory,
    PressureDrive,
    UniformSeries,
    adaptive_dt,
    resample_uniform,
    rk4_step,
    simulate_bubble,
)
from .wave import (
    CorrectorError,
    Grid,
    NondegeneracyError,
    NumericalError,
    WaveResult,
    WaveStepper,
    build_grid,
    run_wave,
)

__version__ = "0.1.0"

__all__ = [
    "BubbleTrajectory",
    "ConfigError",
    "ConvergenceStudy",
    "CorrectorError",
    "CoupledResult",
    "CouplingError",
    "DerivedParams",
    "FractionalHistory",
    "Grid",
    "HarmonicMetrics",
    "ModelKind",
    "NondegeneracyError",
    "NumericalError",
    "OneWayResult",
    "PhysicalParams",
    "PressureDrive",
    "SimulationConfig",
    "Spectrum",
    "UniformSeries",
    "WaveResult",
    "WaveStepper",
    "acceleration",
    "adaptive_dt",
    "apply_overrides",
    "bubble_source",
    "bubble_spectrum",
    "build_grid",
    "caputo_derivative",
    "config_snapshot",
    "convergence_order",
    "derive",
    "fft_spectrum",
    "fit_order",
    "fractional_integral",
    "h0",
    "harmonic_metrics",
    "l1_weights",
    "linear_volume_rhs",
    "load_config",
    "parse_quantity",
    "resample_uniform",
    "rk4_step",
    "run_coupled",
    "run_one_way",
    "run_wave",
    "simulate_bubble",
    "slope_crest",
    "validate",
    "waveform_skewness",
    "__version__",
]
