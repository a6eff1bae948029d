"""Parameter handling: physical constants, derived quantities, run configuration.

Configuration files are flat UTF-8 text, one ``key = value`` per line, ``#``
comments. Values may carry unit suffixes (``15MPa``, ``0.5 MHz``, ``2um``)
which are converted to SI on load. Defaults describe a 2 um SonoVue-like
microbubble in water at standard conditions.
"""

from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass
from typing import Iterable


class ConfigError(ValueError):
    """Raised for unparseable files, unknown keys, or out-of-range values."""


# Multipliers for recognised unit suffixes. Bare numbers are taken as SI.
_UNIT_SCALE = {
    "Pa": 1.0, "kPa": 1e3, "MPa": 1e6, "GPa": 1e9,
    "Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9,
    "s": 1.0, "ms": 1e-3, "us": 1e-6, "μs": 1e-6, "ns": 1e-9, "ps": 1e-12,
    "m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "μm": 1e-6, "nm": 1e-9,
}

_QUANTITY_RE = re.compile(
    r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*(\S+)?\s*$"
)


def parse_quantity(text: str) -> float:
    """Parse a numeric value with an optional unit suffix into SI units."""
    try:
        return float(text)
    except (TypeError, ValueError):
        pass
    m = _QUANTITY_RE.match(text if isinstance(text, str) else "")
    if not m:
        raise ConfigError(f"not a number: {text!r}")
    value = float(m.group(1))
    suffix = m.group(2)
    if suffix is None:
        return value
    try:
        return value * _UNIT_SCALE[suffix]
    except KeyError:
        raise ConfigError(f"unknown unit suffix {suffix!r} in {text!r}") from None


def _parse_bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def parse_probes(text: str) -> tuple[tuple[float, ...], ...]:
    """Parse probe coordinates ``"x1,y1;x2,y2"`` (1D: ``"x1;x2"``)."""
    if isinstance(text, tuple):
        return text
    out = []
    for chunk in str(text).split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        coords = tuple(parse_quantity(part) for part in chunk.split(","))
        if len(coords) not in (1, 2):
            raise ConfigError(f"probe needs 1 or 2 coordinates, got {chunk!r}")
        out.append(coords)
    return tuple(out)


def format_probes(probes: Iterable[tuple[float, ...]]) -> str:
    return ";".join(",".join(f"{v:.17g}" for v in p) for p in probes)


@dataclass(frozen=True)
class PhysicalParams:
    """Material and bubble constants (SI units)."""

    rho: float = 1000.0      # liquid density [kg/m^3]
    mu: float = 8.9e-3       # dynamic viscosity [Pa s]
    sigma: float = 72.8e-3   # surface tension of water [N/m]
    sigma0: float = 0.0      # shell surface tension at rest radius [N/m]
    chi: float = 2.0         # shell elastic modulus [N/m]
    kappa: float = 1.4       # polytropic exponent of the gas core
    kappa_s: float = 2e-6    # shell surface viscosity [kg/s]
    c: float = 1500.0        # speed of sound in the liquid [m/s]
    p_v: float = 2330.0      # vapor pressure [Pa]
    p_stat: float = 1e5      # static ambient pressure [Pa]
    R0: float = 2e-6         # equilibrium bubble radius [m]
    rho0: float = 1000.0     # ambient medium density for the wave model [kg/m^3]
    n0: float = 1e14         # bubble number density [1/m^3]
    b_diff: float = 4.5e-6   # sound diffusivity b [m^2/s]
    k_coeff: float = 0.0     # pressure nonlinearity coefficient k [1/Pa]
    alpha: float = 0.5       # order of the time-fractional damping
    tau: float = 1e-12       # relaxation time of the fractional damping [s]
    delta: float = 1.0       # damping scale of the linear volume oscillator


@dataclass(frozen=True)
class DerivedParams:
    """Quantities computed from :class:`PhysicalParams`."""

    p_b: float             # liquid pressure p_v - p_stat [Pa]
    p_pgn_uncoated: float  # gas core reference pressure 2 sigma/R0 - p_b [Pa]
    p_pgn_coated: float    # gas core reference pressure 2 sigma0/R0 - p_b [Pa]
    omega0: float          # linear resonance angular frequency [rad/s]
    v0: float              # equilibrium bubble volume [m^3]
    eta: float             # mass of bubbles per unit volume rho0*n0 [kg/m^6]
    xi: float              # source strength (4/3) pi c^2 eta


def derive(params: PhysicalParams) -> DerivedParams:
    p_b = params.p_v - params.p_stat
    p_pgn_uncoated = 2.0 * params.sigma / params.R0 - p_b
    p_pgn_coated = 2.0 * params.sigma0 / params.R0 - p_b
    omega0 = math.sqrt(
        3.0 * params.kappa * params.p_stat / (params.rho0 * params.R0 ** 2)
    )
    v0 = 4.0 / 3.0 * math.pi * params.R0 ** 3
    eta = params.rho0 * params.n0
    xi = 4.0 / 3.0 * math.pi * params.c ** 2 * eta
    return DerivedParams(
        p_b=p_b,
        p_pgn_uncoated=p_pgn_uncoated,
        p_pgn_coated=p_pgn_coated,
        omega0=omega0,
        v0=v0,
        eta=eta,
        xi=xi,
    )


MODEL_NAMES = (
    "rp_simple",
    "rp_surface",
    "rpnnp",
    "rp_radiation",
    "rp_coated",
    "linear_volume",
)


@dataclass(frozen=True)
class SimulationConfig:
    """Complete run description: bubble ODE, wave grid, coupling, output."""

    params: PhysicalParams = PhysicalParams()

    # bubble run
    model: str = "rp_coated"
    volume_nonlinear: bool = False   # quadratic terms of the volume oscillator
    A: float = 0.0                   # drive pressure amplitude [Pa]
    f: float = 0.5e6                 # drive frequency [Hz]
    T: float = 2e-5                  # bubble simulation end time [s]
    lam: float = 1.75                # adaptive step exponent, dt = R^lam
    dt_min: float = 1e-13            # adaptive step clamp floor [s]
    dt_max: float = 1e-8             # adaptive step clamp ceiling [s]
    r_floor: float = 1e-9            # radius floor terminating a run [m]
    max_steps: int = 50_000_000      # step budget per bubble run
    store_stride: int = 1            # store every n-th accepted step

    # wave grid and stepper
    dim: int = 1
    Lx: float = 1.0                  # domain extent [m]
    Ly: float = 1.0
    nx: int = 401                    # node counts (>= 3 per axis)
    ny: int = 101
    T_wave: float = 2e-3             # wave simulation end time [s]
    dt_wave: float = 0.0             # wave time step [s]; 0 -> cfl*h/c
    cfl: float = 0.3
    damping: str = "strong"          # strong | fractional
    A_p: float = 1e5                 # excitation amplitude [Pa/m]
    f_p: float = 15e3                # excitation frequency [Hz]
    boundary: str = "neumann"        # neumann | dirichlet
    excite_lo: float = 0.2           # excited fraction of the left edge (2D)
    excite_hi: float = 0.8
    focus_x: float = -1.0            # focal point [m]; focus_x < 0 -> no delays
    focus_y: float = 0.5
    probes: tuple = ()
    n_snapshots: int = 0
    gamma_n: float = 0.7             # Newmark velocity weight
    beta_n: float = 0.4              # Newmark displacement weight
    newmark_tol: float = 1e-10
    newmark_max_iters: int = 20
    gamma_floor: float = 0.1         # lower bound enforced on 1 + 2 k p
    k_profile: str = ""              # CSV path with a spatial k field

    # coupling
    xi: float = -1.0                 # source strength; < 0 -> derived value
    coupled_stride: int = 1          # couple every n-th interior node

    # spectral analysis
    fft_window: str = "hann"         # hann | none
    fft_periods: int = 10            # drive periods analyzed (from the end)
    fft_n: int = 16384               # resampled points fed to the FFT

    out_dir: str = ""


# key -> (target, attribute, kind); target "p" = params, "r" = run level
_KEYS: dict[str, tuple[str, str, str]] = {
    "rho": ("p", "rho", "float"),
    "mu": ("p", "mu", "float"),
    "sigma": ("p", "sigma", "float"),
    "sigma0": ("p", "sigma0", "float"),
    "chi": ("p", "chi", "float"),
    "kappa": ("p", "kappa", "float"),
    "kappa_s": ("p", "kappa_s", "float"),
    "c": ("p", "c", "float"),
    "p_v": ("p", "p_v", "float"),
    "p_stat": ("p", "p_stat", "float"),
    "R0": ("p", "R0", "float"),
    "rho0": ("p", "rho0", "float"),
    "n0": ("p", "n0", "float"),
    "b": ("p", "b_diff", "float"),
    "k": ("p", "k_coeff", "float"),
    "alpha": ("p", "alpha", "float"),
    "tau": ("p", "tau", "float"),
    "delta": ("p", "delta", "float"),
    "model": ("r", "model", "str"),
    "volume_nonlinear": ("r", "volume_nonlinear", "bool"),
    "A": ("r", "A", "float"),
    "f": ("r", "f", "float"),
    "T": ("r", "T", "float"),
    "lambda": ("r", "lam", "float"),
    "dt_min": ("r", "dt_min", "float"),
    "dt_max": ("r", "dt_max", "float"),
    "r_floor": ("r", "r_floor", "float"),
    "max_steps": ("r", "max_steps", "int"),
    "store_stride": ("r", "store_stride", "int"),
    "dim": ("r", "dim", "int"),
    "Lx": ("r", "Lx", "float"),
    "Ly": ("r", "Ly", "float"),
    "nx": ("r", "nx", "int"),
    "ny": ("r", "ny", "int"),
    "T_wave": ("r", "T_wave", "float"),
    "dt_wave": ("r", "dt_wave", "float"),
    "cfl": ("r", "cfl", "float"),
    "damping": ("r", "damping", "str"),
    "A_p": ("r", "A_p", "float"),
    "f_p": ("r", "f_p", "float"),
    "boundary": ("r", "boundary", "str"),
    "excite_lo": ("r", "excite_lo", "float"),
    "excite_hi": ("r", "excite_hi", "float"),
    "focus_x": ("r", "focus_x", "float"),
    "focus_y": ("r", "focus_y", "float"),
    "probes": ("r", "probes", "probes"),
    "n_snapshots": ("r", "n_snapshots", "int"),
    "gamma_n": ("r", "gamma_n", "float"),
    "beta_n": ("r", "beta_n", "float"),
    "newmark_tol": ("r", "newmark_tol", "float"),
    "newmark_max_iters": ("r", "newmark_max_iters", "int"),
    "gamma_floor": ("r", "gamma_floor", "float"),
    "k_profile": ("r", "k_profile", "str"),
    "xi": ("r", "xi", "float"),
    "coupled_stride": ("r", "coupled_stride", "int"),
    "fft_window": ("r", "fft_window", "str"),
    "fft_periods": ("r", "fft_periods", "int"),
    "fft_n": ("r", "fft_n", "int"),
    "out_dir": ("r", "out_dir", "str"),
}


def config_keys() -> tuple[str, ...]:
    return tuple(_KEYS)


def _convert(key: str, raw: str):
    target, attr, kind = _KEYS[key]
    if kind == "float":
        return parse_quantity(raw)
    if kind == "int":
        value = parse_quantity(raw)
        if value != int(value):
            raise ConfigError(f"{key} must be an integer, got {raw!r}")
        return int(value)
    if kind == "bool":
        return _parse_bool(raw)
    if kind == "probes":
        return parse_probes(raw)
    return str(raw).strip()


def apply_overrides(cfg: SimulationConfig, overrides: dict[str, str]) -> SimulationConfig:
    """Return a copy of *cfg* with raw key/value overrides applied."""
    param_updates: dict[str, object] = {}
    run_updates: dict[str, object] = {}
    for key, raw in overrides.items():
        if key not in _KEYS:
            raise ConfigError(f"unknown configuration key {key!r}")
        target, attr, _ = _KEYS[key]
        try:
            value = _convert(key, raw)
        except ConfigError as exc:
            raise ConfigError(f"key {key!r}: {exc}") from None
        (param_updates if target == "p" else run_updates)[attr] = value
    params = dataclasses.replace(cfg.params, **param_updates) if param_updates else cfg.params
    return dataclasses.replace(cfg, params=params, **run_updates)


def load_config(path: str, base: SimulationConfig | None = None) -> SimulationConfig:
    """Load a flat key = value configuration file on top of defaults."""
    overrides: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line.rstrip()!r}")
            key, _, raw = stripped.partition("=")
            key = key.strip()
            raw = raw.strip()
            if key not in _KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown configuration key {key!r}")
            try:
                overrides[key] = raw
                _convert(key, raw)
            except ConfigError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return apply_overrides(base or SimulationConfig(), overrides)


def config_snapshot(cfg: SimulationConfig) -> str:
    """Serialize *cfg* -> text that load_config() restores exactly."""
    lines = []
    for key, (target, attr, kind) in _KEYS.items():
        value = getattr(cfg.params if target == "p" else cfg, attr)
        if kind == "float":
            text = f"{value:.17g}"
        elif kind == "bool":
            text = "true" if value else "false"
        elif kind == "probes":
            text = format_probes(value)
        else:
            text = str(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


def validate(cfg: SimulationConfig) -> list[str]:
    """Collect invariant violations; each names the field, value, constraint."""
    p = cfg.params
    bad: list[str] = []

    def check(ok: bool, field: str, value, constraint: str) -> None:
        if not ok:
            bad.append(f"{field} = {value!r} violates: {constraint}")

    check(p.rho > 0, "rho", p.rho, "rho > 0")
    check(p.mu >= 0, "mu", p.mu, "mu >= 0")
    check(p.sigma >= 0, "sigma", p.sigma, "sigma >= 0")
    check(p.sigma0 >= 0, "sigma0", p.sigma0, "sigma0 >= 0")
    check(p.chi >= 0, "chi", p.chi, "chi >= 0")
    check(p.kappa >= 1, "kappa", p.kappa, "kappa must be >= 1")
    check(p.kappa_s >= 0, "kappa_s", p.kappa_s, "kappa_s >= 0")
    check(p.c > 0, "c", p.c, "c > 0")
    check(p.p_v >= 0, "p_v", p.p_v, "p_v >= 0")
    check(p.p_stat > 0, "p_stat", p.p_stat, "p_stat > 0")
    check(p.R0 > 0, "R0", p.R0, "R0 > 0")
    check(p.rho0 > 0, "rho0", p.rho0, "rho0 > 0")
    check(p.n0 >= 0, "n0", p.n0, "n0 >= 0")
    check(p.b_diff >= 0, "b", p.b_diff, "b >= 0")
    check(0.0 < p.alpha <= 1.0, "alpha", p.alpha, "0 < alpha <= 1")
    check(p.tau > 0, "tau", p.tau, "tau > 0")
    check(p.delta >= 0, "delta", p.delta, "delta >= 0")

    check(cfg.model in MODEL_NAMES, "model", cfg.model, f"one of {MODEL_NAMES}")
    check(cfg.A >= 0, "A", cfg.A, "A >= 0")
    check(cfg.f > 0, "f", cfg.f, "f > 0")
    check(cfg.T > 0, "T", cfg.T, "T > 0")
    check(cfg.lam > 0, "lambda", cfg.lam, "lambda > 0")
    check(cfg.dt_min > 0, "dt_min", cfg.dt_min, "dt_min > 0")
    check(cfg.dt_max >= cfg.dt_min, "dt_max", cfg.dt_max, "dt_max >= dt_min")
    check(0 < cfg.r_floor < p.R0, "r_floor", cfg.r_floor, "0 < r_floor < R0")
    check(cfg.max_steps >= 1, "max_steps", cfg.max_steps, "max_steps >= 1")
    check(cfg.store_stride >= 1, "store_stride", cfg.store_stride, "store_stride >= 1")

    check(cfg.dim in (1, 2), "dim", cfg.dim, "dim in (1, 2)")
    check(cfg.Lx > 0, "Lx", cfg.Lx, "Lx > 0")
    check(cfg.Ly > 0, "Ly", cfg.Ly, "Ly > 0")
    check(cfg.nx >= 3, "nx", cfg.nx, "nx >= 3")
    check(cfg.ny >= 3, "ny", cfg.ny, "ny >= 3")
    check(cfg.T_wave > 0, "T_wave", cfg.T_wave, "T_wave > 0")
    check(cfg.dt_wave >= 0, "dt_wave", cfg.dt_wave, "dt_wave >= 0 (0 -> cfl*h/c)")
    check(0 < cfg.cfl <= 0.9, "cfl", cfg.cfl, "0 < cfl <= 0.9")
    check(cfg.damping in ("strong", "fractional"), "damping", cfg.damping,
          "one of ('strong', 'fractional')")
    check(cfg.A_p >= 0, "A_p", cfg.A_p, "A_p >= 0")
    check(cfg.f_p > 0, "f_p", cfg.f_p, "f_p > 0")
    check(cfg.boundary in ("neumann", "dirichlet"), "boundary", cfg.boundary,
          "one of ('neumann', 'dirichlet')")
    check(0.0 <= cfg.excite_lo < cfg.excite_hi <= 1.0, "excite_lo/excite_hi",
          (cfg.excite_lo, cfg.excite_hi), "0 <= excite_lo < excite_hi <= 1")
    check(cfg.n_snapshots >= 0, "n_snapshots", cfg.n_snapshots, "n_snapshots >= 0")
    check(0 < cfg.gamma_n <= 1, "gamma_n", cfg.gamma_n, "0 < gamma_n <= 1")
    check(0 < cfg.beta_n <= 1, "beta_n", cfg.beta_n, "0 < beta_n <= 1")
    check(cfg.newmark_tol > 0, "newmark_tol", cfg.newmark_tol, "newmark_tol > 0")
    check(cfg.newmark_max_iters >= 1, "newmark_max_iters", cfg.newmark_max_iters,
          "newmark_max_iters >= 1")
    check(0 < cfg.gamma_floor < 1, "gamma_floor", cfg.gamma_floor, "0 < gamma_floor < 1")
    check(cfg.coupled_stride >= 1, "coupled_stride", cfg.coupled_stride, "coupled_stride >= 1")
    check(cfg.fft_window in ("hann", "none"), "fft_window", cfg.fft_window,
          "one of ('hann', 'none')")
    check(cfg.fft_periods >= 1, "fft_periods", cfg.fft_periods, "fft_periods >= 1")
    check(cfg.fft_n >= 8, "fft_n", cfg.fft_n, "fft_n >= 8")

    for probe in cfg.probes:
        if cfg.dim == 1 and len(probe) != 1:
            bad.append(f"probes = {probe!r} violates: 1D probes need exactly 1 coordinate")
        if cfg.dim == 2 and len(probe) != 2:
            bad.append(f"probes = {probe!r} violates: 2D probes need exactly 2 coordinates")
    return bad


def require_valid(cfg: SimulationConfig) -> SimulationConfig:
    problems = validate(cfg)
    if problems:
        raise ConfigError("; ".join(problems))
    return cfg


def resolved_xi(cfg: SimulationConfig) -> float:
    """Source strength for coupling: explicit override or the derived value."""
    if cfg.xi >= 0:
        return cfg.xi
    return derive(cfg.params).xi
