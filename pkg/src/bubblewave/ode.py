"""Adaptive bubble ODE integration.

Classical RK4 on the first-order system (R, R_t) with the radius-dependent
step law dt = R^lambda (R in meters), clamped to [dt_min, dt_max]. Runs are
guarded every step: radius floor, non-finite states, and a step budget all
terminate cleanly with the reason recorded. Driven by an analytic sinusoid
or by a uniformly sampled pressure trace with linear interpolation; trace
drives truncate steps at sample times so every step sees a smooth drive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .config import PhysicalParams, SimulationConfig, derive
from .models import ModelKind, acceleration, gas_reference_pressure, linear_volume_rhs

TERMINATION_NAMES = {
    _kernels.TERM_COMPLETED: "completed",
    _kernels.TERM_RADIUS_FLOOR: "radius_floor",
    _kernels.TERM_STEP_FLOOR: "step_floor",
    _kernels.TERM_NONFINITE: "nonfinite",
}

_MODE_CODES = {"quiet": _kernels.DRIVE_QUIET,
               "sine": _kernels.DRIVE_SINE,
               "trace": _kernels.DRIVE_TABLE}


@dataclass(frozen=True)
class PressureDrive:
    """Acoustic pressure at the bubble: none, a sinusoid, or a sampled trace."""

    mode: str = "quiet"
    amplitude: float = 0.0
    frequency: float = 1e6
    t0: float = 0.0
    dt: float = 1.0
    values: np.ndarray = field(default_factory=lambda: np.zeros(2))

    @classmethod
    def quiet(cls) -> "PressureDrive":
        return cls(mode="quiet")

    @classmethod
    def sine(cls, amplitude: float, frequency: float) -> "PressureDrive":
        if frequency <= 0:
            raise ValueError("drive frequency must be positive")
        return cls(mode="sine", amplitude=float(amplitude), frequency=float(frequency))

    @classmethod
    def from_samples(cls, t0: float, dt: float, values: np.ndarray) -> "PressureDrive":
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("trace drive needs a 1D array of >= 2 samples")
        if dt <= 0:
            raise ValueError("trace sample spacing must be positive")
        return cls(mode="trace", t0=float(t0), dt=float(dt), values=values)

    def __call__(self, t):
        """Evaluate the drive; arithmetic matches the compiled kernels."""
        if self.mode == "quiet":
            return np.zeros_like(np.asarray(t, dtype=float))[()] if np.ndim(t) else 0.0
        if self.mode == "sine":
            out = self.amplitude * np.sin(2.0 * math.pi * self.frequency *
                                          np.asarray(t, dtype=float))
            return out[()] if np.ndim(out) == 0 else out
        s = (np.asarray(t, dtype=float) - self.t0) / self.dt
        j = np.clip(np.floor(s).astype(np.int64), 0, self.values.size - 2)
        w = s - j
        out = self.values[j] + w * (self.values[j + 1] - self.values[j])
        return out[()] if np.ndim(out) == 0 else out

    def end_time(self) -> float:
        if self.mode == "trace":
            return self.t0 + self.dt * (self.values.size - 1)
        return math.inf


@dataclass(frozen=True)
class BubbleTrajectory:
    """Stored (t, R, R_t) samples of one bubble run plus run monitors."""

    times: np.ndarray
    radii: np.ndarray
    velocities: np.ndarray
    termination: str
    n_steps: int
    min_radius: float
    max_radius: float
    dt_smallest: float   # smallest adaptive step taken (after clamping)
    dt_largest: float
    model: str


def adaptive_dt(R: float, lam: float, dt_min: float = 1e-13,
                dt_max: float = 1e-8) -> float:
    """Radius-controlled step: R^lam clamped to [dt_min, dt_max]."""
    if R <= 0:
        raise ValueError("adaptive_dt requires R > 0")
    return min(max(R ** lam, dt_min), dt_max)


def rk4_step(kind: ModelKind, state: tuple[float, float], t: float, dt: float,
             params: PhysicalParams, drive, derived=None,
             nonlinear: bool = False, a_prev: float = 0.0):
    """One classical RK4 step of the bubble system; reference implementation.

    For radial models *state* is (R, R_t); for the volume oscillator it is
    (v, v_t) and the quadratic v*v_tt term uses *a_prev*.
    """
    kind = ModelKind(kind)
    y1, y2 = state
    if kind == ModelKind.LINEAR_VOLUME:
        def rhs(ys, vs, ts):
            return linear_volume_rhs(ys, vs, drive(ts), params,
                                     nonlinear=nonlinear, v_tt_prev=a_prev,
                                     derived=derived)
    else:
        def rhs(ys, vs, ts):
            return acceleration(kind, ys, vs, drive(ts), params, derived)

    k1y = y2
    k1v = rhs(y1, y2, t)
    k2y = y2 + 0.5 * dt * k1v
    k2v = rhs(y1 + 0.5 * dt * k1y, k2y, t + 0.5 * dt)
    k3y = y2 + 0.5 * dt * k2v
    k3v = rhs(y1 + 0.5 * dt * k2y, k3y, t + 0.5 * dt)
    k4y = y2 + dt * k3v
    k4v = rhs(y1 + dt * k3y, k4y, t + dt)
    return (y1 + dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
            y2 + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v))


def _drive_args(drive: PressureDrive):
    code = _MODE_CODES[drive.mode]
    if drive.mode == "trace":
        return code, 0.0, 1.0, drive.t0, drive.dt, drive.values
    if drive.mode == "sine":
        return code, drive.amplitude, drive.frequency, 0.0, 1.0, _kernels._EMPTY_TABLE
    return code, 0.0, 1.0, 0.0, 1.0, _kernels._EMPTY_TABLE


def drive_from_config(cfg: SimulationConfig) -> PressureDrive:
    if cfg.A == 0.0:
        return PressureDrive.quiet()
    return PressureDrive.sine(cfg.A, cfg.f)


class WindowedBubble:
    """One bubble advanced over a sequence of abutting time windows.

    State (and the lagged acceleration of the volume model) is carried
    exactly from one window to the next, so splitting an integration at
    arbitrary times changes nothing about the step sequence. This is the
    engine behind trace-driven runs, where windows are the trace sample
    intervals, and behind the coupled stepper, where windows are the macro
    steps of the wave solver.
    """

    def __init__(self, cfg: SimulationConfig,
                 initial: tuple[float, float] | None = None,
                 p_start: float = 0.0):
        self.cfg = cfg
        self.kind = ModelKind.from_name(cfg.model)
        self.params = cfg.params
        self.derived = derive(cfg.params)
        self.is_volume = self.kind == ModelKind.LINEAR_VOLUME
        if initial is None:
            initial = (cfg.params.R0, 0.0)
        p = self.params
        d = self.derived
        if self.is_volume:
            v0 = d.v0
            v = 4.0 / 3.0 * math.pi * initial[0] ** 3 - v0
            vt = 4.0 * math.pi * initial[0] ** 2 * initial[1]
            a = float(linear_volume_rhs(v, vt, p_start, p,
                                        nonlinear=cfg.volume_nonlinear,
                                        v_tt_prev=0.0, derived=d))
            self._state = (v, vt, a)
            self._args = (p.delta * 4.0 * p.mu / p.R0 ** 2, d.omega0 ** 2,
                          4.0 * math.pi * p.R0 / p.rho0, v0,
                          cfg.volume_nonlinear, p.kappa, p.R0)
        else:
            self._state = (float(initial[0]), float(initial[1]))
            self._args = (int(self.kind), p.rho, p.mu, p.sigma, p.chi,
                          p.kappa, p.kappa_s, p.c,
                          d.p_b, gas_reference_pressure(self.kind, p, d), p.R0)
        self._times: list[np.ndarray] = []
        self._primary: list[np.ndarray] = []
        self._secondary: list[np.ndarray] = []
        self.n_steps = 0
        self.steps_left = cfg.max_steps
        self.term = _kernels.TERM_COMPLETED
        self.min_radius = float(initial[0])
        self.max_radius = float(initial[0])
        self.dt_smallest = math.inf
        self.dt_largest = 0.0

    @property
    def alive(self) -> bool:
        return self.term == _kernels.TERM_COMPLETED

    @property
    def radius_state(self) -> tuple[float, float]:
        """Current (R, R_t)."""
        if self.is_volume:
            v, vt, _ = self._state
            R = ((self.derived.v0 + v) * (3.0 / (4.0 * math.pi))) ** (1.0 / 3.0)
            return R, vt / (4.0 * math.pi * R * R)
        return self._state

    def radius_accel(self, p_drive: float) -> float:
        """R_tt from the model right-hand side at the current state."""
        if self.is_volume:
            R, Rt = self.radius_state
            return (self._state[2] / (4.0 * math.pi) - 2.0 * R * Rt * Rt) / (R * R)
        R, Rt = self._state
        return float(acceleration(self.kind, R, Rt, p_drive, self.params,
                                  self.derived))

    def advance(self, t0: float, t_end: float, mode: int, amp: float,
                freq: float, tab_t0: float, tab_dt: float,
                tab: np.ndarray) -> bool:
        """Integrate over [t0, t_end]; returns False once terminated."""
        if not self.alive:
            return False
        if self.steps_left <= 0:
            self.term = _kernels.TERM_STEP_FLOOR
            return False
        cfg = self.cfg
        if self.is_volume:
            (times, vals, rates, n_stored, n_steps, term,
             min_R, max_R, dt_lo, dt_hi, a_prev) = _kernels.integrate_volume(
                *self._args,
                self._state[0], self._state[1], self._state[2], t0, t_end,
                cfg.lam, cfg.dt_min, cfg.dt_max, cfg.r_floor,
                mode, amp, freq, tab_t0, tab_dt, tab,
                self.steps_left, cfg.store_stride)
            self._state = (float(vals[n_stored - 1]),
                           float(rates[n_stored - 1]), float(a_prev))
        else:
            (times, vals, rates, n_stored, n_steps, term,
             min_R, max_R, dt_lo, dt_hi) = _kernels.integrate_radial(
                *self._args,
                self._state[0], self._state[1], t0, t_end,
                cfg.lam, cfg.dt_min, cfg.dt_max, cfg.r_floor,
                mode, amp, freq, tab_t0, tab_dt, tab,
                self.steps_left, cfg.store_stride)
            self._state = (float(vals[n_stored - 1]), float(rates[n_stored - 1]))

        lo = 0 if not self._times else 1
        self._times.append(times[lo:n_stored].copy())
        self._primary.append(vals[lo:n_stored].copy())
        self._secondary.append(rates[lo:n_stored].copy())
        self.n_steps += int(n_steps)
        self.steps_left -= int(n_steps)
        self.term = int(term)
        self.min_radius = min(self.min_radius, float(min_R))
        self.max_radius = max(self.max_radius, float(max_R))
        self.dt_smallest = min(self.dt_smallest, float(dt_lo))
        self.dt_largest = max(self.dt_largest, float(dt_hi))
        return self.alive

    def trajectory(self) -> BubbleTrajectory:
        times = np.concatenate(self._times) if self._times else np.zeros(0)
        vals = np.concatenate(self._primary) if self._primary else np.zeros(0)
        rates = np.concatenate(self._secondary) if self._secondary else np.zeros(0)
        if self.is_volume:
            radii = np.cbrt(np.maximum(self.derived.v0 + vals, 0.0)
                            * (3.0 / (4.0 * math.pi)))
            with np.errstate(divide="ignore", invalid="ignore"):
                velocities = np.where(radii > 0.0,
                                      rates / (4.0 * math.pi * np.square(radii)),
                                      0.0)
        else:
            radii = vals
            velocities = rates
        return BubbleTrajectory(
            times=times,
            radii=radii,
            velocities=velocities,
            termination=TERMINATION_NAMES[self.term],
            n_steps=self.n_steps,
            min_radius=self.min_radius,
            max_radius=self.max_radius,
            dt_smallest=self.dt_smallest if self.n_steps else 0.0,
            dt_largest=self.dt_largest,
            model=self.cfg.model,
        )


def next_sample_time(t: float, tab_t0: float, tab_dt: float) -> float:
    """First trace sample time strictly after t (modulo a 1e-9*dt slack for
    times that sit on a sample up to roundoff); same arithmetic as the
    compiled integrators use to truncate steps."""
    s = (t - tab_t0) / tab_dt
    i = math.floor(s)
    if s - i > 1.0 - 1e-9:
        i += 1.0
    return tab_t0 + (i + 1.0) * tab_dt


def simulate_bubble(cfg: SimulationConfig, drive: PressureDrive | None = None,
                    t0: float = 0.0, t_end: float | None = None,
                    initial: tuple[float, float] | None = None) -> BubbleTrajectory:
    """Integrate one bubble from rest (or *initial*) over [t0, t_end].

    Trace drives are integrated one sample interval at a time, so the result
    is sample-for-sample the same as feeding the intervals to a
    :class:`WindowedBubble` by hand (as the coupled stepper does).
    """
    if drive is None:
        drive = drive_from_config(cfg)
    if t_end is None:
        t_end = t0 + cfg.T
    mode, amp, freq, tab_t0, tab_dt, tab = _drive_args(drive)
    bubble = WindowedBubble(cfg, initial=initial, p_start=float(drive(t0)))
    if mode == _kernels.DRIVE_TABLE:
        ntab = tab.shape[0]
        t = t0
        while t < t_end and bubble.alive:
            t_knot = next_sample_time(t, tab_t0, tab_dt)
            t_stop = t_end if t_knot >= t_end else t_knot
            hi = int((t_knot - tab_t0) / tab_dt + 0.5) + 1
            sub = tab if hi >= ntab else tab[:hi]
            bubble.advance(t, t_stop, mode, amp, freq, tab_t0, tab_dt, sub)
            t = t_stop
        if not bubble._times:   # degenerate window: record the initial state
            bubble.advance(t0, t0, mode, amp, freq, tab_t0, tab_dt, tab)
    else:
        bubble.advance(t0, t_end, mode, amp, freq, tab_t0, tab_dt, tab)
    return bubble.trajectory()


@dataclass(frozen=True)
class UniformSeries:
    """Values on an equispaced time grid t0 + i*dt."""

    t0: float
    dt: float
    values: np.ndarray

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.size)


def resample_uniform(times: np.ndarray, values: np.ndarray, n: int,
                     t_first: float | None = None,
                     t_last: float | None = None) -> UniformSeries:
    """Linear-interpolation resampling onto n equispaced points."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.size != values.size or times.size < 2:
        raise ValueError("need matching time/value arrays of >= 2 samples")
    if n < 2:
        raise ValueError("need n >= 2 output samples")
    lo = times[0] if t_first is None else float(t_first)
    hi = times[-1] if t_last is None else float(t_last)
    if not (times[0] <= lo < hi <= times[-1]):
        raise ValueError(f"resample window [{lo}, {hi}] outside data range "
                         f"[{times[0]}, {times[-1]}]")
    grid = np.linspace(lo, hi, n)
    return UniformSeries(t0=lo, dt=(hi - lo) / (n - 1),
                         values=np.interp(grid, times, values))


def write_trajectory_csv(path, traj: BubbleTrajectory) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("t,R,R_t\n")
        for t, r, v in zip(traj.times, traj.radii, traj.velocities):
            handle.write(f"{t:.17e},{r:.17e},{v:.17e}\n")


def read_series_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read the first two numeric columns (time, value) of a CSV file."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    names = data.dtype.names
    if names is None or len(names) < 2:
        raise ValueError(f"{path}: expected a header and >= 2 columns")
    return np.asarray(data[names[0]], dtype=float), np.asarray(data[names[1]], dtype=float)
